#include "topofem/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "topofem/mesh.hpp"

namespace topofem {

void attach_eoc(std::vector<ConvergenceRecord>& records) {
    for (size_t i = 1; i < records.size(); ++i) {
        if (records[i - 1].err_linf_l2 > 0 && records[i].err_linf_l2 > 0)
            records[i].eoc_l2 = std::log2(records[i - 1].err_linf_l2 / records[i].err_linf_l2);
        if (records[i - 1].err_l2_h1 > 0 && records[i].err_l2_h1 > 0)
            records[i].eoc_h1 = std::log2(records[i - 1].err_l2_h1 / records[i].err_l2_h1);
    }
}

void ErrorAccumulator::add_step(const FeSpace& space, const StepQuadrature& quad,
                                const Eigen::VectorXd& u_coeffs,
                                const std::function<double(const Vec2&)>& exact,
                                const std::function<Vec2(const Vec2&)>& exact_grad,
                                bool count_h1) {
    double l2_sq = 0, h1_sq = 0;
    auto add = [&](int element, const Vec2& x, double w) {
        const double d = space.eval(element, u_coeffs, x) - exact(x);
        l2_sq += w * d * d;
        if (count_h1) {
            const Vec2 dg = space.eval_grad(element, u_coeffs, x) - exact_grad(x);
            h1_sq += w * dg.squaredNorm();
        }
    };
    const TriRule& rule = tri_rule(quad.rule_order);
    for (int e : space.active->interior_elements) {
        const auto c = quad.mesh->tri_coords(e);
        const double area = std::abs(triangle_area(c[0], c[1], c[2]));
        for (size_t q = 0; q < rule.points.size(); ++q) {
            const Vec2& r = rule.points[q];
            add(e, c[0] + r.x() * (c[1] - c[0]) + r.y() * (c[2] - c[0]), area * rule.weights[q]);
        }
    }
    for (size_t c = 0; c < quad.cut_rules.size(); ++c) {
        const CutQuadrature& cq = quad.cut_rules[c];
        const int e = space.active->cut_elements[c];
        for (size_t q = 0; q < cq.volume_points.size(); ++q)
            add(e, cq.volume_points[q], cq.volume_weights[q]);
    }
    linf_l2_ = std::max(linf_l2_, std::sqrt(std::max(l2_sq, 0.0)));
    if (count_h1) sum_h1_sq_ += h1_sq;
}

ConvergenceRecord ErrorAccumulator::finalize(int L_x, int L_t, double h, double dt) const {
    ConvergenceRecord rec;
    rec.L_x = L_x;
    rec.L_t = L_t;
    rec.h = h;
    rec.dt = dt;
    rec.err_linf_l2 = linf_l2_;
    rec.err_l2_h1 = std::sqrt(std::max(dt * sum_h1_sq_, 0.0));
    return rec;
}

namespace {

int depth_for_resolution(int resolution) {
    int depth = 2;
    while ((1 << depth) < resolution && depth < 8) ++depth;
    return std::clamp(depth, 2, 8);
}

double omega_integral(const LevelSetField& field, const BackgroundMesh& mesh, double t,
                      int depth, const std::function<double(const Vec2&)>& f) {
    const ActiveMesh active = classify_elements(mesh, field, t, 0.0);
    const StepQuadrature quad = build_step_quadrature(mesh, active, field, t, depth, 4);
    return integrate_volume(quad, f);
}

} // namespace

TransportCheck transport_identity_check(const LevelSetField& field, const Rect& bulk,
                                        const std::function<double(const Vec2&)>& u,
                                        double t0, double dt, int resolution) {
    const int slices = std::max(resolution, 1);
    const int depth = depth_for_resolution(resolution);
    const BackgroundMesh mesh = build_background(bulk, 0.5, 2);

    auto u_sq = [&](const Vec2& x) { return u(x) * u(x); };
    TransportCheck out;
    // reference side at a fixed fine depth, so rel_err measures the
    // resolution-controlled surface integral alone
    const int lhs_depth = std::max(depth, 7);
    out.lhs = omega_integral(field, mesh, t0 + dt, lhs_depth, u_sq) -
              omega_integral(field, mesh, t0, lhs_depth, u_sq);

    // composite midpoint in time of the interface integral of V_Gamma u^2
    const double width = dt / slices;
    double rhs = 0;
    for (int i = 0; i < slices; ++i) {
        const double t = t0 + (i + 0.5) * width;
        const ActiveMesh active = classify_elements(mesh, field, t, 0.0);
        const StepQuadrature quad = build_step_quadrature(mesh, active, field, t, depth, 4);
        double slice = 0;
        for (const auto& cq : quad.cut_rules) {
            for (size_t q = 0; q < cq.surface_points.size(); ++q) {
                const Vec2& x = cq.surface_points[q];
                const double gn = field.spatial_gradient(x, t).norm();
                if (gn < kEpsGrad) continue;
                const double v_gamma = -field.time_derivative(x, t) / gn;
                slice += cq.surface_weights[q] * v_gamma * u_sq(x);
            }
        }
        rhs += width * slice;
    }
    out.rhs = rhs;
    out.rel_err = std::abs(out.lhs - out.rhs) / std::max(std::abs(out.lhs), 1e-14);
    return out;
}

double narrow_band_monitor(const LevelSetField& field, const Rect& bulk,
                           const std::function<double(const Vec2&)>& u,
                           const std::function<Vec2(const Vec2&)>& grad_u, double t0,
                           double dt) {
    const int depth = 5;
    const BackgroundMesh mesh = build_background(bulk, 0.5, 3);

    auto u_sq = [&](const Vec2& x) { return u(x) * u(x); };
    const double lhs = omega_integral(field, mesh, t0 + dt, depth, u_sq) -
                       omega_integral(field, mesh, t0, depth, u_sq);
    if (lhs <= 0) return 0.0;

    // hold-all: bounding box of Omega(t) sampled over the step, inflated by 2h
    Rect box{bulk.x_hi, bulk.x_lo, bulk.y_hi, bulk.y_lo};
    bool any = false;
    for (double t : {t0, t0 + 0.5 * dt, t0 + dt}) {
        const ActiveMesh active = classify_elements(mesh, field, t, 0.0);
        for (const auto* set : {&active.interior_elements, &active.cut_elements}) {
            for (int e : *set) {
                for (const Vec2& v : mesh.tri_coords(e)) {
                    box.x_lo = std::min(box.x_lo, v.x());
                    box.x_hi = std::max(box.x_hi, v.x());
                    box.y_lo = std::min(box.y_lo, v.y());
                    box.y_hi = std::max(box.y_hi, v.y());
                    any = true;
                }
            }
        }
    }
    if (!any) return 0.0;
    box = box.inflated(2 * mesh.h);

    // ||u||^2 + ||grad u||^2 over the box by composite Gauss
    const int cells = 64;
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    const double wx = box.width() / cells, wy = box.height() / cells;
    double denom = 0;
    for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
            for (double a : gp) {
                for (double b : gp) {
                    const Vec2 x(box.x_lo + (i + a) * wx, box.y_lo + (j + b) * wy);
                    denom += 0.25 * wx * wy * (u_sq(x) + grad_u(x).squaredNorm());
                }
            }
        }
    }
    return lhs / (dt * std::max(denom, 1e-300));
}

BlowupResult blowup_demo(const LevelSetField& field, const Rect& bulk, double t_c,
                         const std::vector<double>& dt_list, int mesh_levels, int depth) {
    const BackgroundMesh mesh = build_background(bulk, 0.5, mesh_levels);
    auto one = [](const Vec2&) { return 1.0; };

    BlowupResult out;
    const double area_at_tc = omega_integral(field, mesh, t_c, depth, one);
    for (double dt : dt_list) {
        const double t = t_c - dt;
        const double area = omega_integral(field, mesh, t, depth, one);
        out.dts.push_back(dt);
        out.quotients.push_back((area_at_tc - area) / dt);

        // diagnostic: the pointwise interface-velocity sup at t_c - dt
        const ActiveMesh active = classify_elements(mesh, field, t, 0.0);
        const StepQuadrature quad = build_step_quadrature(mesh, active, field, t, depth, 2);
        double sup_v = 0;
        for (const auto& cq : quad.cut_rules) {
            for (const Vec2& x : cq.surface_points) {
                const double gn = field.spatial_gradient(x, t).norm();
                if (gn < kEpsGrad) continue;
                sup_v = std::max(sup_v, -field.time_derivative(x, t) / gn);
            }
        }
        out.sup_velocity.push_back(sup_v);
    }

    auto fit_slope = [](const std::vector<double>& xs, const std::vector<double>& ys) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            if (ys[i] <= 0) continue;
            const double lx = std::log(xs[i]), ly = std::log(ys[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++n;
        }
        if (n < 2) return 0.0;
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    out.slope = fit_slope(out.dts, out.quotients);
    out.sup_velocity_slope = fit_slope(out.dts, out.sup_velocity);
    return out;
}

std::string convergence_csv_text(const std::vector<ConvergenceRecord>& records,
                                 const std::string& note) {
    std::string text;
    if (!note.empty()) text += "# " + note + "\n";
    text += "Lx,Lt,h,dt,err_linf_l2,err_l2_h1,eoc_l2,eoc_h1\n";
    char line[256];
    for (const auto& r : records) {
        std::snprintf(line, sizeof(line), "%d,%d,%.12e,%.12e,%.12e,%.12e,", r.L_x, r.L_t, r.h,
                      r.dt, r.err_linf_l2, r.err_l2_h1);
        text += line;
        if (r.eoc_l2) {
            std::snprintf(line, sizeof(line), "%.6f,", *r.eoc_l2);
            text += line;
        } else {
            text += ",";
        }
        if (r.eoc_h1) {
            std::snprintf(line, sizeof(line), "%.6f", *r.eoc_h1);
            text += line;
        }
        text += "\n";
    }
    return text;
}

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRecord>& records,
                           const std::string& note) {
    std::ofstream out(path);
    out << convergence_csv_text(records, note);
}

} // namespace topofem
