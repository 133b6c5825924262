#include "topofem/levelset.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "topofem/errors.hpp"

namespace topofem {

std::string classification_name(Classification c) {
    switch (c) {
        case Classification::VanishingIsland: return "VanishingIsland";
        case Classification::CreationIsland: return "CreationIsland";
        case Classification::Splitting: return "Splitting";
        case Classification::Merging: return "Merging";
        case Classification::HoleCreation: return "HoleCreation";
        case Classification::HoleVanishing: return "HoleVanishing";
        case Classification::Degenerate: return "Degenerate";
        case Classification::Regular: return "Regular";
    }
    return "Regular";
}

double normal_velocity(const LevelSetField& field, const Vec2& x, double t, double eps_grad) {
    const Vec2 g = field.spatial_gradient(x, t);
    const double gn = g.norm();
    if (gn < eps_grad)
        throw NearCriticalPoint("normal_velocity: |grad phi| below eps_grad");
    return -field.time_derivative(x, t) / gn;
}

Classification classify_critical(double lambda1, double lambda2, double dphi_dt,
                                 bool degenerate) {
    if (degenerate || dphi_dt == 0.0) return Classification::Degenerate;
    if (lambda1 > 0)
        return dphi_dt > 0 ? Classification::VanishingIsland : Classification::CreationIsland;
    if (lambda2 < 0)
        return dphi_dt > 0 ? Classification::HoleCreation : Classification::HoleVanishing;
    return dphi_dt > 0 ? Classification::Splitting : Classification::Merging;
}

Classification classify_critical(std::span<const double> eigenvalues, double dphi_dt,
                                 bool degenerate) {
    if (eigenvalues.size() != 2)
        throw UnsupportedDimension("classify_critical: only d = 2 is implemented");
    return classify_critical(eigenvalues[0], eigenvalues[1], dphi_dt, degenerate);
}

namespace {

struct NewtonResult {
    bool converged = false;
    Vec2 x;
    double t = 0;
    double residual = 0;
};

// Newton on F(x,t) = (phi, d phi/dx1, d phi/dx2); the time column of the
// Jacobian uses a central difference of the spatial gradient.
NewtonResult newton_root(const LevelSetField& field, Vec2 x, double t,
                         const SpaceTimeBox& box) {
    constexpr int kMaxIter = 50;
    constexpr double kTol = 1e-12;
    const double dt_fd = 1e-6;

    NewtonResult res;
    for (int it = 0; it < kMaxIter; ++it) {
        const double phi = field.value(x, t);
        const Vec2 g = field.spatial_gradient(x, t);
        Eigen::Vector3d F(phi, g.x(), g.y());
        res.residual = F.lpNorm<Eigen::Infinity>();
        if (res.residual < kTol) {
            res.converged = true;
            res.x = x;
            res.t = t;
            return res;
        }
        const Mat2 H = field.spatial_hessian(x, t);
        const Vec2 gt = (field.spatial_gradient(x, t + dt_fd) -
                         field.spatial_gradient(x, t - dt_fd)) /
                        (2 * dt_fd);
        Eigen::Matrix3d J;
        J << g.x(), g.y(), field.time_derivative(x, t), //
            H(0, 0), H(0, 1), gt.x(),                   //
            H(1, 0), H(1, 1), gt.y();
        const Eigen::Vector3d step = J.fullPivLu().solve(F);
        if (!step.allFinite()) return res;
        x -= step.head<2>();
        t -= step[2];
        // keep iterates from drifting far outside the search box
        const double margin = 1.0;
        const double w = box.space.width(), h = box.space.height(), tw = box.t_hi - box.t_lo;
        if (x.x() < box.space.x_lo - margin * w || x.x() > box.space.x_hi + margin * w ||
            x.y() < box.space.y_lo - margin * h || x.y() > box.space.y_hi + margin * h ||
            t < box.t_lo - margin * tw || t > box.t_hi + margin * tw)
            return res;
    }
    return res;
}

CriticalPointReport report_from_root(const LevelSetField& field, const Vec2& x, double t) {
    CriticalPointReport rep;
    rep.found = true;
    rep.x_c = x;
    rep.t_c = t;
    rep.grad_norm_at_root = field.spatial_gradient(x, t).norm();
    const Mat2 H = field.spatial_hessian(x, t);
    const double mean = 0.5 * (H(0, 0) + H(1, 1));
    const double disc = std::sqrt(std::pow(0.5 * (H(0, 0) - H(1, 1)), 2) + H(0, 1) * H(1, 0));
    rep.lambda1 = mean - disc;
    rep.lambda2 = mean + disc;
    rep.dphi_dt = field.time_derivative(x, t);
    const double det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
    const double norm_sq = H.squaredNorm();
    rep.degenerate = std::abs(det) < kDegeneracyTol * norm_sq || norm_sq == 0.0;
    rep.classification =
        classify_critical(rep.lambda1, rep.lambda2, rep.dphi_dt, rep.degenerate);
    return rep;
}

bool accept_root(const LevelSetField& field, const NewtonResult& r, const SpaceTimeBox& box) {
    if (!r.converged) return false;
    const double slack = 1e-9 * (1 + box.space.width() + box.space.height());
    if (r.x.x() < box.space.x_lo - slack || r.x.x() > box.space.x_hi + slack ||
        r.x.y() < box.space.y_lo - slack || r.x.y() > box.space.y_hi + slack ||
        r.t < box.t_lo - slack || r.t > box.t_hi + slack)
        return false;
    return field.is_smooth_at(r.x, r.t);
}

} // namespace

CriticalPointReport find_critical_point(const LevelSetField& field, const Vec2& seed_x,
                                        double seed_t, const SpaceTimeBox& box) {
    NewtonResult r = newton_root(field, seed_x, seed_t, box);
    if (accept_root(field, r, box)) return report_from_root(field, r.x, r.t);

    // multi-start fallback on a fixed 8x8x8 grid of cell centers
    constexpr int kGrid = 8;
    for (int i = 0; i < kGrid; ++i) {
        for (int j = 0; j < kGrid; ++j) {
            for (int k = 0; k < kGrid; ++k) {
                const Vec2 x(box.space.x_lo + box.space.width() * (i + 0.5) / kGrid,
                             box.space.y_lo + box.space.height() * (j + 0.5) / kGrid);
                const double t = box.t_lo + (box.t_hi - box.t_lo) * (k + 0.5) / kGrid;
                r = newton_root(field, x, t, box);
                if (accept_root(field, r, box)) return report_from_root(field, r.x, r.t);
            }
        }
    }
    return CriticalPointReport{}; // Regular: no root in box
}

std::vector<CriticalPointReport> find_all_critical_points(const LevelSetField& field,
                                                          const SpaceTimeBox& box) {
    std::vector<CriticalPointReport> roots;
    const double scale = 1 + box.space.width() + box.space.height() + (box.t_hi - box.t_lo);
    constexpr int kGrid = 8;
    for (int i = 0; i < kGrid; ++i) {
        for (int j = 0; j < kGrid; ++j) {
            for (int k = 0; k < kGrid; ++k) {
                const Vec2 x(box.space.x_lo + box.space.width() * (i + 0.5) / kGrid,
                             box.space.y_lo + box.space.height() * (j + 0.5) / kGrid);
                const double t = box.t_lo + (box.t_hi - box.t_lo) * (k + 0.5) / kGrid;
                const NewtonResult r = newton_root(field, x, t, box);
                if (!accept_root(field, r, box)) continue;
                bool known = false;
                for (const auto& known_root : roots) {
                    if ((known_root.x_c - r.x).norm() + std::abs(known_root.t_c - r.t) <
                        1e-6 * scale) {
                        known = true;
                        break;
                    }
                }
                if (!known) roots.push_back(report_from_root(field, r.x, r.t));
            }
        }
    }
    return roots;
}

LevelSetField time_reversed(const LevelSetField& field, double pivot) {
    LevelSetField out;
    auto flip = [pivot](double t) { return 2 * pivot - t; };
    out.value = [field, flip](const Vec2& x, double t) { return field.value(x, flip(t)); };
    out.spatial_gradient = [field, flip](const Vec2& x, double t) {
        return field.spatial_gradient(x, flip(t));
    };
    out.time_derivative = [field, flip](const Vec2& x, double t) {
        return -field.time_derivative(x, flip(t));
    };
    out.spatial_hessian = [field, flip](const Vec2& x, double t) {
        return field.spatial_hessian(x, flip(t));
    };
    out.mixed_derivative = [field, flip](const Vec2& x, double t) {
        return Vec2(-field.mixed_derivative(x, flip(t)));
    };
    out.smoothness = field.smoothness;
    if (field.smooth_at) {
        out.smooth_at = [field, flip](const Vec2& x, double t) {
            return field.smooth_at(x, flip(t));
        };
    }
    return out;
}

LevelSetField scaled(const LevelSetField& field, double c) {
    if (c <= 0) throw std::invalid_argument("scaled: c must be positive");
    LevelSetField out;
    out.value = [field, c](const Vec2& x, double t) { return c * field.value(x, t); };
    out.spatial_gradient = [field, c](const Vec2& x, double t) {
        return Vec2(c * field.spatial_gradient(x, t));
    };
    out.time_derivative = [field, c](const Vec2& x, double t) {
        return c * field.time_derivative(x, t);
    };
    out.spatial_hessian = [field, c](const Vec2& x, double t) {
        return Mat2(c * field.spatial_hessian(x, t));
    };
    out.mixed_derivative = [field, c](const Vec2& x, double t) {
        return Vec2(c * field.mixed_derivative(x, t));
    };
    out.smoothness = field.smoothness;
    out.smooth_at = field.smooth_at;
    return out;
}

ScenarioClassification classify_scenario(const Scenario& scenario) {
    ScenarioClassification out;
    if (scenario.field.smoothness == Smoothness::LipschitzOnly) {
        out.lipschitz_flagged = true;
        return out;
    }
    out.reports = find_all_critical_points(scenario.field, scenario.classify_box);
    if (out.reports.empty()) out.reports.push_back(CriticalPointReport{}); // Regular
    return out;
}

namespace {
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}
} // namespace

std::string report_json_line(const std::string& name, const CriticalPointReport& report) {
    if (!report.found) {
        return "{\"name\":\"" + name +
               "\",\"x_c\":null,\"t_c\":null,\"lambda1\":null,\"lambda2\":null,"
               "\"dphi_dt\":null,\"class\":\"Regular\"}";
    }
    return "{\"name\":\"" + name + "\",\"x_c\":[" + num(report.x_c.x()) + "," +
           num(report.x_c.y()) + "],\"t_c\":" + num(report.t_c) +
           ",\"lambda1\":" + num(report.lambda1) + ",\"lambda2\":" + num(report.lambda2) +
           ",\"dphi_dt\":" + num(report.dphi_dt) + ",\"class\":\"" +
           classification_name(report.classification) + "\"}";
}

std::string lipschitz_json_line(const std::string& name) {
    return "{\"name\":\"" + name +
           "\",\"x_c\":null,\"t_c\":null,\"lambda1\":null,\"lambda2\":null,"
           "\"dphi_dt\":null,\"class\":\"LipschitzOnly\"}";
}

} // namespace topofem
