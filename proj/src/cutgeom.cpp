#include "topofem/cutgeom.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace topofem {

namespace {

TriRule make_tri_rule(int order) {
    TriRule rule;
    if (order <= 1) {
        rule.points = {{1.0 / 3.0, 1.0 / 3.0}};
        rule.weights = {1.0};
        rule.degree = 1;
    } else if (order == 2) {
        rule.points = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
        rule.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        rule.degree = 2;
    } else if (order <= 4) {
        // 6-point rule, exact to degree 4, positive weights
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        rule.points = {{a1, a1},
                       {1 - 2 * a1, a1},
                       {a1, 1 - 2 * a1},
                       {a2, a2},
                       {1 - 2 * a2, a2},
                       {a2, 1 - 2 * a2}};
        rule.weights = {w1, w1, w1, w2, w2, w2};
        rule.degree = 4;
    } else {
        // 7-point rule, exact to degree 5
        const double a1 = 0.470142064105115, w1 = 0.132394152788506;
        const double a2 = 0.101286507323456, w2 = 0.125939180544827;
        rule.points = {{1.0 / 3.0, 1.0 / 3.0},
                       {a1, a1},
                       {1 - 2 * a1, a1},
                       {a1, 1 - 2 * a1},
                       {a2, a2},
                       {1 - 2 * a2, a2},
                       {a2, 1 - 2 * a2}};
        rule.weights = {0.225, w1, w1, w1, w2, w2, w2};
        rule.degree = 5;
    }
    return rule;
}

SegRule make_seg_rule(int npoints) {
    SegRule rule;
    switch (npoints) {
        case 1:
            rule.points = {0.5};
            rule.weights = {1.0};
            break;
        case 2: {
            const double d = 0.5 / std::sqrt(3.0);
            rule.points = {0.5 - d, 0.5 + d};
            rule.weights = {0.5, 0.5};
            break;
        }
        case 3: {
            const double d = 0.5 * std::sqrt(0.6);
            rule.points = {0.5 - d, 0.5, 0.5 + d};
            rule.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
            break;
        }
        default: {
            const double d1 = 0.5 * 0.861136311594053, d2 = 0.5 * 0.339981043584856;
            rule.points = {0.5 - d1, 0.5 - d2, 0.5 + d2, 0.5 + d1};
            rule.weights = {0.347854845137454 / 2, 0.652145154862546 / 2,
                            0.652145154862546 / 2, 0.347854845137454 / 2};
            break;
        }
    }
    return rule;
}

struct LeafContext {
    const std::function<double(const Vec2&)>* phi;
    const std::function<Vec2(const Vec2&)>* grad_phi;
    const TriRule* vol_rule;
    const SegRule* surf_rule;
    CutQuadrature* out;
    std::vector<std::pair<Vec2, Vec2>>* segments; // optional collector
    double area_tol;
};

void add_full_triangle(const LeafContext& ctx, const Vec2& a, const Vec2& b, const Vec2& c) {
    if (!ctx.out) return;
    const double area = std::abs(triangle_area(a, b, c));
    if (area <= ctx.area_tol) return;
    for (size_t q = 0; q < ctx.vol_rule->points.size(); ++q) {
        const Vec2& r = ctx.vol_rule->points[q];
        ctx.out->volume_points.push_back(a + r.x() * (b - a) + r.y() * (c - a));
        ctx.out->volume_weights.push_back(area * ctx.vol_rule->weights[q]);
    }
}

void add_segment(const LeafContext& ctx, const Vec2& p0, const Vec2& p1) {
    const double len = (p1 - p0).norm();
    if (len <= 1e-14) return;
    if (ctx.segments) ctx.segments->emplace_back(p0, p1);
    if (!ctx.out) return;
    for (size_t q = 0; q < ctx.surf_rule->points.size(); ++q) {
        const Vec2 x = p0 + ctx.surf_rule->points[q] * (p1 - p0);
        Vec2 n = (*ctx.grad_phi)(x);
        const double gn = n.norm();
        if (gn > 1e-13) {
            n /= gn;
        } else {
            // critical point on the interface: fall back to the segment geometry
            const Vec2 d = (p1 - p0) / len;
            n = Vec2(d.y(), -d.x());
            const Vec2 probe = x + 1e-7 * n;
            if ((*ctx.phi)(probe) < (*ctx.phi)(x - 1e-7 * n)) n = -n;
        }
        ctx.out->surface_points.push_back(x);
        ctx.out->surface_weights.push_back(len * ctx.surf_rule->weights[q]);
        ctx.out->surface_normals.push_back(n);
    }
}

// Vertex-linear reconstruction on one leaf triangle; phi = 0 counts as inside.
void process_leaf(const LeafContext& ctx, const std::array<Vec2, 3>& v,
                  const std::array<double, 3>& phi) {
    const bool in[3] = {phi[0] <= 0.0, phi[1] <= 0.0, phi[2] <= 0.0};
    const int n_in = in[0] + in[1] + in[2];
    if (n_in == 3) {
        add_full_triangle(ctx, v[0], v[1], v[2]);
        return;
    }
    if (n_in == 0) return;

    // the lone vertex whose side differs from the other two
    int k = -1;
    const bool lone_inside = (n_in == 1);
    for (int i = 0; i < 3; ++i)
        if (in[i] == lone_inside) k = i;
    const int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
    auto crossing = [&](int a, int b) {
        const double s = phi[a] / (phi[a] - phi[b]);
        return Vec2(v[a] + s * (v[b] - v[a]));
    };
    const Vec2 c1 = crossing(k, k1);
    const Vec2 c2 = crossing(k, k2);

    if (lone_inside) {
        add_full_triangle(ctx, v[k], c1, c2);
    } else {
        add_full_triangle(ctx, v[k1], v[k2], c2);
        add_full_triangle(ctx, v[k1], c2, c1);
    }
    add_segment(ctx, c1, c2);
}

void subdivide(const LeafContext& ctx, const std::array<Vec2, 3>& v, int depth) {
    if (depth == 0) {
        process_leaf(ctx, v, {(*ctx.phi)(v[0]), (*ctx.phi)(v[1]), (*ctx.phi)(v[2])});
        return;
    }
    const Vec2 m01 = 0.5 * (v[0] + v[1]);
    const Vec2 m12 = 0.5 * (v[1] + v[2]);
    const Vec2 m20 = 0.5 * (v[2] + v[0]);
    subdivide(ctx, {v[0], m01, m20}, depth - 1);
    subdivide(ctx, {m01, v[1], m12}, depth - 1);
    subdivide(ctx, {m20, m12, v[2]}, depth - 1);
    subdivide(ctx, {m01, m12, m20}, depth - 1);
}

} // namespace

const TriRule& tri_rule(int order) {
    static const TriRule r1 = make_tri_rule(1);
    static const TriRule r2 = make_tri_rule(2);
    static const TriRule r4 = make_tri_rule(4);
    static const TriRule r5 = make_tri_rule(5);
    if (order <= 1) return r1;
    if (order == 2) return r2;
    if (order <= 4) return r4;
    return r5;
}

const SegRule& seg_rule(int npoints) {
    static const SegRule s1 = make_seg_rule(1);
    static const SegRule s2 = make_seg_rule(2);
    static const SegRule s3 = make_seg_rule(3);
    static const SegRule s4 = make_seg_rule(4);
    if (npoints <= 1) return s1;
    if (npoints == 2) return s2;
    if (npoints == 3) return s3;
    return s4;
}

double CutQuadrature::volume() const {
    double s = 0;
    for (double w : volume_weights) s += w;
    return s;
}

double CutQuadrature::surface_length() const {
    double s = 0;
    for (double w : surface_weights) s += w;
    return s;
}

CutQuadrature cut_triangle_quadrature(const std::array<Vec2, 3>& tri,
                                      const std::function<double(const Vec2&)>& phi,
                                      const std::function<Vec2(const Vec2&)>& grad_phi,
                                      int depth, int rule_order) {
    if (depth < 0) throw std::invalid_argument("cut_triangle_quadrature: depth must be >= 0");
    CutQuadrature out;
    out.subdivision_depth = depth;
    const double area = std::abs(triangle_area(tri[0], tri[1], tri[2]));
    LeafContext ctx{&phi,
                    &grad_phi,
                    &tri_rule(rule_order),
                    &seg_rule(rule_order / 2 + 1),
                    &out,
                    nullptr,
                    1e-14 * area};
    subdivide(ctx, tri, depth);
    return out;
}

CutQuadrature cut_element_quadrature(const BackgroundMesh& mesh, int element,
                                     const LevelSetField& field, double t, int depth,
                                     int rule_order) {
    auto phi = [&](const Vec2& x) { return field.value(x, t); };
    auto grad = [&](const Vec2& x) { return field.spatial_gradient(x, t); };
    CutQuadrature out = cut_triangle_quadrature(mesh.tri_coords(element), phi, grad, depth, rule_order);
    out.element_id = element;
    return out;
}

std::vector<std::pair<Vec2, Vec2>> extract_interface_segments(const BackgroundMesh& mesh,
                                                              const ActiveMesh& active,
                                                              const LevelSetField& field,
                                                              double t, int depth) {
    std::vector<std::pair<Vec2, Vec2>> segments;
    const std::function<double(const Vec2&)> phi = [&](const Vec2& x) {
        return field.value(x, t);
    };
    LeafContext ctx{&phi, nullptr, nullptr, nullptr, nullptr, &segments, 0.0};
    for (int e : active.cut_elements) subdivide(ctx, mesh.tri_coords(e), depth);
    return segments;
}

StepQuadrature build_step_quadrature(const BackgroundMesh& mesh, const ActiveMesh& active,
                                     const LevelSetField& field, double t, int depth,
                                     int rule_order) {
    StepQuadrature quad;
    quad.mesh = &mesh;
    quad.active = &active;
    quad.depth = depth;
    quad.rule_order = rule_order;
    quad.cut_rules.resize(active.cut_elements.size());
    for (size_t i = 0; i < active.cut_elements.size(); ++i)
        quad.cut_rules[i] = cut_element_quadrature(mesh, active.cut_elements[i], field, t,
                                                   depth, rule_order);
    return quad;
}

double integrate_volume(const StepQuadrature& quad,
                        const std::function<double(const Vec2&)>& f) {
    double sum = 0;
    const TriRule& rule = tri_rule(quad.rule_order);
    for (int e : quad.active->interior_elements) {
        auto c = quad.mesh->tri_coords(e);
        const double area = std::abs(triangle_area(c[0], c[1], c[2]));
        for (size_t q = 0; q < rule.points.size(); ++q) {
            const Vec2& r = rule.points[q];
            sum += area * rule.weights[q] * f(c[0] + r.x() * (c[1] - c[0]) + r.y() * (c[2] - c[0]));
        }
    }
    for (const auto& cq : quad.cut_rules)
        for (size_t q = 0; q < cq.volume_points.size(); ++q)
            sum += cq.volume_weights[q] * f(cq.volume_points[q]);
    return sum;
}

double integrate_surface(const StepQuadrature& quad,
                         const std::function<double(const Vec2&)>& g) {
    double sum = 0;
    for (const auto& cq : quad.cut_rules)
        for (size_t q = 0; q < cq.surface_points.size(); ++q)
            sum += cq.surface_weights[q] * g(cq.surface_points[q]);
    return sum;
}

} // namespace topofem
