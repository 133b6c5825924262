#include "topofem/assembly.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace topofem {

void shape_values(int order, const Vec2& ref, std::span<double> values) {
    const double l0 = 1.0 - ref.x() - ref.y(), l1 = ref.x(), l2 = ref.y();
    if (order == 1) {
        values[0] = l0;
        values[1] = l1;
        values[2] = l2;
        return;
    }
    values[0] = l0 * (2 * l0 - 1);
    values[1] = l1 * (2 * l1 - 1);
    values[2] = l2 * (2 * l2 - 1);
    values[3] = 4 * l0 * l1;
    values[4] = 4 * l1 * l2;
    values[5] = 4 * l2 * l0;
}

void shape_gradients(int order, const Vec2& ref, std::span<Vec2> gradients) {
    const double l0 = 1.0 - ref.x() - ref.y(), l1 = ref.x(), l2 = ref.y();
    const Vec2 d0(-1, -1), d1(1, 0), d2(0, 1);
    if (order == 1) {
        gradients[0] = d0;
        gradients[1] = d1;
        gradients[2] = d2;
        return;
    }
    gradients[0] = (4 * l0 - 1) * d0;
    gradients[1] = (4 * l1 - 1) * d1;
    gradients[2] = (4 * l2 - 1) * d2;
    gradients[3] = 4 * (l1 * d0 + l0 * d1);
    gradients[4] = 4 * (l2 * d1 + l1 * d2);
    gradients[5] = 4 * (l0 * d2 + l2 * d0);
}

namespace {

struct ElementMap {
    Vec2 origin;
    Mat2 jac;     // [b-a | c-a]
    Mat2 jac_inv_t;
    double area;

    explicit ElementMap(const std::array<Vec2, 3>& c) {
        origin = c[0];
        jac.col(0) = c[1] - c[0];
        jac.col(1) = c[2] - c[0];
        jac_inv_t = jac.inverse().transpose();
        area = std::abs(0.5 * jac.determinant());
    }
    Vec2 to_physical(const Vec2& ref) const { return origin + jac * ref; }
    Vec2 to_reference(const Vec2& x) const { return jac.inverse() * (x - origin); }
};

constexpr int kMaxDof = 6;

} // namespace

FeSpace::FeSpace(const BackgroundMesh& m, const ActiveMesh& a, int ord)
    : mesh(&m), active(&a), order(ord) {
    if (order != 1 && order != 2)
        throw std::invalid_argument("FeSpace: order must be 1 or 2");
    vertex_dof.assign(mesh->vertices.size(), -1);
    if (order == 2) edge_dof.assign(mesh->facets.size(), -1);

    for (int e : active->active_elements) {
        for (int v : mesh->triangles[e]) {
            if (vertex_dof[v] < 0) {
                vertex_dof[v] = dof_count++;
                dof_node.push_back(mesh->vertices[v]);
            }
        }
        if (order == 2) {
            for (int f : mesh->tri_facets[e]) {
                if (edge_dof[f] < 0) {
                    edge_dof[f] = dof_count++;
                    dof_node.push_back(0.5 * (mesh->vertices[mesh->facets[f].v0] +
                                              mesh->vertices[mesh->facets[f].v1]));
                }
            }
        }
    }
}

void FeSpace::element_dofs(int element, std::span<int> out) const {
    const auto& tri = mesh->triangles[element];
    out[0] = vertex_dof[tri[0]];
    out[1] = vertex_dof[tri[1]];
    out[2] = vertex_dof[tri[2]];
    if (order == 2) {
        out[3] = edge_dof[mesh->tri_facets[element][0]];
        out[4] = edge_dof[mesh->tri_facets[element][1]];
        out[5] = edge_dof[mesh->tri_facets[element][2]];
    }
}

double FeSpace::eval(int element, const Eigen::VectorXd& coeffs, const Vec2& x) const {
    const ElementMap map(mesh->tri_coords(element));
    double N[kMaxDof];
    shape_values(order, map.to_reference(x), {N, static_cast<size_t>(ndof_element())});
    int dofs[kMaxDof];
    element_dofs(element, {dofs, static_cast<size_t>(ndof_element())});
    double v = 0;
    for (int i = 0; i < ndof_element(); ++i) v += coeffs[dofs[i]] * N[i];
    return v;
}

Vec2 FeSpace::eval_grad(int element, const Eigen::VectorXd& coeffs, const Vec2& x) const {
    const ElementMap map(mesh->tri_coords(element));
    Vec2 dN[kMaxDof];
    shape_gradients(order, map.to_reference(x), {dN, static_cast<size_t>(ndof_element())});
    int dofs[kMaxDof];
    element_dofs(element, {dofs, static_cast<size_t>(ndof_element())});
    Vec2 g(0, 0);
    for (int i = 0; i < ndof_element(); ++i) g += coeffs[dofs[i]] * (map.jac_inv_t * dN[i]);
    return g;
}

Eigen::VectorXd FeSpace::interpolate(const std::function<double(const Vec2&)>& f) const {
    Eigen::VectorXd u(dof_count);
    for (int i = 0; i < dof_count; ++i) u[i] = f(dof_node[i]);
    return u;
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Accumulate w * N N^T (or gradient products) over all quadrature points of
// the element's subzero region.
template <typename PointFn>
void element_matrix(const FeSpace& space, int element, int npts, PointFn point_at,
                    bool gradients, Eigen::Matrix<double, kMaxDof, kMaxDof>& out) {
    const ElementMap map(space.mesh->tri_coords(element));
    const int nd = space.ndof_element();
    out.setZero();
    double N[kMaxDof];
    Vec2 dN[kMaxDof];
    for (int q = 0; q < npts; ++q) {
        auto [x, w] = point_at(q);
        const Vec2 ref = map.to_reference(x);
        if (!gradients) {
            shape_values(space.order, ref, {N, static_cast<size_t>(nd)});
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j) out(i, j) += w * N[i] * N[j];
        } else {
            shape_gradients(space.order, ref, {dN, static_cast<size_t>(nd)});
            Vec2 g[kMaxDof];
            for (int i = 0; i < nd; ++i) g[i] = map.jac_inv_t * dN[i];
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j) out(i, j) += w * g[i].dot(g[j]);
        }
    }
}

SpMat assemble_volume_form(const FeSpace& space, const StepQuadrature& quad, bool gradients) {
    const int nd = space.ndof_element();
    std::vector<Triplet> triplets;
    triplets.reserve((space.active->interior_elements.size() + quad.cut_rules.size()) * nd * nd);
    Eigen::Matrix<double, kMaxDof, kMaxDof> local;
    int dofs[kMaxDof];

    const TriRule& rule = tri_rule(quad.rule_order);
    for (int e : space.active->interior_elements) {
        const ElementMap map(space.mesh->tri_coords(e));
        element_matrix(
            space, e, static_cast<int>(rule.points.size()),
            [&](int q) {
                return std::pair<Vec2, double>(map.to_physical(rule.points[q]),
                                               map.area * rule.weights[q]);
            },
            gradients, local);
        space.element_dofs(e, {dofs, static_cast<size_t>(nd)});
        for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j) triplets.emplace_back(dofs[i], dofs[j], local(i, j));
    }
    for (size_t c = 0; c < quad.cut_rules.size(); ++c) {
        const CutQuadrature& cq = quad.cut_rules[c];
        const int e = space.active->cut_elements[c];
        element_matrix(
            space, e, static_cast<int>(cq.volume_points.size()),
            [&](int q) {
                return std::pair<Vec2, double>(cq.volume_points[q], cq.volume_weights[q]);
            },
            gradients, local);
        space.element_dofs(e, {dofs, static_cast<size_t>(nd)});
        for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j) triplets.emplace_back(dofs[i], dofs[j], local(i, j));
    }

    SpMat out(space.dof_count, space.dof_count);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

// Values of the canonical extensions of both elements' bases at a physical
// point; b_k = E(phi_k|T1) - E(phi_k|T2) over the union dof set.
struct PatchBasis {
    int ndofs = 0;                 // union dof count
    int dof_ids[2 * kMaxDof];      // global ids
    int local_of[2][kMaxDof];      // element-local slot -> union slot

    void difference(const FeSpace& space, const ElementMap& m1, const ElementMap& m2,
                    const Vec2& x, std::span<double> b) const {
        double n1[kMaxDof], n2[kMaxDof];
        const int nd = space.ndof_element();
        shape_values(space.order, m1.to_reference(x), {n1, static_cast<size_t>(nd)});
        shape_values(space.order, m2.to_reference(x), {n2, static_cast<size_t>(nd)});
        for (int k = 0; k < ndofs; ++k) b[k] = 0;
        for (int i = 0; i < nd; ++i) {
            b[local_of[0][i]] += n1[i];
            b[local_of[1][i]] -= n2[i];
        }
    }
};

PatchBasis build_patch(const FeSpace& space, int t1, int t2) {
    PatchBasis patch;
    const int nd = space.ndof_element();
    int d1[kMaxDof], d2[kMaxDof];
    space.element_dofs(t1, {d1, static_cast<size_t>(nd)});
    space.element_dofs(t2, {d2, static_cast<size_t>(nd)});
    auto slot = [&](int dof) {
        for (int k = 0; k < patch.ndofs; ++k)
            if (patch.dof_ids[k] == dof) return k;
        patch.dof_ids[patch.ndofs] = dof;
        return patch.ndofs++;
    };
    for (int i = 0; i < nd; ++i) patch.local_of[0][i] = slot(d1[i]);
    for (int i = 0; i < nd; ++i) patch.local_of[1][i] = slot(d2[i]);
    return patch;
}

} // namespace

SpMat assemble_mass(const FeSpace& space, const StepQuadrature& quad) {
    return assemble_volume_form(space, quad, false);
}

SpMat assemble_stiffness(const FeSpace& space, const StepQuadrature& quad) {
    return assemble_volume_form(space, quad, true);
}

SpMat assemble_ghost_penalty(const FeSpace& space, double h) {
    std::vector<Triplet> triplets;
    const TriRule& rule = tri_rule(2 * space.order); // integrand degree 2m, exact
    const double scale = 1.0 / (h * h);
    double b[2 * kMaxDof];

    for (int f : space.active->stabilization_facets) {
        const Facet& facet = space.mesh->facets[f];
        const int t1 = facet.tri[0], t2 = facet.tri[1];
        const PatchBasis patch = build_patch(space, t1, t2);
        const ElementMap m1(space.mesh->tri_coords(t1));
        const ElementMap m2(space.mesh->tri_coords(t2));

        Eigen::Matrix<double, 2 * kMaxDof, 2 * kMaxDof> local;
        local.setZero();
        for (const ElementMap* m : {&m1, &m2}) {
            for (size_t q = 0; q < rule.points.size(); ++q) {
                const Vec2 x = m->to_physical(rule.points[q]);
                const double w = scale * m->area * rule.weights[q];
                patch.difference(space, m1, m2, x, {b, static_cast<size_t>(patch.ndofs)});
                for (int i = 0; i < patch.ndofs; ++i)
                    for (int j = 0; j < patch.ndofs; ++j) local(i, j) += w * b[i] * b[j];
            }
        }
        for (int i = 0; i < patch.ndofs; ++i)
            for (int j = 0; j < patch.ndofs; ++j)
                triplets.emplace_back(patch.dof_ids[i], patch.dof_ids[j], local(i, j));
    }

    SpMat out(space.dof_count, space.dof_count);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

double gamma_s(double c_gamma, double dt, double h) {
    if (c_gamma <= 0) throw std::invalid_argument("gamma_s: c_gamma must be positive");
    return c_gamma * (1.0 + dt / h);
}

Eigen::VectorXd assemble_rhs(const FeSpace& space, const StepQuadrature& quad,
                             const std::function<double(const Vec2&)>& f,
                             const std::function<double(const Vec2&)>& g) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dof_count);
    const int nd = space.ndof_element();
    double N[kMaxDof];
    int dofs[kMaxDof];

    auto add_point = [&](int element, const ElementMap& map, const Vec2& x, double w,
                         const std::function<double(const Vec2&)>& fn) {
        shape_values(space.order, map.to_reference(x), {N, static_cast<size_t>(nd)});
        space.element_dofs(element, {dofs, static_cast<size_t>(nd)});
        const double v = w * fn(x);
        for (int i = 0; i < nd; ++i) b[dofs[i]] += v * N[i];
    };

    const TriRule& rule = tri_rule(quad.rule_order);
    for (int e : space.active->interior_elements) {
        const ElementMap map(space.mesh->tri_coords(e));
        for (size_t q = 0; q < rule.points.size(); ++q)
            add_point(e, map, map.to_physical(rule.points[q]), map.area * rule.weights[q], f);
    }
    for (size_t c = 0; c < quad.cut_rules.size(); ++c) {
        const CutQuadrature& cq = quad.cut_rules[c];
        const int e = space.active->cut_elements[c];
        const ElementMap map(space.mesh->tri_coords(e));
        for (size_t q = 0; q < cq.volume_points.size(); ++q)
            add_point(e, map, cq.volume_points[q], cq.volume_weights[q], f);
        for (size_t q = 0; q < cq.surface_points.size(); ++q)
            add_point(e, map, cq.surface_points[q], cq.surface_weights[q], g);
    }
    return b;
}

Eigen::VectorXd project_onto_element(const BackgroundMesh& mesh, int element, int order,
                                     const std::function<double(const Vec2&)>& u) {
    const int nd = order == 1 ? 3 : 6;
    const ElementMap map(mesh.tri_coords(element));
    const TriRule& rule = tri_rule(2 * order + 2);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nd, nd);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd);
    double N[kMaxDof];
    for (size_t q = 0; q < rule.points.size(); ++q) {
        shape_values(order, rule.points[q], {N, static_cast<size_t>(nd)});
        const double w = map.area * rule.weights[q];
        const double uq = u(map.to_physical(rule.points[q]));
        for (int i = 0; i < nd; ++i) {
            rhs[i] += w * uq * N[i];
            for (int j = 0; j < nd; ++j) M(i, j) += w * N[i] * N[j];
        }
    }
    return M.ldlt().solve(rhs);
}

double ghost_patch_energy(const BackgroundMesh& mesh, int t1, int t2, int order, double h,
                          const Eigen::VectorXd& p1, const Eigen::VectorXd& p2) {
    const int nd = order == 1 ? 3 : 6;
    const ElementMap m1(mesh.tri_coords(t1));
    const ElementMap m2(mesh.tri_coords(t2));
    const TriRule& rule = tri_rule(2 * order);
    double energy = 0;
    double n1[kMaxDof], n2[kMaxDof];
    for (const ElementMap* m : {&m1, &m2}) {
        for (size_t q = 0; q < rule.points.size(); ++q) {
            const Vec2 x = m->to_physical(rule.points[q]);
            shape_values(order, m1.to_reference(x), {n1, static_cast<size_t>(nd)});
            shape_values(order, m2.to_reference(x), {n2, static_cast<size_t>(nd)});
            double u1 = 0, u2 = 0;
            for (int i = 0; i < nd; ++i) {
                u1 += p1[i] * n1[i];
                u2 += p2[i] * n2[i];
            }
            energy += m->area * rule.weights[q] * (u1 - u2) * (u1 - u2);
        }
    }
    return energy / (h * h);
}

double ghost_energy_projected(const FeSpace& space, double h,
                              const std::function<double(const Vec2&)>& u) {
    double total = 0;
    for (int f : space.active->stabilization_facets) {
        const Facet& facet = space.mesh->facets[f];
        const Eigen::VectorXd p1 = project_onto_element(*space.mesh, facet.tri[0], space.order, u);
        const Eigen::VectorXd p2 = project_onto_element(*space.mesh, facet.tri[1], space.order, u);
        total += ghost_patch_energy(*space.mesh, facet.tri[0], facet.tri[1], space.order, h, p1, p2);
    }
    return total;
}

} // namespace topofem
