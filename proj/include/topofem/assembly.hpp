#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <span>
#include <vector>

#include "topofem/cutgeom.hpp"
#include "topofem/mesh.hpp"

namespace topofem {

using SpMat = Eigen::SparseMatrix<double>;

// Continuous P_m Lagrange space (m = 1, 2) on the active elements. DOFs are
// keyed by background vertex (m >= 1) and facet midpoint (m = 2), so transfer
// between steps can copy shared DOFs directly.
struct FeSpace {
    const BackgroundMesh* mesh = nullptr;
    const ActiveMesh* active = nullptr;
    int order = 1;
    int dof_count = 0;
    std::vector<int> vertex_dof; // background vertex -> dof, -1 if absent
    std::vector<int> edge_dof;   // background facet -> dof, -1 if absent (m = 2)
    std::vector<Vec2> dof_node;

    FeSpace() = default;
    FeSpace(const BackgroundMesh& m, const ActiveMesh& a, int order);

    int ndof_element() const { return order == 1 ? 3 : 6; }
    void element_dofs(int element, std::span<int> out) const;

    // FE evaluation at a physical point of a given active element.
    double eval(int element, const Eigen::VectorXd& coeffs, const Vec2& x) const;
    Vec2 eval_grad(int element, const Eigen::VectorXd& coeffs, const Vec2& x) const;

    Eigen::VectorXd interpolate(const std::function<double(const Vec2&)>& f) const;
};

// Reference shape functions on (0,0),(1,0),(0,1); local node order is the 3
// vertices, then for m = 2 the midpoints of edges (0,1),(1,2),(2,0).
void shape_values(int order, const Vec2& ref, std::span<double> values);
void shape_gradients(int order, const Vec2& ref, std::span<Vec2> gradients);

// M_ij = int_{Omega^n} phi_i phi_j (interior elements use the full rule,
// cut elements the subzero rule).
SpMat assemble_mass(const FeSpace& space, const StepQuadrature& quad);

// A_ij = int_{Omega^n} grad phi_i . grad phi_j
SpMat assemble_stiffness(const FeSpace& space, const StepQuadrature& quad);

// Direct ghost penalty over the stabilization facets: for each facet patch
// omega_F = T1 cup T2,
//   s_F(u,v) = (1/h^2) int_{omega_F} (u1 - u2)(v1 - v2),
// where u_i is the canonical polynomial extension of u|_{T_i} to the patch.
// The returned matrix is the plain sum over facets; the stability parameter
// gamma_s scales it in the time-step system.
SpMat assemble_ghost_penalty(const FeSpace& space, double h);

// gamma_s = c_gamma * (1 + dt/h), c_gamma > 0.
double gamma_s(double c_gamma, double dt, double h);

// b_i = int_{Omega^n} f phi_i + int_{Gamma^n} g phi_i
Eigen::VectorXd assemble_rhs(const FeSpace& space, const StepQuadrature& quad,
                             const std::function<double(const Vec2&)>& f,
                             const std::function<double(const Vec2&)>& g);

// L2(T)-orthogonal projection of an arbitrary function onto P_m(T), local
// coefficient vector in the element's nodal basis. Consistency-test harness.
Eigen::VectorXd project_onto_element(const BackgroundMesh& mesh, int element, int order,
                                     const std::function<double(const Vec2&)>& u);

// (1/h^2) int_{T1 cup T2} (E p1 - E p2)^2 for element-local coefficient
// vectors p1, p2 (nodal basis); E is the canonical polynomial extension.
double ghost_patch_energy(const BackgroundMesh& mesh, int t1, int t2, int order, double h,
                          const Eigen::VectorXd& p1, const Eigen::VectorXd& p2);

// Sum of patch energies over the stabilization facets with p_i = Pi_{T_i} u.
double ghost_energy_projected(const FeSpace& space, double h,
                              const std::function<double(const Vec2&)>& u);

} // namespace topofem
