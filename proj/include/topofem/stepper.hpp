#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "topofem/assembly.hpp"
#include "topofem/verify.hpp"

namespace topofem {

// Heat-equation data on the evolving domain: source f = du/dt - lap u and
// Neumann flux g = grad u . n on Gamma(t), n = grad phi / |grad phi|.
struct ManufacturedProblem {
    LevelSetField field;
    std::function<double(const Vec2&, double)> u;
    std::function<Vec2(const Vec2&, double)> grad_u;
    std::function<double(const Vec2&, double)> f;
    std::function<double(const Vec2&, double)> g;
};

// u = phi^2 + (x1 + x2 + 1) with the residual source and flux it induces.
ManufacturedProblem paper_solution_problem(const LevelSetField& field);
// u = x1 + x2 + 1 (stationary, harmonic): f = 0, g = (1,1).n.
ManufacturedProblem stationary_linear_problem(const LevelSetField& field);
// f = 0, g = 0; `initial` only seeds u^0 (stability studies).
ManufacturedProblem zero_data_problem(const LevelSetField& field,
                                      const std::function<double(const Vec2&)>& initial);

enum class Method { BDF1, BDF2 };

struct StepperConfig {
    Method method = Method::BDF1;
    int fe_order = 1; // m in {1,2}
    int levels_x = 1;
    int levels_t = 2;
    Rect bulk{-2.0, 2.0, -1.5, 1.5};
    double h0 = 0.5;
    double T = 0.5;
    double dt0 = 0.1; // dt = dt0 * 2^-levels_t
    double c_gamma = 1.0;
    int quad_depth = 0; // 0: 2 for m=1, 3 for m=2
    double solver_tol = 1e-11;
    double delta_safety = 2.0;
    int vmax_slices = 200;
    int snapshot_every = 0;
    std::string snapshot_prefix = "snapshot";

    double dt() const { return dt0 * std::pow(2.0, -levels_t); }
    int depth() const { return quad_depth > 0 ? quad_depth : (fe_order == 1 ? 2 : 3); }
    int rule_order() const { return 2 * fe_order; }
    void validate() const;
};

struct LedgerRow {
    int n = 0;
    double t = 0;
    double l2_sq = 0;    // ||u_h^n||^2_{Omega^n}
    double h1_sq = 0;    // ||grad u_h^n||^2_{Omega^n}
    double ghost_sq = 0; // s_h^n(u_h^n, u_h^n), unscaled by gamma_s
    int solver_iters = 0;
};

struct RunResult {
    ConvergenceRecord record;
    std::vector<LedgerRow> ledger;
    double gamma_s_value = 0;
    int singular_step = -1; // step index whose interval contains t_c, if known
};

// Transfer a coefficient vector between spaces: shared DOFs copy; newly
// activated DOFs take the value of the old FE function at their node (defined
// inside the old extended domain), 0 outside it.
Eigen::VectorXd transfer_coefficients(const FeSpace& from, const Eigen::VectorXd& u,
                                      const FeSpace& to);

// Fully discrete time loop: per-step active-mesh rebuild, DOF transfer and
// SPD solve of (alpha M + A + gamma_s S) u = rhs with diagonally
// preconditioned CG.
class Stepper {
  public:
    Stepper(const BackgroundMesh& mesh, const ManufacturedProblem& problem,
            const StepperConfig& config, double delta);

    // u^0 = Lagrange interpolant of the exact solution at t0.
    void initialize(double t0);
    // Prescribe an exact two-step history (BDF2 startup studies).
    void initialize_history(double t0, double dt);

    void advance(); // one step; throws ContainmentViolation / SolverDivergence

    int step_index() const { return n_; }
    double time() const { return t_; }
    const FeSpace& space() const { return *space_; }
    const FeSpace* previous_space() const { return space_prev_.get(); }
    const StepQuadrature& quadrature() const { return quad_; }
    const Eigen::VectorXd& solution() const { return u_; }
    const std::vector<LedgerRow>& ledger() const { return ledger_; }
    double gamma() const { return gamma_; }
    const BackgroundMesh& mesh() const { return mesh_; }
    const SpMat& mass() const { return mass_; }
    const SpMat& stiffness() const { return stiffness_; }
    const SpMat& ghost() const { return ghost_; }

  private:
    void rebuild(double t);
    void record_ledger(int iters);

    const BackgroundMesh& mesh_;
    ManufacturedProblem problem_;
    StepperConfig config_;
    double delta_;
    double gamma_ = 0;

    int n_ = 0;
    double t_ = 0;
    std::unique_ptr<ActiveMesh> active_, active_prev_, active_prev2_;
    std::unique_ptr<FeSpace> space_, space_prev_, space_prev2_;
    StepQuadrature quad_;
    SpMat mass_, stiffness_, ghost_;
    Eigen::VectorXd u_, u_prev_, u_prev2_;
    std::vector<LedgerRow> ledger_;
};

RunResult run(const ManufacturedProblem& problem, const StepperConfig& config,
              std::optional<double> critical_time = {});

void write_ledger_csv(const std::string& path, const std::vector<LedgerRow>& rows);

} // namespace topofem
