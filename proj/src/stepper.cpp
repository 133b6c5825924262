#include "topofem/stepper.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "topofem/errors.hpp"
#include "topofem/vtk_io.hpp"

namespace topofem {

ManufacturedProblem paper_solution_problem(const LevelSetField& field) {
    ManufacturedProblem p;
    p.field = field;
    p.u = [field](const Vec2& x, double t) {
        const double phi = field.value(x, t);
        return phi * phi + x.x() + x.y() + 1.0;
    };
    p.grad_u = [field](const Vec2& x, double t) {
        return Vec2(2.0 * field.value(x, t) * field.spatial_gradient(x, t) + Vec2(1, 1));
    };
    p.f = [field](const Vec2& x, double t) {
        const double phi = field.value(x, t);
        const Vec2 g = field.spatial_gradient(x, t);
        const double lap = field.spatial_hessian(x, t).trace();
        const double du_dt = 2.0 * phi * field.time_derivative(x, t);
        const double lap_u = 2.0 * g.squaredNorm() + 2.0 * phi * lap;
        return du_dt - lap_u;
    };
    p.g = [field, grad_u = p.grad_u](const Vec2& x, double t) {
        const Vec2 g = field.spatial_gradient(x, t);
        const double gn = g.norm();
        if (gn < kEpsGrad) return 0.0;
        return grad_u(x, t).dot(g / gn);
    };
    return p;
}

ManufacturedProblem stationary_linear_problem(const LevelSetField& field) {
    ManufacturedProblem p;
    p.field = field;
    p.u = [](const Vec2& x, double) { return x.x() + x.y() + 1.0; };
    p.grad_u = [](const Vec2&, double) { return Vec2(1, 1); };
    p.f = [](const Vec2&, double) { return 0.0; };
    p.g = [field](const Vec2& x, double t) {
        const Vec2 g = field.spatial_gradient(x, t);
        const double gn = g.norm();
        if (gn < kEpsGrad) return 0.0;
        return Vec2(1, 1).dot(g / gn);
    };
    return p;
}

ManufacturedProblem zero_data_problem(const LevelSetField& field,
                                      const std::function<double(const Vec2&)>& initial) {
    ManufacturedProblem p;
    p.field = field;
    p.u = [initial](const Vec2& x, double) { return initial(x); };
    p.grad_u = [](const Vec2&, double) { return Vec2(0, 0); };
    p.f = [](const Vec2&, double) { return 0.0; };
    p.g = [](const Vec2&, double) { return 0.0; };
    return p;
}

void StepperConfig::validate() const {
    if (fe_order != 1 && fe_order != 2) throw ConfigError("fe_order must be 1 or 2");
    if (method != Method::BDF1 && method != Method::BDF2) throw ConfigError("unknown method");
    if (levels_x < 0 || levels_t < 0) throw ConfigError("levels must be nonnegative");
    if (!bulk.nondegenerate()) throw ConfigError("degenerate bulk rectangle");
    if (h0 <= 0 || dt0 <= 0 || T < 0) throw ConfigError("h0, dt0 must be positive, T >= 0");
    if (c_gamma <= 0) throw ConfigError("c_gamma must be positive");
    if (solver_tol <= 0) throw ConfigError("solver_tol must be positive");
    if (delta_safety < 1) throw ConfigError("delta_safety must be >= 1");
}

Eigen::VectorXd transfer_coefficients(const FeSpace& from, const Eigen::VectorXd& u,
                                      const FeSpace& to) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(to.dof_count);
    const BackgroundMesh& mesh = *to.mesh;
    for (size_t v = 0; v < to.vertex_dof.size(); ++v) {
        const int d = to.vertex_dof[v];
        if (d >= 0 && from.vertex_dof[v] >= 0) out[d] = u[from.vertex_dof[v]];
    }
    if (to.order == 2) {
        for (size_t f = 0; f < to.edge_dof.size(); ++f) {
            const int d = to.edge_dof[f];
            if (d >= 0 && from.edge_dof[f] >= 0) out[d] = u[from.edge_dof[f]];
        }
    }
    // newly activated DOFs: evaluate the old FE function at the node
    // (nodes outside the old extended domain stay zero; they carry no mass)
    for (size_t v = 0; v < to.vertex_dof.size(); ++v) {
        const int d = to.vertex_dof[v];
        if (d < 0 || from.vertex_dof[v] >= 0) continue;
        const int e = mesh.locate(mesh.vertices[v], &from.active->is_active);
        if (e >= 0) out[d] = from.eval(e, u, mesh.vertices[v]);
    }
    if (to.order == 2) {
        for (size_t f = 0; f < to.edge_dof.size(); ++f) {
            const int d = to.edge_dof[f];
            if (d < 0 || from.edge_dof[f] >= 0) continue;
            const Vec2 node = to.dof_node[d];
            const int e = mesh.locate(node, &from.active->is_active);
            if (e >= 0) out[d] = from.eval(e, u, node);
        }
    }
    return out;
}

Stepper::Stepper(const BackgroundMesh& mesh, const ManufacturedProblem& problem,
                 const StepperConfig& config, double delta)
    : mesh_(mesh), problem_(problem), config_(config), delta_(delta) {
    config_.validate();
    gamma_ = gamma_s(config_.c_gamma, config_.dt(), mesh_.h);
}

void Stepper::rebuild(double t) {
    active_prev2_ = std::move(active_prev_);
    space_prev2_ = std::move(space_prev_);
    active_prev_ = std::move(active_);
    space_prev_ = std::move(space_);

    active_ = std::make_unique<ActiveMesh>(classify_elements(mesh_, problem_.field, t, delta_));
    active_->time_index = n_;
    space_ = std::make_unique<FeSpace>(mesh_, *active_, config_.fe_order);
    quad_ = build_step_quadrature(mesh_, *active_, problem_.field, t, config_.depth(),
                                  config_.rule_order());
    mass_ = assemble_mass(*space_, quad_);
    stiffness_ = assemble_stiffness(*space_, quad_);
    ghost_ = assemble_ghost_penalty(*space_, mesh_.h);
}

void Stepper::initialize(double t0) {
    n_ = 0;
    t_ = t0;
    u_prev_.resize(0);
    u_prev2_.resize(0);
    ledger_.clear();
    rebuild(t0);
    u_ = space_->interpolate([&](const Vec2& x) { return problem_.u(x, t0); });
    record_ledger(0);
}

void Stepper::initialize_history(double t0, double dt) {
    // prescribe the exact two-step history (u at t0-dt and t0); the next
    // advance() is then a genuine BDF2 step
    n_ = 0;
    t_ = t0 - dt;
    u_prev_.resize(0);
    u_prev2_.resize(0);
    ledger_.clear();
    rebuild(t0 - dt);
    u_ = space_->interpolate([&](const Vec2& x) { return problem_.u(x, t0 - dt); });
    n_ = 1;
    rebuild(t0);
    t_ = t0;
    u_prev_ = u_; // on space_prev_ after the rebuild
    u_ = space_->interpolate([&](const Vec2& x) { return problem_.u(x, t0); });
    record_ledger(0);
}

void Stepper::record_ledger(int iters) {
    LedgerRow row;
    row.n = n_;
    row.t = t_;
    row.l2_sq = u_.dot(mass_ * u_);
    row.h1_sq = u_.dot(stiffness_ * u_);
    row.ghost_sq = u_.dot(ghost_ * u_);
    row.solver_iters = iters;
    ledger_.push_back(row);
}

void Stepper::advance() {
    const double dt = config_.dt();
    const double t_new = t_ + dt;

    // u_old lives on the current space (space_prev_ after the rebuild),
    // u_old2 on the one before (space_prev2_ after the rebuild)
    const Eigen::VectorXd u_old = u_;
    const Eigen::VectorXd u_old2 = u_prev_;
    const bool bdf2_step = (config_.method == Method::BDF2) && u_old2.size() > 0;

    ++n_;
    rebuild(t_new);
    t_ = t_new;

    // containment: every element meeting Omega^n must lie in the previous
    // extended active set (and in the one before for BDF2)
    auto check_containment = [&](const ActiveMesh* old, const char* which) {
        if (!old) return;
        for (const auto* set : {&active_->interior_elements, &active_->cut_elements})
            for (int e : *set)
                if (!old->is_active[e])
                    throw ContainmentViolation(std::string("containment failed (") + which +
                                               ") at step " + std::to_string(n_) +
                                               ": increase delta");
    };
    check_containment(active_prev_.get(), "n-1");
    if (bdf2_step) check_containment(active_prev2_.get(), "n-2");

    const Eigen::VectorXd p_old = transfer_coefficients(*space_prev_, u_old, *space_);
    Eigen::VectorXd p_old2;
    if (bdf2_step) p_old2 = transfer_coefficients(*space_prev2_, u_old2, *space_);

    const double alpha = bdf2_step ? 1.5 / dt : 1.0 / dt;
    SpMat system = alpha * mass_ + stiffness_ + gamma_ * ghost_;

    Eigen::VectorXd rhs = assemble_rhs(
        *space_, quad_, [&](const Vec2& x) { return problem_.f(x, t_new); },
        [&](const Vec2& x) { return problem_.g(x, t_new); });
    if (bdf2_step)
        rhs += mass_ * ((2.0 / dt) * p_old - (0.5 / dt) * p_old2);
    else
        rhs += mass_ * ((1.0 / dt) * p_old);

    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(config_.solver_tol);
    cg.setMaxIterations(20 * space_->dof_count);
    cg.compute(system);
    const Eigen::VectorXd u_new = cg.solveWithGuess(rhs, p_old);
    if (cg.info() != Eigen::Success)
        throw SolverDivergence("CG did not converge at step " + std::to_string(n_) +
                               " (residual " + std::to_string(cg.error()) + ")");

    u_prev2_ = u_old2;
    u_prev_ = u_old;
    u_ = u_new;
    record_ledger(static_cast<int>(cg.iterations()));
}

RunResult run(const ManufacturedProblem& problem, const StepperConfig& config,
              std::optional<double> critical_time) {
    config.validate();
    const BackgroundMesh mesh = build_background(config.bulk, config.h0, config.levels_x);
    const double dt = config.dt();

    const EvolutionConstants constants = estimate_v_max_plus(
        problem.field, config.bulk, 0.0, config.T, config.vmax_slices, 2, 3);
    double delta = choose_delta(constants, dt, config.delta_safety);
    if (config.method == Method::BDF2) delta *= 2.0; // two-step history containment

    Stepper stepper(mesh, problem, config, delta);

    ErrorAccumulator errors;
    auto accumulate = [&](bool with_h1) {
        const double t = stepper.time();
        errors.add_step(
            stepper.space(), stepper.quadrature(), stepper.solution(),
            [&](const Vec2& x) { return problem.u(x, t); },
            [&](const Vec2& x) { return problem.grad_u(x, t); }, with_h1);
    };

    RunResult result;
    const int n_steps = static_cast<int>(std::llround(config.T / dt));
    int first_step = 1;
    if (config.method == Method::BDF2 && n_steps >= 1) {
        // seed the two-step history from the exact solution, so the startup
        // does not limit the second-order accuracy
        stepper.initialize_history(dt, dt);
        accumulate(true); // u^1 record (interpolant)
        first_step = 2;
    } else {
        stepper.initialize(0.0);
        accumulate(false); // initial record: L-infinity part only
    }
    for (int n = first_step; n <= n_steps; ++n) {
        stepper.advance();
        accumulate(true);
        if (critical_time && stepper.time() - dt < *critical_time &&
            *critical_time <= stepper.time())
            result.singular_step = n;
        if (config.snapshot_every > 0 &&
            (n % config.snapshot_every == 0 || n == n_steps)) {
            char name[512];
            std::snprintf(name, sizeof(name), "%s_%05d.vtk", config.snapshot_prefix.c_str(), n);
            std::vector<double> point_u(mesh.vertices.size(), 0.0);
            for (size_t v = 0; v < mesh.vertices.size(); ++v) {
                const int d = stepper.space().vertex_dof[v];
                if (d >= 0) point_u[v] = stepper.solution()[d];
            }
            write_mesh_vtk(name, mesh, stepper.quadrature().active->tags(mesh), &point_u);
            std::snprintf(name, sizeof(name), "%s_%05d_interface.vtk",
                          config.snapshot_prefix.c_str(), n);
            write_polyline_vtk(name,
                               extract_interface_segments(mesh, *stepper.quadrature().active,
                                                          problem.field, stepper.time(),
                                                          config.depth()));
        }
    }

    result.record = errors.finalize(config.levels_x, config.levels_t, mesh.h, dt);
    result.ledger = stepper.ledger();
    result.gamma_s_value = stepper.gamma();
    return result;
}

void write_ledger_csv(const std::string& path, const std::vector<LedgerRow>& rows) {
    std::ofstream out(path);
    out << "n,t,l2_omega,h1_omega,ghost_energy,solver_iters\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%d,%.12e,%.12e,%.12e,%.12e,%d\n", r.n, r.t,
                      std::sqrt(std::max(r.l2_sq, 0.0)), std::sqrt(std::max(r.h1_sq, 0.0)),
                      std::sqrt(std::max(r.ghost_sq, 0.0)), r.solver_iters);
        out << line;
    }
}

} // namespace topofem
