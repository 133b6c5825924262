#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "topofem/assembly.hpp"
#include "topofem/cutgeom.hpp"
#include "topofem/levelset.hpp"

namespace topofem {

// One row of an EOC study. err_linf_l2 = max_n ||u_h^n - u^n||_{L2(Omega^n)},
// err_l2_h1 = (dt sum_{n>=1} ||grad(u_h^n - u^n)||^2_{Omega^n})^{1/2}.
struct ConvergenceRecord {
    int L_x = 0, L_t = 0;
    double h = 0, dt = 0;
    double err_linf_l2 = 0;
    double err_l2_h1 = 0;
    std::optional<double> eoc_l2; // vs the previous (coarser) record
    std::optional<double> eoc_h1;
};

// eoc = log2(err_coarse / err_fine) for consecutive uniform refinements.
void attach_eoc(std::vector<ConvergenceRecord>& records);

// Accumulates per-step errors of a run against the analytic solution.
class ErrorAccumulator {
  public:
    void add_step(const FeSpace& space, const StepQuadrature& quad,
                  const Eigen::VectorXd& u_coeffs,
                  const std::function<double(const Vec2&)>& exact,
                  const std::function<Vec2(const Vec2&)>& exact_grad, bool count_h1);
    ConvergenceRecord finalize(int L_x, int L_t, double h, double dt) const;
    double linf_l2() const { return linf_l2_; }

  private:
    double linf_l2_ = 0;
    double sum_h1_sq_ = 0; // times dt on finalize
};

struct TransportCheck {
    double lhs = 0; // ||u||^2_{Omega(t0+dt)} - ||u||^2_{Omega(t0)}
    double rhs = 0; // int_t int_{Gamma(t)} V_Gamma u^2 ds dt
    double rel_err = 0;
};

// Reynolds/divergence identity check. `resolution` jointly sets the number of
// composite time slices and the interface subdivision depth (doubling it
// halves both the slice width and the reconstruction spacing).
TransportCheck transport_identity_check(const LevelSetField& field, const Rect& bulk,
                                        const std::function<double(const Vec2&)>& u,
                                        double t0, double dt, int resolution = 32);

// [ ||u||^2_{Omega(t0+dt)} - ||u||^2_{Omega(t0)} ]_+ normalized by
// dt * (||u||^2_O + ||grad u||^2_O) on a hold-all box O enclosing Omega(t)
// over the step. Bounded ratios across dt refinements witness the narrow-band
// estimate.
double narrow_band_monitor(const LevelSetField& field, const Rect& bulk,
                           const std::function<double(const Vec2&)>& u,
                           const std::function<Vec2(const Vec2&)>& grad_u, double t0,
                           double dt);

struct BlowupResult {
    std::vector<double> dts;
    std::vector<double> quotients;   // (meas Omega(t_c) - meas Omega(t_c - dt)) / dt
    std::vector<double> sup_velocity; // diagnostic: sup_{Gamma(t_c - dt)} V_Gamma
    double slope = 0;                // log-log LSQ fit of quotient vs dt
    double sup_velocity_slope = 0;
};

BlowupResult blowup_demo(const LevelSetField& field, const Rect& bulk, double t_c,
                         const std::vector<double>& dt_list, int mesh_levels = 4,
                         int depth = 6);

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRecord>& records,
                           const std::string& note = "");
std::string convergence_csv_text(const std::vector<ConvergenceRecord>& records,
                                 const std::string& note = "");

} // namespace topofem
