#pragma once

#include <string>

#include "topofem/stepper.hpp"

namespace topofem {

// Flat key=value run configuration; defaults reproduce the reference setup
// (bulk (-2,2)x(-1.5,1.5), h0 = 0.5, dt = 0.1 * 2^-L_t, T = 0.5).
struct RunConfig {
    std::string scenario = "paper_splitting";
    std::string method = "bdf1"; // bdf1 | bdf2
    int fe_order = 1;
    int L_x = 1;
    int L_t = -1; // -1: method coupling (bdf1: 2*L_x, bdf2: L_x)
    double c_gamma = 1.0;
    int quad_depth = 0; // 0 = auto
    double solver_tol = 1e-11;
    double delta_safety = 2.0;
    double bulk_x_lo = -2.0, bulk_x_hi = 2.0, bulk_y_lo = -1.5, bulk_y_hi = 1.5;
    double h0 = 0.5;
    double T = 0.5;
    double dt0 = 0.1;
    int vmax_slices = 200;
    int snapshot_every = 0;
    std::string out_csv = "convergence.csv";
    std::string out_ledger = "";
    std::string snapshot_prefix = "snapshot";

    int effective_L_t(int L_x_value) const;
    StepperConfig stepper_config() const;
    std::string to_text() const;
    static RunConfig from_text(const std::string& text); // throws ConfigError
    void validate() const;                               // throws ConfigError
};

} // namespace topofem
