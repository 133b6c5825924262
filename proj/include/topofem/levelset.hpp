#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topofem/geometry.hpp"

namespace topofem {

enum class Smoothness { C2, LipschitzOnly };

// Analytic space-time scalar field phi(x,t). The evolving domain is its
// subzero set, Omega(t) = {phi(.,t) < 0}, with interface Gamma(t) = {phi = 0}.
// All callbacks are analytic; mixed_derivative (d/dt of the spatial gradient)
// is kept for the finite-difference consistency checks only.
struct LevelSetField {
    std::function<double(const Vec2&, double)> value;
    std::function<Vec2(const Vec2&, double)> spatial_gradient;
    std::function<double(const Vec2&, double)> time_derivative;
    std::function<Mat2(const Vec2&, double)> spatial_hessian;
    std::function<Vec2(const Vec2&, double)> mixed_derivative;
    Smoothness smoothness = Smoothness::C2;
    // Loci where the field is C2; vanishes on kink sets of piecewise fields.
    // Roots of the critical-point search are rejected outside this set.
    std::function<bool(const Vec2&, double)> smooth_at;

    bool is_smooth_at(const Vec2& x, double t) const {
        return !smooth_at || smooth_at(x, t);
    }
};

enum class Classification {
    VanishingIsland,
    CreationIsland,
    Splitting,
    Merging,
    HoleCreation,
    HoleVanishing,
    Degenerate,
    Regular,
};

std::string classification_name(Classification c);

struct CriticalPointReport {
    bool found = false; // false: no root in the search box (class Regular)
    Vec2 x_c = Vec2::Zero();
    double t_c = 0;
    double grad_norm_at_root = 0;
    double lambda1 = 0, lambda2 = 0; // lambda1 <= lambda2
    double dphi_dt = 0;
    bool degenerate = false;
    Classification classification = Classification::Regular;
};

struct EvolutionConstants {
    double v_max_plus = 0;          // sampled sup of [V_Gamma]_+
    long sample_count = 0;
    long excluded_near_singular = 0; // samples with |grad phi| < eps_grad or inside the exclusion ball
};

struct SpaceTimeBox {
    Rect space;
    double t_lo = 0, t_hi = 0;
    bool contains(const Vec2& x, double t) const {
        return space.contains(x) && t >= t_lo && t <= t_hi;
    }
};

inline constexpr double kEpsGrad = 1e-10;      // near-critical gradient cutoff
inline constexpr double kDegeneracyTol = 1e-8; // |det H| < tol * |H|_F^2  => degenerate

// V_Gamma = -d(phi)/dt / |grad phi|. Throws NearCriticalPoint if |grad phi| < eps_grad.
double normal_velocity(const LevelSetField& field, const Vec2& x, double t,
                       double eps_grad = kEpsGrad);

// Classification table for a nondegenerate critical point of a 2D field from
// the ordered spatial Hessian eigenvalues and the time derivative at the root.
Classification classify_critical(double lambda1, double lambda2, double dphi_dt,
                                 bool degenerate);

// Dimension-generic entry point; only d = 2 is implemented.
Classification classify_critical(std::span<const double> eigenvalues, double dphi_dt,
                                 bool degenerate);

// Newton search for a space-time root of (phi, d(phi)/dx1, d(phi)/dx2) = 0 inside
// `box`, seeded at (seed_x, seed_t) with an 8x8x8 grid fallback. Returns a
// Regular report when no root is found.
CriticalPointReport find_critical_point(const LevelSetField& field, const Vec2& seed_x,
                                        double seed_t, const SpaceTimeBox& box);

// All distinct roots found by the multi-start grid, in deterministic scan order.
std::vector<CriticalPointReport> find_all_critical_points(const LevelSetField& field,
                                                          const SpaceTimeBox& box);

// phi(x, 2*pivot - t); swaps the transition direction at a critical time pivot.
LevelSetField time_reversed(const LevelSetField& field, double pivot);

// c * phi, c > 0. Classification is invariant under this map.
LevelSetField scaled(const LevelSetField& field, double c);

struct Scenario {
    std::string name;
    LevelSetField field;
    Rect bulk;                // suggested bulk rectangle
    double t_begin = 0, t_end = 0;
    SpaceTimeBox classify_box;
    std::optional<Vec2> critical_x;
    std::optional<double> critical_t;
    std::string note;
};

// Catalog: paper_splitting, paper_merging, degenerate_pinchoff, two_balls,
// nonsmooth_merge (p = 4), growing_disk, shrinking_disk.
std::vector<Scenario> builtin_scenarios();
Scenario scenario_by_name(const std::string& name);
Scenario make_nonsmooth_merge(double p);

struct ScenarioClassification {
    bool lipschitz_flagged = false; // field only Lipschitz: not classifiable
    std::vector<CriticalPointReport> reports;
};
ScenarioClassification classify_scenario(const Scenario& scenario);

// One-line JSON record {name, x_c, t_c, lambda1, lambda2, dphi_dt, class}.
std::string report_json_line(const std::string& name, const CriticalPointReport& report);
std::string lipschitz_json_line(const std::string& name);

// Samples V_Gamma at interface quadrature points of a reference mesh over a
// uniform time grid and returns the max of the positive part. Points with
// |grad phi| < eps_grad (or inside the optional space-time exclusion ball)
// are skipped and counted.
EvolutionConstants estimate_v_max_plus(const LevelSetField& field, const Rect& bulk,
                                       double t0, double t1, int slices = 200,
                                       int mesh_levels = 2, int quad_depth = 3,
                                       std::optional<Vec2> exclude_x = {},
                                       std::optional<double> exclude_t = {},
                                       double exclusion_radius = 0.0,
                                       double eps_grad = kEpsGrad);

} // namespace topofem
