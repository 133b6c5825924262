#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "topofem/stepper.hpp"
#include "topofem/verify.hpp"

using namespace topofem;

namespace {

LevelSetField static_disk(double r) {
    LevelSetField f;
    f.value = [r](const Vec2& x, double) { return x.squaredNorm() - r * r; };
    f.spatial_gradient = [](const Vec2& x, double) { return Vec2(2 * x); };
    f.time_derivative = [](const Vec2&, double) { return 0.0; };
    f.spatial_hessian = [](const Vec2&, double) { return Mat2(2 * Mat2::Identity()); };
    f.mixed_derivative = [](const Vec2&, double) { return Vec2(0, 0); };
    return f;
}

} // namespace

TEST_CASE("EOC definition and scale invariance") {
    std::vector<ConvergenceRecord> records(3);
    records[0].err_linf_l2 = 0.4;
    records[0].err_l2_h1 = 1.0;
    records[1].err_linf_l2 = 0.1;
    records[1].err_l2_h1 = 0.5;
    records[2].err_linf_l2 = 0.025;
    records[2].err_l2_h1 = 0.25;
    attach_eoc(records);
    CHECK(!records[0].eoc_l2);
    CHECK(*records[1].eoc_l2 == doctest::Approx(2.0));
    CHECK(*records[1].eoc_h1 == doctest::Approx(1.0));
    CHECK(*records[2].eoc_l2 == doctest::Approx(2.0));

    // scaling all errors by a constant leaves the orders unchanged
    std::vector<ConvergenceRecord> scaled_records = records;
    for (auto& r : scaled_records) {
        r.err_linf_l2 *= 7.3;
        r.err_l2_h1 *= 7.3;
        r.eoc_l2.reset();
        r.eoc_h1.reset();
    }
    attach_eoc(scaled_records);
    CHECK(*scaled_records[1].eoc_l2 == doctest::Approx(*records[1].eoc_l2));
    CHECK(*scaled_records[2].eoc_h1 == doctest::Approx(*records[2].eoc_h1));
}

TEST_CASE("accumulator vanishes when u_h is the in-space exact solution") {
    const LevelSetField field = static_disk(1.0);
    const BackgroundMesh mesh = build_background({-1.5, 1.5, -1.5, 1.5}, 0.5, 2);
    const ActiveMesh am = classify_elements(mesh, field, 0.0, 0.1);
    const FeSpace space(mesh, am, 1);
    const StepQuadrature quad = build_step_quadrature(mesh, am, field, 0.0, 3, 2);
    auto exact = [](const Vec2& x) { return 2.0 * x.x() - x.y() + 0.5; };
    const Eigen::VectorXd u = space.interpolate(exact);
    ErrorAccumulator acc;
    acc.add_step(space, quad, u, exact, [](const Vec2&) { return Vec2(2, -1); }, true);
    const ConvergenceRecord rec = acc.finalize(2, 2, mesh.h, 0.025);
    CHECK(rec.err_linf_l2 < 1e-12);
    CHECK(rec.err_l2_h1 < 1e-12);
}

TEST_CASE("transport identity on the growing disk") {
    const Scenario s = scenario_by_name("growing_disk");
    auto one = [](const Vec2&) { return 1.0; };
    const TransportCheck check = transport_identity_check(s.field, s.bulk, one, 0.0, 0.1, 32);
    CHECK(check.lhs == doctest::Approx(M_PI * 0.1).epsilon(1e-4));
    CHECK(check.rel_err < 0.005);
}

TEST_CASE("transport identity with zero test function") {
    const Scenario s = scenario_by_name("growing_disk");
    auto zero = [](const Vec2&) { return 0.0; };
    const TransportCheck check = transport_identity_check(s.field, s.bulk, zero, 0.0, 0.1, 16);
    CHECK(check.lhs == 0.0);
    CHECK(check.rhs == 0.0);
    CHECK(check.rel_err == 0.0);
}

TEST_CASE("transport identity across the critical time") {
    const Scenario s = scenario_by_name("paper_splitting");
    auto one = [](const Vec2&) { return 1.0; };
    const TransportCheck check = transport_identity_check(s.field, s.bulk, one, 0.2, 0.1, 32);
    CHECK(check.lhs < 0); // the domain shrinks through the split
    CHECK(check.rel_err <= 1e-2);
}

TEST_CASE("transport error drops at the composite order under refinement") {
    const Scenario s = scenario_by_name("growing_disk");
    auto u = [](const Vec2& x) { return 1.0 + x.x() * x.x(); };
    const TransportCheck coarse = transport_identity_check(s.field, s.bulk, u, 0.0, 0.1, 16);
    const TransportCheck fine = transport_identity_check(s.field, s.bulk, u, 0.0, 0.1, 32);
    CHECK(fine.rel_err * 3.0 <= coarse.rel_err);
}

TEST_CASE("narrow band ratio vanishes for shrinking domains") {
    const Scenario s = scenario_by_name("shrinking_disk");
    auto u = [](const Vec2& x) { return 1.0 + x.x(); };
    auto gu = [](const Vec2&) { return Vec2(1, 0); };
    CHECK(narrow_band_monitor(s.field, s.bulk, u, gu, 0.1, 0.05) == 0.0);
}

TEST_CASE("narrow band ratio is homogeneous of degree zero") {
    const Scenario s = scenario_by_name("growing_disk");
    auto u = [](const Vec2& x) { return 1.0 + 0.5 * x.y(); };
    auto gu = [](const Vec2&) { return Vec2(0, 0.5); };
    auto u3 = [&](const Vec2& x) { return 3.0 * u(x); };
    auto gu3 = [&](const Vec2& x) { return Vec2(3.0 * gu(x)); };
    const double r1 = narrow_band_monitor(s.field, s.bulk, u, gu, 0.0, 0.05);
    const double r3 = narrow_band_monitor(s.field, s.bulk, u3, gu3, 0.0, 0.05);
    CHECK(r1 > 0);
    // exact in exact arithmetic; the numerator is a difference of two large
    // integrals, so roundoff limits the match near 1e-11
    CHECK(r3 == doctest::Approx(r1).epsilon(1e-9));
}

TEST_CASE("narrow band ratio grows when merging is approached") {
    const Scenario s = scenario_by_name("paper_merging");
    auto one = [](const Vec2&) { return 1.0; };
    auto zero = [](const Vec2&) { return Vec2(0, 0); };
    std::vector<double> ratios;
    for (double dt : {0.04, 0.01, 0.0025})
        ratios.push_back(narrow_band_monitor(s.field, s.bulk, one, zero, 0.25 - dt, dt));
    CHECK(ratios[0] > 0);
    CHECK(ratios[1] > ratios[0]);
    CHECK(ratios[2] > ratios[1]);
}

TEST_CASE("blow-up demo on a static domain returns zero differences") {
    const LevelSetField field = static_disk(1.0);
    const BlowupResult result =
        blowup_demo(field, {-1.5, 1.5, -1.5, 1.5}, 0.5, {1e-2, 1e-3, 1e-4}, 3, 4);
    for (double q : result.quotients) CHECK(std::abs(q) < 1e-9);
    CHECK(result.slope == 0.0); // no positive data to fit
}

TEST_CASE("blow-up demo on the merging scenario") {
    const Scenario s = scenario_by_name("paper_merging");
    const BlowupResult result = blowup_demo(s.field, s.bulk, *s.critical_t,
                                            {1e-2, 1e-3, 1e-4}, 3, 5);
    REQUIRE(result.quotients.size() == 3);
    // the measure-change quotient blows up as dt -> 0 ...
    CHECK(result.quotients[0] > 0);
    CHECK(result.quotients[1] > result.quotients[0]);
    CHECK(result.quotients[2] > result.quotients[1]);
    // ... and the pointwise interface velocity diverges at the 1/2 rate
    CHECK(result.sup_velocity_slope == doctest::Approx(-0.5).epsilon(0.3));
}

TEST_CASE("post-split side mirrors the blow-up with no positive-part growth") {
    // same quantity approached from above: Omega(t_c) vs Omega(t_c + dt)
    const Scenario s = scenario_by_name("paper_splitting");
    const LevelSetField reversed = time_reversed(s.field, *s.critical_t);
    const BlowupResult result = blowup_demo(reversed, s.bulk, *s.critical_t,
                                            {1e-2, 1e-3, 1e-4}, 3, 5);
    CHECK(result.quotients[0] > 0);
    CHECK(result.quotients[2] > result.quotients[0]);
    // while the splitting scenario itself keeps [V_Gamma]_+ = 0, so the
    // monitor stays at zero across the critical time
    auto one = [](const Vec2&) { return 1.0; };
    auto zero = [](const Vec2&) { return Vec2(0, 0); };
    CHECK(narrow_band_monitor(s.field, s.bulk, one, zero, 0.2, 0.1) == 0.0);
}

TEST_CASE("convergence csv format") {
    std::vector<ConvergenceRecord> records(2);
    records[0] = {1, 2, 0.25, 0.025, 1e-2, 2e-2, {}, {}};
    records[1] = {2, 4, 0.125, 0.00625, 2.5e-3, 1e-2, {}, {}};
    attach_eoc(records);
    const std::string text = convergence_csv_text(records, "no theoretical guarantee");
    CHECK(text.find("# no theoretical guarantee\n") == 0);
    CHECK(text.find("Lx,Lt,h,dt,err_linf_l2,err_l2_h1,eoc_l2,eoc_h1") != std::string::npos);
    CHECK(text.find("2.000000") != std::string::npos); // eoc_l2 of the fine row
    // deterministic: same input twice gives identical bytes
    CHECK(text == convergence_csv_text(records, "no theoretical guarantee"));
}
