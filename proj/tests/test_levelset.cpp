#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "topofem/cutgeom.hpp"
#include "topofem/errors.hpp"
#include "topofem/levelset.hpp"

using namespace topofem;

namespace {

LevelSetField line_field() {
    // x1 - t: unit-speed translating line, no critical points
    LevelSetField f;
    f.value = [](const Vec2& x, double t) { return x.x() - t; };
    f.spatial_gradient = [](const Vec2&, double) { return Vec2(1, 0); };
    f.time_derivative = [](const Vec2&, double) { return -1.0; };
    f.spatial_hessian = [](const Vec2&, double) { return Mat2(Mat2::Zero()); };
    f.mixed_derivative = [](const Vec2&, double) { return Vec2(0, 0); };
    return f;
}

LevelSetField island_field() {
    // x1^2 + x2^2 + (t - 0.25): island vanishing at (0,0,0.25)
    LevelSetField f;
    f.value = [](const Vec2& x, double t) { return x.squaredNorm() + (t - 0.25); };
    f.spatial_gradient = [](const Vec2& x, double) { return Vec2(2 * x); };
    f.time_derivative = [](const Vec2&, double) { return 1.0; };
    f.spatial_hessian = [](const Vec2&, double) { return Mat2(2 * Mat2::Identity()); };
    f.mixed_derivative = [](const Vec2&, double) { return Vec2(0, 0); };
    return f;
}

LevelSetField hole_field() {
    // -(x1^2 + 2 x2^2) + (t - 0.25): hole created at (0,0,0.25)
    LevelSetField f;
    f.value = [](const Vec2& x, double t) {
        return -(x.x() * x.x() + 2 * x.y() * x.y()) + (t - 0.25);
    };
    f.spatial_gradient = [](const Vec2& x, double) { return Vec2(-2 * x.x(), -4 * x.y()); };
    f.time_derivative = [](const Vec2&, double) { return 1.0; };
    f.spatial_hessian = [](const Vec2&, double) {
        Mat2 h;
        h << -2, 0, 0, -4;
        return h;
    };
    f.mixed_derivative = [](const Vec2&, double) { return Vec2(0, 0); };
    return f;
}

const SpaceTimeBox kBox{{-1.0, 1.0, -1.0, 1.0}, 0.0, 0.5};

void check_derivatives_at(const LevelSetField& f, const Vec2& x, double t) {
    CAPTURE(x.x());
    CAPTURE(x.y());
    CAPTURE(t);
    const Vec2 g = f.spatial_gradient(x, t);
    const Vec2 g_fd = oracles::fd_gradient(f, x, t);
    CHECK((g - g_fd).norm() <= 1e-6 * std::max(1.0, g.norm()));

    const double dt_an = f.time_derivative(x, t);
    CHECK(oracles::rel_err(oracles::fd_time_derivative(f, x, t), dt_an) <= 1e-6);

    const Mat2 h = f.spatial_hessian(x, t);
    CHECK((h - h.transpose()).norm() <= 1e-14 * std::max(1.0, h.norm()));
    const Mat2 h_fd = oracles::fd_hessian(f, x, t);
    CHECK((h - h_fd).norm() <= 1e-6 * std::max(1.0, h.norm()));

    const Vec2 m = f.mixed_derivative(x, t);
    const Vec2 m_fd = oracles::fd_mixed(f, x, t);
    CHECK((m - m_fd).norm() <= 1e-6 * std::max(1.0, m.norm()));
}

} // namespace

TEST_CASE("analytic derivatives agree with finite differences") {
    // sample points keep a margin from each field's non-smooth loci
    const std::vector<std::pair<Vec2, double>> pts = {
        {{0.37, 0.21}, 0.1}, {{-0.83, 0.34}, 0.3}, {{1.21, -0.68}, 0.45}, {{0.45, -0.52}, 0.2}};
    for (const auto& s : builtin_scenarios()) {
        CAPTURE(s.name);
        for (auto [x, tfrac] : pts) {
            double t = s.t_begin + tfrac * (s.t_end - s.t_begin);
            if (s.name == "nonsmooth_merge") t = -0.12; // clear of the branch switch
            if (!s.field.is_smooth_at(x, t)) continue;
            check_derivatives_at(s.field, x, t);
        }
    }
}

TEST_CASE("normal velocity values") {
    CHECK(normal_velocity(line_field(), Vec2(0, 0), 0.0) == doctest::Approx(1.0));

    const Scenario growing = scenario_by_name("growing_disk");
    CHECK(normal_velocity(growing.field, Vec2(1, 0), 0.0) == doctest::Approx(0.5));

    // splitting field at a point of its interface: inward motion, value
    // cross-checked against front tracking along the normal
    const Scenario splitting = scenario_by_name("paper_splitting");
    const Vec2 x(1.0, 0.0);
    const double t = 0.95; // phi(x, t) = 0 there
    CHECK(splitting.field.value(x, t) == doctest::Approx(0.0));
    const double v = normal_velocity(splitting.field, x, t);
    CHECK(v < 0);
    CHECK(v == doctest::Approx(-1.25));
    CHECK(v == doctest::Approx(oracles::fd_front_velocity(splitting.field, x, t)).epsilon(1e-4));
}

TEST_CASE("normal velocity rejects near-critical points") {
    const Scenario s = scenario_by_name("paper_splitting");
    CHECK_THROWS_AS(normal_velocity(s.field, Vec2(0, 0), 0.25), NearCriticalPoint);
}

TEST_CASE("critical point of the splitting scenario") {
    const Scenario s = scenario_by_name("paper_splitting");
    const CriticalPointReport r = find_critical_point(s.field, Vec2(0.1, 0.1), 0.2, kBox);
    REQUIRE(r.found);
    CHECK(r.x_c.norm() < 1e-9);
    CHECK(r.t_c == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(r.grad_norm_at_root < 1e-9);
    CHECK(r.lambda1 == doctest::Approx(-2.0));
    CHECK(r.lambda2 == doctest::Approx(2.0));
    CHECK(r.dphi_dt == doctest::Approx(1.0));
    CHECK(!r.degenerate);
    CHECK(r.classification == Classification::Splitting);
}

TEST_CASE("vanishing island and hole classifications") {
    const CriticalPointReport island =
        find_critical_point(island_field(), Vec2(0.1, 0.1), 0.2, kBox);
    REQUIRE(island.found);
    CHECK(island.t_c == doctest::Approx(0.25));
    CHECK(island.lambda1 == doctest::Approx(2.0));
    CHECK(island.lambda2 == doctest::Approx(2.0));
    CHECK(island.dphi_dt == doctest::Approx(1.0));
    CHECK(island.classification == Classification::VanishingIsland);

    const CriticalPointReport hole = find_critical_point(hole_field(), Vec2(0.1, 0.1), 0.2, kBox);
    REQUIRE(hole.found);
    CHECK(hole.lambda1 == doctest::Approx(-4.0));
    CHECK(hole.lambda2 == doctest::Approx(-2.0));
    CHECK(hole.classification == Classification::HoleCreation);
}

TEST_CASE("no critical point gives Regular") {
    const CriticalPointReport r = find_critical_point(line_field(), Vec2(0.5, 0.5), 0.2, kBox);
    CHECK(!r.found);
    CHECK(r.classification == Classification::Regular);
}

TEST_CASE("degenerate pinch-off is flagged") {
    const Scenario s = scenario_by_name("degenerate_pinchoff");
    const CriticalPointReport r =
        find_critical_point(s.field, Vec2(0.1, 0.1), 0.1, s.classify_box);
    REQUIRE(r.found);
    CHECK(r.degenerate);
    CHECK(r.classification == Classification::Degenerate);
}

TEST_CASE("classification is invariant under positive scaling") {
    const std::vector<LevelSetField> fields = {
        scenario_by_name("paper_splitting").field, scenario_by_name("paper_merging").field,
        island_field(), hole_field()};
    for (const auto& field : fields) {
        const CriticalPointReport base = find_critical_point(field, Vec2(0.1, 0.1), 0.2, kBox);
        REQUIRE(base.found);
        for (double c : {0.5, 2.0, 10.0}) {
            const CriticalPointReport r =
                find_critical_point(scaled(field, c), Vec2(0.1, 0.1), 0.2, kBox);
            REQUIRE(r.found);
            CHECK(r.classification == base.classification);
            CHECK(r.lambda1 == doctest::Approx(c * base.lambda1));
            CHECK(r.dphi_dt == doctest::Approx(c * base.dphi_dt));
        }
    }
}

TEST_CASE("time reversal swaps the transition pairs") {
    auto classify_reversed = [](const LevelSetField& f, double pivot) {
        return find_critical_point(time_reversed(f, pivot), Vec2(0.1, 0.1), 0.2, kBox);
    };
    const Scenario s = scenario_by_name("paper_splitting");
    const CriticalPointReport merged = classify_reversed(s.field, 0.25);
    REQUIRE(merged.found);
    CHECK(merged.classification == Classification::Merging);
    CHECK(merged.lambda1 == doctest::Approx(-2.0)); // Hessian unchanged
    CHECK(merged.dphi_dt == doctest::Approx(-1.0)); // sign flipped

    const CriticalPointReport created = classify_reversed(island_field(), 0.25);
    REQUIRE(created.found);
    CHECK(created.classification == Classification::CreationIsland);

    const CriticalPointReport vanished = classify_reversed(hole_field(), 0.25);
    REQUIRE(vanished.found);
    CHECK(vanished.classification == Classification::HoleVanishing);
}

TEST_CASE("3D classification paths are unsupported") {
    const double ev[3] = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(classify_critical(std::span<const double>(ev, 3), 1.0, false),
                    UnsupportedDimension);
    const double ev2[2] = {-1.0, 2.0};
    CHECK(classify_critical(std::span<const double>(ev2, 2), 1.0, false) ==
          Classification::Splitting);
}

TEST_CASE("scenario catalog content") {
    const auto scenarios = builtin_scenarios();
    CHECK(scenarios.size() == 7);
    std::set<std::string> names;
    for (const auto& s : scenarios) names.insert(s.name);
    CHECK(names.count("paper_splitting"));
    CHECK(names.count("paper_merging"));
    CHECK(names.count("degenerate_pinchoff"));
    CHECK(names.count("two_balls"));
    CHECK(names.count("nonsmooth_merge"));
    CHECK(names.count("growing_disk"));
    CHECK(names.count("shrinking_disk"));

    CHECK(scenario_by_name("two_balls").field.smoothness == Smoothness::LipschitzOnly);
    CHECK_THROWS_AS(scenario_by_name("bogus"), ConfigError);
}

TEST_CASE("catalog classifications") {
    auto classify = [](const char* name) { return classify_scenario(scenario_by_name(name)); };
    CHECK(classify("paper_splitting").reports[0].classification == Classification::Splitting);
    CHECK(classify("paper_merging").reports[0].classification == Classification::Merging);
    CHECK(classify("shrinking_disk").reports[0].classification ==
          Classification::VanishingIsland);
    CHECK(classify("degenerate_pinchoff").reports[0].classification ==
          Classification::Degenerate);
    CHECK(classify("growing_disk").reports[0].classification == Classification::Regular);
    // the touch point of the piecewise merge is not a C2 critical point
    CHECK(classify("nonsmooth_merge").reports[0].classification == Classification::Regular);
    CHECK(classify("two_balls").lipschitz_flagged);
}

TEST_CASE("sampled velocity bound") {
    const Scenario shrink = scenario_by_name("shrinking_disk");
    const EvolutionConstants c_shrink =
        estimate_v_max_plus(shrink.field, shrink.bulk, 0.0, 0.9, 60, 2, 3);
    CHECK(c_shrink.v_max_plus == doctest::Approx(0.0));
    CHECK(c_shrink.sample_count > 0);

    const Scenario grow = scenario_by_name("growing_disk");
    const EvolutionConstants c_grow =
        estimate_v_max_plus(grow.field, grow.bulk, 0.0, 1.0, 60, 2, 3);
    CHECK(c_grow.v_max_plus == doctest::Approx(0.5).epsilon(0.02));

    const Scenario split = scenario_by_name("paper_splitting");
    const EvolutionConstants c_split =
        estimate_v_max_plus(split.field, split.bulk, 0.0, 0.5, 60, 2, 3);
    CHECK(std::isfinite(c_split.v_max_plus));
    CHECK(c_split.v_max_plus == doctest::Approx(0.0)); // boundary moves inward everywhere
    CHECK(c_split.excluded_near_singular < c_split.sample_count / 100 + 5);
}

TEST_CASE("velocity bound degrades for the piecewise merge below p = 4") {
    const Scenario p4 = make_nonsmooth_merge(4.0);
    const Scenario p2 = make_nonsmooth_merge(2.0);
    const EvolutionConstants c4 = estimate_v_max_plus(p4.field, p4.bulk, -0.2, 0.2, 80, 2, 4);
    const EvolutionConstants c2 = estimate_v_max_plus(p2.field, p2.bulk, -0.2, 0.2, 80, 2, 4);
    CHECK(std::isfinite(c4.v_max_plus));
    CHECK(c2.v_max_plus > c4.v_max_plus); // sampled constants only, no conclusion drawn
}

TEST_CASE("exclusion ball around a critical point is honored") {
    const Scenario merge = scenario_by_name("paper_merging");
    const EvolutionConstants with_ball = estimate_v_max_plus(
        merge.field, merge.bulk, 0.0, 0.5, 60, 2, 3, Vec2(0, 0), 0.25, 0.15);
    const EvolutionConstants without =
        estimate_v_max_plus(merge.field, merge.bulk, 0.0, 0.5, 60, 2, 3);
    CHECK(with_ball.excluded_near_singular > 0);
    CHECK(with_ball.v_max_plus <= without.v_max_plus);
}

TEST_CASE("sign condition near the splitting point") {
    // V_Gamma < 0 at all interface samples within the space-time ball of
    // radius 0.1 around the critical point
    const Scenario s = scenario_by_name("paper_splitting");
    const BackgroundMesh mesh = build_background(s.bulk, 0.5, 3);
    int checked = 0;
    for (int i = 0; i <= 40; ++i) {
        const double t = 0.15 + 0.2 * i / 40.0;
        const ActiveMesh am = classify_elements(mesh, s.field, t, 0.0);
        const StepQuadrature q = build_step_quadrature(mesh, am, s.field, t, 3, 2);
        for (const auto& cq : q.cut_rules) {
            for (const Vec2& x : cq.surface_points) {
                const double dist = std::sqrt(x.squaredNorm() + (t - 0.25) * (t - 0.25));
                if (dist >= 0.1) continue;
                const double gn = s.field.spatial_gradient(x, t).norm();
                if (gn < kEpsGrad) continue;
                CHECK(normal_velocity(s.field, x, t) < 0);
                ++checked;
            }
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("json report lines") {
    const Scenario s = scenario_by_name("paper_splitting");
    const CriticalPointReport r = find_critical_point(s.field, Vec2(0.1, 0.1), 0.2, kBox);
    const std::string line = report_json_line(s.name, r);
    CHECK(line.find("\"class\":\"Splitting\"") != std::string::npos);
    CHECK(line.find("\"t_c\":0.25") != std::string::npos);
    CHECK(line.find("\"name\":\"paper_splitting\"") != std::string::npos);
    CHECK(line.find('\n') == std::string::npos);

    const std::string lip = lipschitz_json_line("two_balls");
    CHECK(lip.find("\"class\":\"LipschitzOnly\"") != std::string::npos);
}
