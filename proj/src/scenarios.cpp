#include <cmath>

#include "topofem/errors.hpp"
#include "topofem/levelset.hpp"

namespace topofem {

namespace {

// (t - 0.25) - ((x1^2 - 0.3 x1^4) - x2^2): splits at (0, 0, 0.25)
LevelSetField splitting_field() {
    LevelSetField f;
    f.value = [](const Vec2& x, double t) {
        return (t - 0.25) - (x.x() * x.x() - 0.3 * std::pow(x.x(), 4)) + x.y() * x.y();
    };
    f.spatial_gradient = [](const Vec2& x, double) {
        return Vec2(-2 * x.x() + 1.2 * std::pow(x.x(), 3), 2 * x.y());
    };
    f.time_derivative = [](const Vec2&, double) { return 1.0; };
    f.spatial_hessian = [](const Vec2& x, double) {
        Mat2 h;
        h << -2 + 3.6 * x.x() * x.x(), 0, 0, 2;
        return h;
    };
    f.mixed_derivative = [](const Vec2&, double) { return Vec2(0, 0); };
    return f;
}

// x2^2 - |x1|^6 + t: degenerate pinch-off at the origin (C-infinity field)
LevelSetField pinchoff_field() {
    LevelSetField f;
    f.value = [](const Vec2& x, double t) {
        return x.y() * x.y() - std::pow(x.x(), 6) + t;
    };
    f.spatial_gradient = [](const Vec2& x, double) {
        return Vec2(-6 * std::pow(x.x(), 5), 2 * x.y());
    };
    f.time_derivative = [](const Vec2&, double) { return 1.0; };
    f.spatial_hessian = [](const Vec2& x, double) {
        Mat2 h;
        h << -30 * std::pow(x.x(), 4), 0, 0, 2;
        return h;
    };
    f.mixed_derivative = [](const Vec2&, double) { return Vec2(0, 0); };
    return f;
}

// min of the two unit-ball fields centered at (t-1, 0) and (1-t, 0); the
// balls touch at the origin at t = 0. Lipschitz across the min switch.
LevelSetField two_balls_field() {
    auto ball = [](const Vec2& x, double c) {
        return (x.x() - c) * (x.x() - c) + x.y() * x.y() - 1.0;
    };
    LevelSetField f;
    f.value = [ball](const Vec2& x, double t) {
        return std::min(ball(x, t - 1), ball(x, 1 - t));
    };
    f.spatial_gradient = [ball](const Vec2& x, double t) {
        const double c = ball(x, t - 1) <= ball(x, 1 - t) ? t - 1 : 1 - t;
        return Vec2(2 * (x.x() - c), 2 * x.y());
    };
    f.time_derivative = [ball](const Vec2& x, double t) {
        // branch c = t-1 moves with dc/dt = 1, branch c = 1-t with -1
        if (ball(x, t - 1) <= ball(x, 1 - t)) return -2 * (x.x() - (t - 1));
        return 2 * (x.x() - (1 - t));
    };
    f.spatial_hessian = [](const Vec2&, double) { return Mat2(2 * Mat2::Identity()); };
    f.mixed_derivative = [ball](const Vec2& x, double t) {
        return ball(x, t - 1) <= ball(x, 1 - t) ? Vec2(-2, 0) : Vec2(2, 0);
    };
    f.smoothness = Smoothness::LipschitzOnly;
    f.smooth_at = [ball](const Vec2& x, double t) {
        return std::abs(ball(x, t - 1) - ball(x, 1 - t)) > 1e-9;
    };
    return f;
}

// Two domains merging at (0,0,0) with a kinked pre-merge boundary that turns
// smooth right after the touch:
//   phi = x2^2 - |x1| - t        (t < 0)
//   phi = x2^4 - x1^2 - t^p      (t >= 0)
// The zero sets agree at t = 0; [V_Gamma]_+ stays bounded after the merge
// iff p >= 4.
LevelSetField nonsmooth_merge_field(double p) {
    LevelSetField f;
    f.value = [p](const Vec2& x, double t) {
        if (t < 0) return x.y() * x.y() - std::abs(x.x()) - t;
        return std::pow(x.y(), 4) - x.x() * x.x() - std::pow(t, p);
    };
    f.spatial_gradient = [](const Vec2& x, double t) {
        if (t < 0) return Vec2(x.x() > 0 ? -1.0 : (x.x() < 0 ? 1.0 : 0.0), 2 * x.y());
        return Vec2(-2 * x.x(), 4 * std::pow(x.y(), 3));
    };
    f.time_derivative = [p](const Vec2&, double t) {
        if (t < 0) return -1.0;
        return -p * std::pow(t, p - 1);
    };
    f.spatial_hessian = [](const Vec2& x, double t) {
        Mat2 h;
        if (t < 0)
            h << 0, 0, 0, 2;
        else
            h << -2, 0, 0, 12 * x.y() * x.y();
        return h;
    };
    f.mixed_derivative = [](const Vec2&, double) { return Vec2(0, 0); };
    // The transition instant is excluded together with the flat zone
    // |t|^p <= Newton residual tolerance, where the branch value -t^p is
    // numerically indistinguishable from a root.
    const double t_band = std::max(1e-3, std::pow(1e-11, 1.0 / p));
    f.smooth_at = [t_band](const Vec2& x, double t) {
        if (std::abs(t) < t_band) return false; // branch switch
        return t > 0 || std::abs(x.x()) > 1e-9;
    };
    return f;
}

LevelSetField disk_field(double sign_t) {
    // x1^2 + x2^2 - (1 + sign_t * t): growing (+1) or shrinking (-1) disk
    LevelSetField f;
    f.value = [sign_t](const Vec2& x, double t) {
        return x.squaredNorm() - (1.0 + sign_t * t);
    };
    f.spatial_gradient = [](const Vec2& x, double) { return Vec2(2 * x); };
    f.time_derivative = [sign_t](const Vec2&, double) { return -sign_t; };
    f.spatial_hessian = [](const Vec2&, double) { return Mat2(2 * Mat2::Identity()); };
    f.mixed_derivative = [](const Vec2&, double) { return Vec2(0, 0); };
    return f;
}

} // namespace

Scenario make_nonsmooth_merge(double p) {
    Scenario s;
    s.name = "nonsmooth_merge";
    s.field = nonsmooth_merge_field(p);
    s.bulk = {-1.0, 1.0, -1.0, 1.0};
    s.t_begin = -0.25;
    s.t_end = 0.25;
    s.classify_box = {{-0.8, 0.8, -0.8, 0.8}, -0.2, 0.2};
    s.critical_x = Vec2(0, 0);
    s.critical_t = 0.0;
    s.note = "transition at t=0 is only Lipschitz; the touch point is not classifiable "
             "by the nondegenerate table";
    return s;
}

std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> list;

    {
        Scenario s;
        s.name = "paper_splitting";
        s.field = splitting_field();
        s.bulk = {-2.0, 2.0, -1.5, 1.5};
        s.t_begin = 0.0;
        s.t_end = 0.5;
        s.classify_box = {{-1.0, 1.0, -1.0, 1.0}, 0.0, 0.5};
        s.critical_x = Vec2(0, 0);
        s.critical_t = 0.25;
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "paper_merging";
        s.field = time_reversed(splitting_field(), 0.25);
        s.bulk = {-2.0, 2.0, -1.5, 1.5};
        s.t_begin = 0.0;
        s.t_end = 0.5;
        s.classify_box = {{-1.0, 1.0, -1.0, 1.0}, 0.0, 0.5};
        s.critical_x = Vec2(0, 0);
        s.critical_t = 0.25;
        s.note = "no theoretical guarantee";
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "degenerate_pinchoff";
        s.field = pinchoff_field();
        s.bulk = {-2.0, 2.0, -1.5, 1.5};
        s.t_begin = -0.3;
        s.t_end = 0.3;
        s.classify_box = {{-1.0, 1.0, -1.0, 1.0}, -0.3, 0.3};
        s.critical_x = Vec2(0, 0);
        s.critical_t = 0.0;
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "two_balls";
        s.field = two_balls_field();
        s.bulk = {-3.2, 3.2, -1.6, 1.6};
        s.t_begin = -0.9;
        s.t_end = 0.9;
        s.classify_box = {{-1.5, 1.5, -1.5, 1.5}, -0.5, 0.5};
        s.critical_x = Vec2(0, 0);
        s.critical_t = 0.0;
        s.note = "boundary only Lipschitz after the touch";
        list.push_back(s);
    }
    list.push_back(make_nonsmooth_merge(4.0));
    {
        Scenario s;
        s.name = "growing_disk";
        s.field = disk_field(+1.0);
        s.bulk = {-2.0, 2.0, -2.0, 2.0};
        s.t_begin = 0.0;
        s.t_end = 1.0;
        s.classify_box = {{-1.0, 1.0, -1.0, 1.0}, 0.0, 1.0};
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "shrinking_disk";
        s.field = disk_field(-1.0);
        s.bulk = {-1.5, 1.5, -1.5, 1.5};
        s.t_begin = 0.0;
        s.t_end = 0.9; // the island vanishes at t = 1
        s.classify_box = {{-1.0, 1.0, -1.0, 1.0}, 0.0, 1.05};
        s.critical_x = Vec2(0, 0);
        s.critical_t = 1.0;
        list.push_back(s);
    }
    return list;
}

Scenario scenario_by_name(const std::string& name) {
    for (auto& s : builtin_scenarios())
        if (s.name == name) return s;
    throw ConfigError("unknown scenario: " + name);
}

} // namespace topofem
