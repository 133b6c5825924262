#pragma once

#include <Eigen/Dense>

namespace topofem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Axis-aligned bulk rectangle (x_lo,x_hi) x (y_lo,y_hi).
struct Rect {
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }
    bool nondegenerate() const { return x_hi > x_lo && y_hi > y_lo; }
    bool contains(const Vec2& p) const {
        return p.x() >= x_lo && p.x() <= x_hi && p.y() >= y_lo && p.y() <= y_hi;
    }
    Rect inflated(double m) const { return {x_lo - m, x_hi + m, y_lo - m, y_hi + m}; }
};

inline double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

} // namespace topofem
