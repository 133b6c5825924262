#include <cmath>

#include "topofem/cutgeom.hpp"
#include "topofem/levelset.hpp"
#include "topofem/mesh.hpp"

namespace topofem {

EvolutionConstants estimate_v_max_plus(const LevelSetField& field, const Rect& bulk,
                                       double t0, double t1, int slices, int mesh_levels,
                                       int quad_depth, std::optional<Vec2> exclude_x,
                                       std::optional<double> exclude_t,
                                       double exclusion_radius, double eps_grad) {
    const BackgroundMesh mesh = build_background(bulk, 0.5, mesh_levels);
    EvolutionConstants out;
    const int n = std::max(slices, 2);
    for (int i = 0; i < n; ++i) {
        const double t = t0 + (t1 - t0) * i / (n - 1);
        const ActiveMesh active = classify_elements(mesh, field, t, 0.0);
        for (int e : active.cut_elements) {
            const CutQuadrature cq =
                cut_element_quadrature(mesh, e, field, t, quad_depth, 2);
            for (const Vec2& x : cq.surface_points) {
                if (exclude_x && exclude_t && exclusion_radius > 0) {
                    const double d = std::sqrt((x - *exclude_x).squaredNorm() +
                                               (t - *exclude_t) * (t - *exclude_t));
                    if (d < exclusion_radius) {
                        ++out.excluded_near_singular;
                        continue;
                    }
                }
                const double gn = field.spatial_gradient(x, t).norm();
                if (gn < eps_grad) {
                    ++out.excluded_near_singular;
                    continue;
                }
                ++out.sample_count;
                const double v = -field.time_derivative(x, t) / gn;
                if (v > out.v_max_plus) out.v_max_plus = v;
            }
        }
    }
    return out;
}

} // namespace topofem
