#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "topofem/geometry.hpp"
#include "topofem/levelset.hpp"

namespace topofem {

struct Facet {
    int v0 = -1, v1 = -1;
    std::array<int, 2> tri = {-1, -1}; // tri[1] = -1 on the bulk boundary
};

// Fixed structured triangulation of the bulk rectangle: each grid square is
// split into two triangles along the lower-left/upper-right diagonal, then
// refined uniformly. Immutable after construction.
struct BackgroundMesh {
    Rect rect;
    double h0 = 0;
    int refinement_level = 0;
    double h = 0; // characteristic size h0 * 2^-level (grid spacing)
    int nx = 0, ny = 0;

    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles; // counterclockwise
    std::vector<Facet> facets;
    std::vector<std::array<int, 3>> tri_facets; // facet of edge (v_i, v_{i+1})

    int n_triangles() const { return static_cast<int>(triangles.size()); }
    std::array<Vec2, 3> tri_coords(int t) const {
        const auto& tri = triangles[t];
        return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
    }
    double tri_area(int t) const {
        auto c = tri_coords(t);
        return triangle_area(c[0], c[1], c[2]);
    }
    std::array<int, 3> tri_neighbors(int t) const; // -1 across boundary facets

    // Triangle containing p (barycentric tolerance 1e-12), -1 if outside.
    // With `accept`, only triangles with accept[t] != 0 qualify (points on
    // shared edges then resolve to an accepted neighbor).
    int locate(const Vec2& p, const std::vector<std::uint8_t>* accept = nullptr) const;
};

BackgroundMesh build_background(const Rect& rect, double h0, int levels);

enum class ElementTag : std::uint8_t { Interior = 0, Cut = 1, StripOnly = 2, Extension = 3, Inactive = 4 };

// Per-time-step element sets of the unfitted method. Interior/cut detection
// samples phi at vertices, edge midpoints and the barycenter; the active set
// and the boundary strip are grown by ceil(delta/h)+1 facet-neighbor layers.
struct ActiveMesh {
    int time_index = 0;
    double time = 0;
    double delta = 0;

    std::vector<int> active_elements;
    std::vector<int> interior_elements;
    std::vector<int> cut_elements;
    std::vector<int> strip_elements;
    std::vector<int> stabilization_facets; // facets joining active and strip elements

    std::vector<std::uint8_t> is_active, is_interior, is_cut, is_strip; // size n_triangles

    std::vector<ElementTag> tags(const BackgroundMesh& mesh) const;
};

ActiveMesh classify_elements(const BackgroundMesh& mesh, const LevelSetField& field,
                             double t, double delta);

// delta = safety * max(v_max_plus, 1) * dt; the velocity floor keeps
// delta ~ dt even for inward-moving boundaries.
double choose_delta(const EvolutionConstants& constants, double dt, double safety);

// Connected components of an element subset under facet adjacency.
int count_components(const BackgroundMesh& mesh, const std::vector<int>& elements);

} // namespace topofem
