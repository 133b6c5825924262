#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "topofem/geometry.hpp"
#include "topofem/levelset.hpp"
#include "topofem/mesh.hpp"

namespace topofem {

// Reference triangle rule on (0,0),(1,0),(0,1); weights sum to 1 and are all
// positive. Orders map to {1, 3, 6, 7}-point Gauss rules.
struct TriRule {
    std::vector<Vec2> points; // reference coordinates (xi, eta)
    std::vector<double> weights;
    int degree = 0;
};
const TriRule& tri_rule(int order);

// Gauss-Legendre on [0,1], weights sum to 1.
struct SegRule {
    std::vector<double> points;
    std::vector<double> weights;
};
const SegRule& seg_rule(int npoints);

// Quadrature for T cap Omega and Gamma cap T on one element. Built by uniform
// sub-refinement with a vertex-linear interface reconstruction on each leaf;
// phi = 0 counts as inside.
struct CutQuadrature {
    int element_id = -1;
    int subdivision_depth = 0;
    std::vector<Vec2> volume_points;
    std::vector<double> volume_weights; // area units, all > 0
    std::vector<Vec2> surface_points;
    std::vector<double> surface_weights; // length units
    std::vector<Vec2> surface_normals;   // grad phi / |grad phi| (outward)

    double volume() const;
    double surface_length() const;
};

CutQuadrature cut_triangle_quadrature(const std::array<Vec2, 3>& tri,
                                      const std::function<double(const Vec2&)>& phi,
                                      const std::function<Vec2(const Vec2&)>& grad_phi,
                                      int depth, int rule_order);

CutQuadrature cut_element_quadrature(const BackgroundMesh& mesh, int element,
                                     const LevelSetField& field, double t, int depth,
                                     int rule_order);

// Interface reconstruction of all cut elements as straight segments.
std::vector<std::pair<Vec2, Vec2>> extract_interface_segments(const BackgroundMesh& mesh,
                                                              const ActiveMesh& active,
                                                              const LevelSetField& field,
                                                              double t, int depth);

// All quadrature of one time step: cut rules for cut elements, the plain
// mapped rule for interior ones.
struct StepQuadrature {
    const BackgroundMesh* mesh = nullptr;
    const ActiveMesh* active = nullptr;
    int depth = 0;
    int rule_order = 0;
    std::vector<CutQuadrature> cut_rules; // parallel to active->cut_elements
};

StepQuadrature build_step_quadrature(const BackgroundMesh& mesh, const ActiveMesh& active,
                                     const LevelSetField& field, double t, int depth,
                                     int rule_order);

double integrate_volume(const StepQuadrature& quad,
                        const std::function<double(const Vec2&)>& f);
double integrate_surface(const StepQuadrature& quad,
                         const std::function<double(const Vec2&)>& g);

} // namespace topofem
