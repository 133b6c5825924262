#pragma once

#include <string>
#include <utility>
#include <vector>

#include "topofem/mesh.hpp"

namespace topofem {

// Legacy ASCII unstructured grid: triangles with an integer cell tag
// (0 interior, 1 cut, 2 strip-only, 3 extension, 4 inactive) and an optional
// vertex scalar field.
void write_mesh_vtk(const std::string& path, const BackgroundMesh& mesh,
                    const std::vector<ElementTag>& tags,
                    const std::vector<double>* point_scalars = nullptr,
                    const std::string& scalar_name = "u");

// Interface reconstruction as VTK line cells.
void write_polyline_vtk(const std::string& path,
                        const std::vector<std::pair<Vec2, Vec2>>& segments);

} // namespace topofem
