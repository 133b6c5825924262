#include "topofem/vtk_io.hpp"

#include <cstdio>
#include <fstream>

namespace topofem {

void write_mesh_vtk(const std::string& path, const BackgroundMesh& mesh,
                    const std::vector<ElementTag>& tags,
                    const std::vector<double>* point_scalars, const std::string& scalar_name) {
    std::ofstream out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "background mesh with element tags\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertices.size() << " double\n";
    char line[128];
    for (const Vec2& v : mesh.vertices) {
        std::snprintf(line, sizeof(line), "%.12g %.12g 0\n", v.x(), v.y());
        out << line;
    }
    out << "CELLS " << mesh.triangles.size() << " " << 4 * mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << mesh.triangles.size() << "\n";
    for (size_t i = 0; i < mesh.triangles.size(); ++i) out << "5\n";
    out << "CELL_DATA " << mesh.triangles.size() << "\n";
    out << "SCALARS tag int 1\nLOOKUP_TABLE default\n";
    for (ElementTag tag : tags) out << static_cast<int>(tag) << "\n";
    if (point_scalars) {
        out << "POINT_DATA " << mesh.vertices.size() << "\n";
        out << "SCALARS " << scalar_name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : *point_scalars) {
            std::snprintf(line, sizeof(line), "%.12g\n", v);
            out << line;
        }
    }
}

void write_polyline_vtk(const std::string& path,
                        const std::vector<std::pair<Vec2, Vec2>>& segments) {
    std::ofstream out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "interface reconstruction\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << 2 * segments.size() << " double\n";
    char line[128];
    for (const auto& s : segments) {
        std::snprintf(line, sizeof(line), "%.12g %.12g 0\n%.12g %.12g 0\n", s.first.x(),
                      s.first.y(), s.second.x(), s.second.y());
        out << line;
    }
    out << "CELLS " << segments.size() << " " << 3 * segments.size() << "\n";
    for (size_t i = 0; i < segments.size(); ++i) out << "2 " << 2 * i << " " << 2 * i + 1 << "\n";
    out << "CELL_TYPES " << segments.size() << "\n";
    for (size_t i = 0; i < segments.size(); ++i) out << "3\n";
}

} // namespace topofem
