#include "topofem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "topofem/errors.hpp"

namespace topofem {

namespace {

void append_sorted(std::vector<int>& out, const std::vector<std::uint8_t>& mask) {
    out.clear();
    for (int i = 0; i < static_cast<int>(mask.size()); ++i)
        if (mask[i]) out.push_back(i);
}

// Grow a mask by `layers` facet-neighbor layers.
void grow_layers(const BackgroundMesh& mesh, std::vector<std::uint8_t>& mask, int layers) {
    std::vector<int> frontier;
    for (int t = 0; t < mesh.n_triangles(); ++t)
        if (mask[t]) frontier.push_back(t);
    for (int layer = 0; layer < layers; ++layer) {
        std::vector<int> next;
        for (int t : frontier) {
            for (int nb : mesh.tri_neighbors(t)) {
                if (nb >= 0 && !mask[nb]) {
                    mask[nb] = 1;
                    next.push_back(nb);
                }
            }
        }
        frontier.swap(next);
        if (frontier.empty()) break;
    }
}

} // namespace

std::array<int, 3> BackgroundMesh::tri_neighbors(int t) const {
    std::array<int, 3> out{-1, -1, -1};
    for (int e = 0; e < 3; ++e) {
        const Facet& f = facets[tri_facets[t][e]];
        out[e] = (f.tri[0] == t) ? f.tri[1] : f.tri[0];
    }
    return out;
}

int BackgroundMesh::locate(const Vec2& p, const std::vector<std::uint8_t>* accept) const {
    const double cw = rect.width() / nx;
    const double ch = rect.height() / ny;
    int i = static_cast<int>(std::floor((p.x() - rect.x_lo) / cw));
    int j = static_cast<int>(std::floor((p.y() - rect.y_lo) / ch));
    i = std::clamp(i, 0, nx - 1);
    j = std::clamp(j, 0, ny - 1);
    const double tol = 1e-12 * std::max(rect.width(), rect.height());
    // check the candidate cell and its neighbors (points on grid lines)
    for (int dj = 0; dj <= 2; ++dj) {
        for (int di = 0; di <= 2; ++di) {
            const int ci = i + (di == 2 ? -1 : di);
            const int cj = j + (dj == 2 ? -1 : dj);
            if (ci < 0 || ci >= nx || cj < 0 || cj >= ny) continue;
            for (int k = 0; k < 2; ++k) {
                const int t = 2 * (cj * nx + ci) + k;
                if (accept && !(*accept)[t]) continue;
                auto c = tri_coords(t);
                const double a = triangle_area(c[0], c[1], c[2]);
                const double a0 = triangle_area(p, c[1], c[2]);
                const double a1 = triangle_area(c[0], p, c[2]);
                const double a2 = triangle_area(c[0], c[1], p);
                if (a0 >= -tol && a1 >= -tol && a2 >= -tol &&
                    std::abs(a0 + a1 + a2 - a) <= 1e-9 * a)
                    return t;
            }
        }
    }
    return -1;
}

BackgroundMesh build_background(const Rect& rect, double h0, int levels) {
    if (!rect.nondegenerate()) throw InvalidRect("build_background: degenerate rectangle");
    if (h0 <= 0) throw InvalidRect("build_background: h0 must be positive");
    if (levels < 0) throw InvalidRect("build_background: levels must be >= 0");

    BackgroundMesh mesh;
    mesh.rect = rect;
    mesh.h0 = h0;
    mesh.refinement_level = levels;
    mesh.h = h0 * std::pow(2.0, -levels);

    const int scale = 1 << levels;
    mesh.nx = std::max(1, static_cast<int>(std::lround(rect.width() / h0))) * scale;
    mesh.ny = std::max(1, static_cast<int>(std::lround(rect.height() / h0))) * scale;

    const int nvx = mesh.nx + 1, nvy = mesh.ny + 1;
    mesh.vertices.reserve(static_cast<size_t>(nvx) * nvy);
    for (int j = 0; j < nvy; ++j) {
        for (int i = 0; i < nvx; ++i) {
            mesh.vertices.emplace_back(rect.x_lo + rect.width() * i / mesh.nx,
                                       rect.y_lo + rect.height() * j / mesh.ny);
        }
    }
    auto vid = [&](int i, int j) { return j * nvx + i; };

    mesh.triangles.reserve(static_cast<size_t>(mesh.nx) * mesh.ny * 2);
    for (int j = 0; j < mesh.ny; ++j) {
        for (int i = 0; i < mesh.nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }

    std::map<std::pair<int, int>, int> facet_of_edge;
    mesh.tri_facets.resize(mesh.triangles.size());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const int a = mesh.triangles[t][e];
            const int b = mesh.triangles[t][(e + 1) % 3];
            const auto key = std::minmax(a, b);
            auto it = facet_of_edge.find(key);
            if (it == facet_of_edge.end()) {
                Facet f;
                f.v0 = key.first;
                f.v1 = key.second;
                f.tri[0] = t;
                const int id = static_cast<int>(mesh.facets.size());
                mesh.facets.push_back(f);
                facet_of_edge.emplace(key, id);
                mesh.tri_facets[t][e] = id;
            } else {
                mesh.facets[it->second].tri[1] = t;
                mesh.tri_facets[t][e] = it->second;
            }
        }
    }
    return mesh;
}

ActiveMesh classify_elements(const BackgroundMesh& mesh, const LevelSetField& field,
                             double t, double delta) {
    if (delta < 0) throw std::invalid_argument("classify_elements: delta must be >= 0");

    const int ntri = mesh.n_triangles();
    ActiveMesh am;
    am.time = t;
    am.delta = delta;
    am.is_interior.assign(ntri, 0);
    am.is_cut.assign(ntri, 0);
    am.is_active.assign(ntri, 0);
    am.is_strip.assign(ntri, 0);

    // phi at vertices, facet midpoints and barycenters; shared values computed once
    std::vector<double> phi_v(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v) phi_v[v] = field.value(mesh.vertices[v], t);
    std::vector<double> phi_f(mesh.facets.size());
    for (size_t f = 0; f < mesh.facets.size(); ++f) {
        const Vec2 mid = 0.5 * (mesh.vertices[mesh.facets[f].v0] + mesh.vertices[mesh.facets[f].v1]);
        phi_f[f] = field.value(mid, t);
    }

    for (int e = 0; e < ntri; ++e) {
        const auto& tri = mesh.triangles[e];
        const Vec2 bary = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
        const double samples[7] = {phi_v[tri[0]], phi_v[tri[1]], phi_v[tri[2]],
                                   phi_f[mesh.tri_facets[e][0]], phi_f[mesh.tri_facets[e][1]],
                                   phi_f[mesh.tri_facets[e][2]], field.value(bary, t)};
        int n_out = 0;
        for (double s : samples) n_out += (s > 0.0); // phi = 0 counts as inside
        if (n_out == 0)
            am.is_interior[e] = 1;
        else if (n_out < 7)
            am.is_cut[e] = 1;
    }

    const int layers = static_cast<int>(std::ceil(delta / mesh.h)) + 1;
    for (int e = 0; e < ntri; ++e) am.is_active[e] = am.is_interior[e] || am.is_cut[e];
    grow_layers(mesh, am.is_active, layers);
    am.is_strip = am.is_cut;
    grow_layers(mesh, am.is_strip, layers);

    append_sorted(am.active_elements, am.is_active);
    append_sorted(am.interior_elements, am.is_interior);
    append_sorted(am.cut_elements, am.is_cut);
    append_sorted(am.strip_elements, am.is_strip);

    for (int f = 0; f < static_cast<int>(mesh.facets.size()); ++f) {
        const auto& facet = mesh.facets[f];
        if (facet.tri[1] < 0) continue;
        const int a = facet.tri[0], b = facet.tri[1];
        if (!am.is_active[a] || !am.is_active[b]) continue;
        if (am.is_strip[a] || am.is_strip[b]) am.stabilization_facets.push_back(f);
    }
    return am;
}

std::vector<ElementTag> ActiveMesh::tags(const BackgroundMesh& mesh) const {
    std::vector<ElementTag> out(mesh.n_triangles(), ElementTag::Inactive);
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        if (is_interior[e])
            out[e] = ElementTag::Interior;
        else if (is_cut[e])
            out[e] = ElementTag::Cut;
        else if (is_strip[e])
            out[e] = ElementTag::StripOnly;
        else if (is_active[e])
            out[e] = ElementTag::Extension;
    }
    return out;
}

double choose_delta(const EvolutionConstants& constants, double dt, double safety) {
    if (dt <= 0) throw std::invalid_argument("choose_delta: dt must be positive");
    if (safety < 1) throw std::invalid_argument("choose_delta: safety must be >= 1");
    const double v_floor = 1.0;
    return safety * std::max(constants.v_max_plus, v_floor) * dt;
}

int count_components(const BackgroundMesh& mesh, const std::vector<int>& elements) {
    std::vector<std::uint8_t> in(mesh.n_triangles(), 0), seen(mesh.n_triangles(), 0);
    for (int e : elements) in[e] = 1;
    int components = 0;
    for (int start : elements) {
        if (seen[start]) continue;
        ++components;
        std::queue<int> q;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            const int e = q.front();
            q.pop();
            for (int nb : mesh.tri_neighbors(e)) {
                if (nb >= 0 && in[nb] && !seen[nb]) {
                    seen[nb] = 1;
                    q.push(nb);
                }
            }
        }
    }
    return components;
}

} // namespace topofem
