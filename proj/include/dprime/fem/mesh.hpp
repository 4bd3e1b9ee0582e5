#pragma once

// Interface-conforming triangulation of the disk of radius R_out around a
// contour, with every interface vertex carried twice (one copy per side).
//
// Point placement: the contour polyline (edge length ~h) and the outer
// circle are fixed; the rest are accepted greedily from a jittered lattice
// in order of increasing distance to the contour, keeping a spacing of
// 0.8 s(x) with the size field s(x) = h (1 + |d(x)| / delta). Every
// polyline edge then has an empty diametral disk, so it is a Delaunay edge
// and the triangulation conforms to the interface without constraints.
// Points well inside the outer circle do not depend on R_out.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "dprime/contour.hpp"
#include "dprime/errors.hpp"
#include "dprime/fem/delaunay.hpp"

namespace dprime::fem {

enum class Region : std::uint8_t { inner = 0, outer = 1 };

struct InterfaceMesh {
    std::vector<Vec2> nodes;
    std::vector<Triangle> triangles;  ///< ccw
    std::vector<Region> region;       ///< per triangle
    /// (inner copy, outer copy) per interface vertex, in contour order.
    std::vector<std::array<int, 2>> interface_pairs;
    std::vector<int> outer_boundary_nodes;
    Vec2 center;
    double h = 0.0;
    double r_out = 0.0;

    std::size_t interface_edge_count() const { return interface_pairs.size(); }

    /// Length of the interface polyline.
    double interface_length() const {
        double len = 0.0;
        const std::size_t n = interface_pairs.size();
        for (std::size_t i = 0; i < n; ++i)
            len += norm(nodes[interface_pairs[(i + 1) % n][0]] - nodes[interface_pairs[i][0]]);
        return len;
    }

    double triangle_area(std::size_t t) const {
        const auto& v = triangles[t];
        return 0.5 * cross(nodes[v[1]] - nodes[v[0]], nodes[v[2]] - nodes[v[0]]);
    }

    /// Smallest interior angle over all triangles, in degrees.
    double min_angle_degrees() const {
        double worst = 180.0;
        for (const auto& v : triangles) {
            for (int k = 0; k < 3; ++k) {
                const Vec2 a = nodes[v[k]], b = nodes[v[(k + 1) % 3]], c = nodes[v[(k + 2) % 3]];
                const double ang = std::atan2(std::abs(cross(b - a, c - a)), dot(b - a, c - a));
                worst = std::min(worst, ang * 180.0 / std::numbers::pi);
            }
        }
        return worst;
    }

    /// Triangles with a vertex on the interface.
    std::size_t near_interface_triangle_count() const {
        std::vector<char> on_interface(nodes.size(), 0);
        for (const auto& p : interface_pairs) on_interface[p[0]] = on_interface[p[1]] = 1;
        std::size_t count = 0;
        for (const auto& v : triangles)
            if (on_interface[v[0]] || on_interface[v[1]] || on_interface[v[2]]) ++count;
        return count;
    }

    /// Plain-text export:
    ///   dprime-mesh 1
    ///   nodes <N>          then N lines "x y"
    ///   triangles <T>      then T lines "a b c region"   (region 0 inner, 1 outer)
    ///   interface_pairs <P> then P lines "inner outer"
    ///   outer_boundary <B> then B lines "node"
    void write(std::ostream& os) const {
        os.precision(17);
        os << "dprime-mesh 1\n";
        os << "nodes " << nodes.size() << '\n';
        for (const Vec2& p : nodes) os << p.x << ' ' << p.y << '\n';
        os << "triangles " << triangles.size() << '\n';
        for (std::size_t t = 0; t < triangles.size(); ++t)
            os << triangles[t][0] << ' ' << triangles[t][1] << ' ' << triangles[t][2] << ' '
               << static_cast<int>(region[t]) << '\n';
        os << "interface_pairs " << interface_pairs.size() << '\n';
        for (const auto& p : interface_pairs) os << p[0] << ' ' << p[1] << '\n';
        os << "outer_boundary " << outer_boundary_nodes.size() << '\n';
        for (int b : outer_boundary_nodes) os << b << '\n';
    }
};

namespace mesh_detail {

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic uniform value in [-0.5, 0.5) from lattice indices.
inline double jitter(std::int64_t i, std::int64_t j, std::uint64_t salt) {
    const std::uint64_t h = splitmix(splitmix(static_cast<std::uint64_t>(i) * 0x100000001b3ull ^ salt) ^
                                     static_cast<std::uint64_t>(j));
    return static_cast<double>(h >> 11) / 9007199254740992.0 - 0.5;
}

/// Signed distance to a closed ccw polyline (positive inside), accelerated
/// by a bucket grid over the segments.
class PolylineDistance {
public:
    explicit PolylineDistance(std::vector<Vec2> poly) : poly_(std::move(poly)) {
        xmin_ = ymin_ = 1e300;
        double xmax = -1e300, ymax = -1e300;
        for (const Vec2& p : poly_) {
            xmin_ = std::min(xmin_, p.x); ymin_ = std::min(ymin_, p.y);
            xmax = std::max(xmax, p.x); ymax = std::max(ymax, p.y);
        }
        const std::size_t n = poly_.size();
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += norm(poly_[(i + 1) % n] - poly_[i]);
        mean /= n;
        cell_ = 2.0 * mean;
        nx_ = static_cast<int>((xmax - xmin_) / cell_) + 1;
        ny_ = static_cast<int>((ymax - ymin_) / cell_) + 1;
        buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = poly_[i], b = poly_[(i + 1) % n];
            const int i0 = cx(std::min(a.x, b.x)), i1 = cx(std::max(a.x, b.x));
            const int j0 = cy(std::min(a.y, b.y)), j1 = cy(std::max(a.y, b.y));
            for (int ii = i0; ii <= i1; ++ii)
                for (int jj = j0; jj <= j1; ++jj) buckets_[idx(ii, jj)].push_back(static_cast<int>(i));
        }
    }

    double signed_distance(Vec2 p) const {
        const double d = unsigned_distance(p);
        return inside(p) ? d : -d;
    }

    double unsigned_distance(Vec2 p) const {
        // Ring search near the polyline; plain scan for far points.
        const int pi = cx(p.x), pj = cy(p.y);
        constexpr int kMaxRing = 6;
        double best = 1e300;
        if (pi >= -kMaxRing && pj >= -kMaxRing && pi < nx_ + kMaxRing && pj < ny_ + kMaxRing) {
            for (int ring = 0; ring <= kMaxRing; ++ring) {
                const double ring_gap = (ring - 1) * cell_;
                if (ring > 0 && ring_gap > 0.0 && ring_gap * ring_gap > best) return std::sqrt(best);
                for (int ii = pi - ring; ii <= pi + ring; ++ii) {
                    const bool edge_column = (ii == pi - ring || ii == pi + ring);
                    for (int jj = pj - ring; jj <= pj + ring; jj += edge_column ? 1 : 2 * std::max(ring, 1)) {
                        if (ii < 0 || jj < 0 || ii >= nx_ || jj >= ny_) continue;
                        for (int s : buckets_[idx(ii, jj)]) best = std::min(best, segment_d2(p, s));
                    }
                }
            }
            const double ring_gap = kMaxRing * cell_;
            if (ring_gap * ring_gap > best) return std::sqrt(best);
        }
        for (std::size_t s = 0; s < poly_.size(); ++s) best = std::min(best, segment_d2(p, static_cast<int>(s)));
        return std::sqrt(best);
    }

    /// Even-odd crossing test.
    bool inside(Vec2 p) const {
        bool in = false;
        const std::size_t n = poly_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2 a = poly_[i], b = poly_[j];
            if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
        }
        return in;
    }

private:
    int cx(double x) const { return static_cast<int>(std::floor((x - xmin_) / cell_)); }
    int cy(double y) const { return static_cast<int>(std::floor((y - ymin_) / cell_)); }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * ny_ + j; }

    double segment_d2(Vec2 p, int s) const {
        const Vec2 a = poly_[s], b = poly_[(s + 1) % poly_.size()];
        const Vec2 ab = b - a;
        const double t = std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0);
        return norm2(p - (a + t * ab));
    }

    std::vector<Vec2> poly_;
    double xmin_, ymin_, cell_;
    int nx_, ny_;
    std::vector<std::vector<int>> buckets_;
};

/// Uniform hash grid for the spacing test.
class PointGrid {
public:
    explicit PointGrid(double cell) : cell_(cell) {}

    void insert(Vec2 p) { cells_[key(p)].push_back(p); }

    bool has_point_within(Vec2 p, double r) const {
        const std::int64_t i0 = coord(p.x - r), i1 = coord(p.x + r);
        const std::int64_t j0 = coord(p.y - r), j1 = coord(p.y + r);
        const double r2 = r * r;
        for (std::int64_t i = i0; i <= i1; ++i)
            for (std::int64_t j = j0; j <= j1; ++j) {
                const auto it = cells_.find(pack(i, j));
                if (it == cells_.end()) continue;
                for (const Vec2& q : it->second)
                    if (norm2(q - p) < r2) return true;
            }
        return false;
    }

private:
    std::int64_t coord(double x) const { return static_cast<std::int64_t>(std::floor(x / cell_)); }
    static std::uint64_t pack(std::int64_t i, std::int64_t j) {
        return (static_cast<std::uint64_t>(i) << 32) ^ (static_cast<std::uint64_t>(j) & 0xffffffffull);
    }
    std::uint64_t key(Vec2 p) const { return pack(coord(p.x), coord(p.y)); }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<Vec2>> cells_;
};

} // namespace mesh_detail

struct MeshOptions {
    double grading_length = 0.0;  ///< delta in s(x) = h (1 + |d| / delta); 0 selects L / (4 pi)
    double spacing_factor = 0.8;  ///< accepted points keep distance >= factor * s(x)
    int candidate_density = 4;    ///< lattice candidates per s(x) in each direction
};

/// Triangulates the disk of radius r_out centred at the contour's centroid.
inline InterfaceMesh build_mesh(const Contour& c, double h, double r_out, const MeshOptions& opt = {}) {
    using namespace mesh_detail;
    const double L = c.length();
    const double R_L = L / (2.0 * std::numbers::pi);
    detail::require(h > 0.0 && h <= L / 64.0 * (1.0 + 1e-12), "build_mesh: need 0 < h <= L / 64");
    detail::require(r_out >= 3.0 * R_L * (1.0 - 1e-12), "build_mesh: need R_out >= 3 L / (2 pi)");
    const double delta = opt.grading_length > 0.0 ? opt.grading_length : 0.5 * R_L;
    const double beta = opt.spacing_factor;
    const Vec2 center = c.centroid();
    auto size_at = [&](double d) { return h * (1.0 + std::abs(d) / delta); };

    // Interface polyline, uniform in arc length.
    const int n_if = std::max(16, static_cast<int>(std::lround(L / h)));
    std::vector<Vec2> poly;
    poly.reserve(n_if);
    for (double s : c.arclength_parameters(n_if)) poly.push_back(c.position(s));
    for (const Vec2& p : poly)
        if (norm(p - center) > r_out - 2.0 * h) throw MeshError("build_mesh: contour reaches the outer boundary");
    const PolylineDistance dist(poly);
    // The greedy spacing test is what keeps diametral disks empty; it needs
    // beta * h above the largest half-diagonal of the polyline edges.
    double max_edge = 0.0;
    for (int i = 0; i < n_if; ++i) max_edge = std::max(max_edge, norm(poly[(i + 1) % n_if] - poly[i]));
    if (beta * h < 0.75 * max_edge) throw MeshError("build_mesh: polyline too coarse for the spacing factor");

    std::vector<Vec2> points = poly;
    PointGrid grid(h);
    for (const Vec2& p : poly) grid.insert(p);

    // Outer circle.
    double max_rho = 0.0;
    for (const Vec2& p : poly) max_rho = std::max(max_rho, norm(p - center));
    const double s_out = size_at(r_out - max_rho);
    const int n_out = std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r_out / s_out)));
    const std::size_t first_outer = points.size();
    for (int i = 0; i < n_out; ++i) {
        const double th = 2.0 * std::numbers::pi * i / n_out;
        const Vec2 p = center + Vec2{r_out * std::cos(th), r_out * std::sin(th)};
        points.push_back(p);
        grid.insert(p);
    }

    // Candidates: coarse cells anchored at the centroid, each filled with a
    // jittered lattice fine enough for the smallest size the cell can see.
    struct Candidate { double key; Vec2 p; };
    std::vector<Candidate> candidates;
    const double coarse = std::max(4.0 * h, 0.25 * R_L);
    const int nc = static_cast<int>(std::ceil(r_out / coarse));
    for (int ci = -nc; ci < nc; ++ci) {
        for (int cj = -nc; cj < nc; ++cj) {
            const Vec2 lo = center + Vec2{ci * coarse, cj * coarse};
            const Vec2 mid = lo + Vec2{0.5 * coarse, 0.5 * coarse};
            if (norm(mid - center) > r_out + coarse) continue;
            const double dmid = dist.unsigned_distance(mid);
            const double dmin = std::max(0.0, dmid - coarse * std::numbers::sqrt2 * 0.5);
            const double spacing = size_at(dmin) / opt.candidate_density;
            const int m = std::max(1, static_cast<int>(std::ceil(coarse / spacing)));
            const double step = coarse / m;
            for (int a = 0; a < m; ++a) {
                for (int b = 0; b < m; ++b) {
                    const std::int64_t gi = static_cast<std::int64_t>(ci) * 100003 + a;
                    const std::int64_t gj = static_cast<std::int64_t>(cj) * 100003 + b;
                    const Vec2 p = lo + Vec2{(a + 0.5 + 0.6 * jitter(gi, gj, m)) * step,
                                             (b + 0.5 + 0.6 * jitter(gj, gi, m + 7)) * step};
                    if (norm(p - center) >= r_out) continue;
                    const double d = dist.unsigned_distance(p);
                    if (d < 0.5 * h) continue;
                    candidates.push_back({d, p});
                }
            }
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& x, const Candidate& y) { return x.key < y.key; });
    for (const Candidate& cand : candidates) {
        const double r = beta * size_at(cand.key);
        if (grid.has_point_within(cand.p, r)) continue;
        if (r_out - norm(cand.p - center) < 0.5 * r) continue;
        points.push_back(cand.p);
        grid.insert(cand.p);
    }

    std::vector<Triangle> tris = delaunay_triangulate(points);

    // Conformity: every polyline edge must be a mesh edge.
    {
        std::unordered_map<std::uint64_t, int> edges;
        auto ekey = [](int a, int b) {
            if (a > b) std::swap(a, b);
            return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
        };
        for (const auto& t : tris)
            for (int k = 0; k < 3; ++k) edges[ekey(t[k], t[(k + 1) % 3])] = 1;
        for (int i = 0; i < n_if; ++i)
            if (!edges.count(ekey(i, (i + 1) % n_if)))
                throw MeshError("build_mesh: interface edge missing from the triangulation");
    }

    InterfaceMesh mesh;
    mesh.center = center;
    mesh.h = h;
    mesh.r_out = r_out;
    mesh.nodes = points;
    for (int i = 0; i < n_if; ++i) {
        mesh.interface_pairs.push_back({i, static_cast<int>(mesh.nodes.size())});
        mesh.nodes.push_back(poly[i]);
    }
    for (std::size_t i = first_outer; i < first_outer + static_cast<std::size_t>(n_out); ++i)
        mesh.outer_boundary_nodes.push_back(static_cast<int>(i));

    mesh.triangles.reserve(tris.size());
    mesh.region.reserve(tris.size());
    for (auto t : tris) {
        const Vec2 g = (1.0 / 3.0) * (points[t[0]] + points[t[1]] + points[t[2]]);
        const Region reg = dist.inside(g) ? Region::inner : Region::outer;
        if (reg == Region::outer)
            for (int& v : t)
                if (v < n_if) v = mesh.interface_pairs[v][1];
        if (cross(mesh.nodes[t[1]] - mesh.nodes[t[0]], mesh.nodes[t[2]] - mesh.nodes[t[0]]) <= 0.0)
            throw MeshError("build_mesh: non-positive triangle area");
        mesh.triangles.push_back(t);
        mesh.region.push_back(reg);
    }
    return mesh;
}

} // namespace dprime::fem
