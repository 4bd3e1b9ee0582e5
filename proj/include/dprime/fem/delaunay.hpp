#pragma once

// Incremental Bowyer-Watson Delaunay triangulation of a point set.
// Points are inserted in Hilbert-curve order and located by a visibility
// walk from the most recently created triangle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dprime/contour.hpp"
#include "dprime/errors.hpp"

namespace dprime::fem {

using Triangle = std::array<int, 3>;

namespace delaunay_detail {

inline double orient(Vec2 a, Vec2 b, Vec2 c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// > 0 when d lies strictly inside the circumcircle of the ccw triangle abc.
inline double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const long double adx = a.x - d.x, ady = a.y - d.y;
    const long double bdx = b.x - d.x, bdy = b.y - d.y;
    const long double cdx = c.x - d.x, cdy = c.y - d.y;
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    return static_cast<double>(adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                               ad * (bdx * cdy - bdy * cdx));
}

inline std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, int order) {
    std::uint64_t d = 0;
    for (std::uint32_t s = 1u << (order - 1); s > 0; s >>= 1) {
        const std::uint32_t rx = (x & s) ? 1 : 0;
        const std::uint32_t ry = (y & s) ? 1 : 0;
        d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nbr;  // nbr[i] lies across the edge opposite v[i]
    bool alive;
};

} // namespace delaunay_detail

/// Delaunay triangles (ccw) of `points`. Throws MeshError on a corrupted
/// cavity, which only happens for degenerate input.
inline std::vector<Triangle> delaunay_triangulate(const std::vector<Vec2>& points) {
    using namespace delaunay_detail;
    const int n = static_cast<int>(points.size());
    if (n < 3) throw MeshError("delaunay_triangulate: need at least three points");

    double xmin = points[0].x, xmax = xmin, ymin = points[0].y, ymax = ymin;
    for (const Vec2& p : points) {
        xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
    }
    const double span = std::max(xmax - xmin, ymax - ymin);
    const Vec2 mid{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};

    std::vector<Vec2> pts = points;
    pts.push_back(mid + Vec2{-40.0 * span, -30.0 * span});
    pts.push_back(mid + Vec2{40.0 * span, -30.0 * span});
    pts.push_back(mid + Vec2{0.0, 40.0 * span});

    std::vector<Tri> tris;
    tris.reserve(2 * static_cast<std::size_t>(n) + 8);
    tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
    std::vector<int> free_slots;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    {
        std::vector<std::uint64_t> key(n);
        const double scale = 65535.0 / (span > 0.0 ? span : 1.0);
        for (int i = 0; i < n; ++i) {
            const auto x = static_cast<std::uint32_t>((points[i].x - xmin) * scale);
            const auto y = static_cast<std::uint32_t>((points[i].y - ymin) * scale);
            key[i] = hilbert_index(x, y, 16);
        }
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
    }

    std::vector<int> cavity, stack;
    std::vector<char> in_cavity;
    struct BoundaryEdge { int a, b, outside, outside_edge; };
    std::vector<BoundaryEdge> boundary;
    std::vector<int> created;
    int last = 0;

    for (int pi : order) {
        const Vec2 p = pts[pi];

        // Visibility walk.
        int t = last;
        for (int steps = 0;; ++steps) {
            if (steps > 4 * n + 100) throw MeshError("delaunay_triangulate: point location did not terminate");
            const Tri& tr = tris[t];
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                const int e = (k + steps) % 3;
                const Vec2 a = pts[tr.v[(e + 1) % 3]], b = pts[tr.v[(e + 2) % 3]];
                if (orient(a, b, p) < 0.0) { next = tr.nbr[e]; break; }
            }
            if (next < 0) break;
            t = next;
        }

        // Cavity of triangles whose circumcircle contains p.
        if (in_cavity.size() < tris.size()) in_cavity.resize(tris.size() + 1024, 0);
        cavity.clear();
        stack.assign(1, t);
        in_cavity[t] = 1;
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            cavity.push_back(c);
            for (int k = 0; k < 3; ++k) {
                const int nb = tris[c].nbr[k];
                if (nb < 0 || in_cavity[nb]) continue;
                const Tri& q = tris[nb];
                if (incircle(pts[q.v[0]], pts[q.v[1]], pts[q.v[2]], p) > 0.0) {
                    in_cavity[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }

        boundary.clear();
        for (int c : cavity) {
            const Tri& tr = tris[c];
            for (int k = 0; k < 3; ++k) {
                const int nb = tr.nbr[k];
                if (nb >= 0 && in_cavity[nb]) continue;
                int back = -1;
                if (nb >= 0)
                    for (int m = 0; m < 3; ++m)
                        if (tris[nb].nbr[m] == c) back = m;
                boundary.push_back({tr.v[(k + 1) % 3], tr.v[(k + 2) % 3], nb, back});
            }
        }
        for (int c : cavity) {
            in_cavity[c] = 0;
            tris[c].alive = false;
            free_slots.push_back(c);
        }

        created.clear();
        for (const BoundaryEdge& e : boundary) {
            if (orient(pts[e.a], pts[e.b], p) <= 0.0)
                throw MeshError("delaunay_triangulate: cavity is not star-shaped (degenerate input)");
            int slot;
            if (!free_slots.empty()) {
                slot = free_slots.back();
                free_slots.pop_back();
            } else {
                slot = static_cast<int>(tris.size());
                tris.push_back({});
            }
            // v = (a, b, p): edge opposite p is (a, b).
            tris[slot] = {{e.a, e.b, pi}, {-1, -1, e.outside}, true};
            if (e.outside >= 0) tris[e.outside].nbr[e.outside_edge] = slot;
            created.push_back(slot);
        }
        // Fan links: across (b, p) lies the new triangle starting at b,
        // across (p, a) the one ending at a.
        for (int s : created) {
            const int a = tris[s].v[0], b = tris[s].v[1];
            for (int o : created) {
                if (o == s) continue;
                if (tris[o].v[0] == b) tris[s].nbr[0] = o;
                if (tris[o].v[1] == a) tris[s].nbr[1] = o;
            }
        }
        last = created.front();
    }

    std::vector<Triangle> out;
    out.reserve(2 * static_cast<std::size_t>(n));
    for (const Tri& tr : tris)
        if (tr.alive && tr.v[0] < n && tr.v[1] < n && tr.v[2] < n) out.push_back(tr.v);
    return out;
}

} // namespace dprime::fem
