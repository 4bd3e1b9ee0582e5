#pragma once

// Level-set length and area profiles of the distance to a contour, on
// either side of it, computed in parallel coordinates.
//
// The map (s, tau) -> gamma(s) + tau nu(s) covers the side up to the cut
// locus. The point at depth tau keeps gamma(s) as a nearest boundary point
// iff |gamma(s) - gamma(s')|^2 + 2 tau (gamma(s) - gamma(s')) . nu(s) >= 0
// for every s', which gives the cut depth in closed form:
//
//     cut(s) = min( 1/kappa(s) if kappa(s) > 0,
//                   min over s' with d.nu < 0 of |d|^2 / (-2 d.nu) ),
//     d = gamma(s) - gamma(s').
//
// With the Jacobian |gamma'(s)| (1 - kappa(s) tau):
//     L(t) = int_{cut(s) > t} |gamma'(s)| (1 - kappa(s) t) ds,
//     A(t) = int |gamma'(s)| (m - kappa(s) m^2 / 2) ds,  m = min(t, cut(s)).
// Both are measured quantities; cut loci never need to be traced.
//
// On each sample cell cut(s) is the minimum of a few smooth branches (the
// focal distance and one bitangent-disk radius per competing arc). Each
// branch is a cubic Hermite interpolant built from exact values and
// envelope-theorem slopes, so the level {cut = t} is located by cubic roots
// and L, A are integrated exactly on the pieces.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "dprime/contour.hpp"
#include "dprime/errors.hpp"
#include "dprime/quadrature.hpp"

namespace dprime {

enum class ProfileSide { inner, outer };

inline const char* to_string(ProfileSide side) {
    return side == ProfileSide::inner ? "inner" : "outer";
}

class ParallelCoordinates {
public:
    ParallelCoordinates(const Contour& c, ProfileSide side)
        : side_(side), contour_(c), sign_(side == ProfileSide::inner ? 1.0 : -1.0), n_(c.sample_count()),
          rule_(kCellOrder) {
        const auto& pts = c.samples();
        const auto& d1 = c.sample_derivatives();

        std::vector<Sample> smp(n_);
        for (int i = 0; i < n_; ++i) {
            const double s = c.sample_parameter(i);
            const Vec2 nu = sign_ * ((1.0 / norm(d1[i])) * perp_left(d1[i]));
            double best = std::numeric_limits<double>::infinity();
            int arg = -1;
            for (int j = 0; j < n_; ++j) {
                if (j == i) continue;
                const Vec2 d = pts[i] - pts[j];
                const double dn = dot(d, nu);
                if (dn >= 0.0) continue;
                const double v = norm2(d) / (-2.0 * dn);
                if (v < best) best = v, arg = j;
            }
            Sample& q = smp[i];
            q.hint = arg;
            q.focal = focal_branch(s);
            q.ratio = arg >= 0 ? ratio_branch(s, arg) : Branch{};
        }

        rows_.resize(n_);
        for (int i = 0; i < n_; ++i)
            rows_[i] = {norm(d1[i]) / n_, sign_ * c.sample_curvatures()[i],
                        std::min(smp[i].focal.value, smp[i].ratio.value)};
        std::sort(rows_.begin(), rows_.end(), [](const Row& a, const Row& b) { return a.cut < b.cut; });
        const std::size_t m = rows_.size();
        suffix_w_.assign(m + 1, 0.0);
        suffix_wk_.assign(m + 1, 0.0);
        for (std::size_t k = m; k-- > 0;) {
            suffix_w_[k] = suffix_w_[k + 1] + rows_[k].weight;
            suffix_wk_[k] = suffix_wk_[k + 1] + rows_[k].weight * rows_[k].kappa;
        }

        cells_.resize(n_);
        for (int i = 0; i < n_; ++i) build_cell(i, smp[i], smp[(i + 1) % n_]);
        max_cut_ = refine_max_depth(smp);
    }

    ProfileSide side() const { return side_; }
    double contour_length() const { return contour_.length(); }

    /// Largest depth reached before the cut locus; the in-radius for the inner side.
    double max_depth() const { return max_cut_; }

    /// Length of the level set at depth t.
    double level_length(double t) const {
        if (t < 0.0) return 0.0;
        double sum = 0.0;
        for (const Cell& cell : cells_) {
            if (t < cell.lo) {
                sum += cell.weight - t * cell.weight_kappa;
            } else if (t < cell.hi) {
                sum += partial(cell, t, true);
            }
        }
        return sum;
    }

    /// Area of the points on this side at distance < t.
    double level_area(double t) const {
        if (t <= 0.0) return 0.0;
        double sum = 0.0;
        for (const Cell& cell : cells_) {
            if (t < cell.lo) {
                sum += t * cell.weight - 0.5 * t * t * cell.weight_kappa;
            } else if (t >= cell.hi) {
                sum += cell.removed_area;
            } else {
                sum += partial(cell, t, false);
            }
        }
        return sum;
    }

    /// int_0^H f(t) L(t) dt. Panels are split at every sampled cut depth,
    /// where the sampled L has a kink, so the rule sees a linear weight on
    /// each sub-panel.
    template <class F>
    double integrate_against_length(F&& f, double H, int panels = 256, int order = 16) const {
        if (H <= 0.0) return 0.0;
        const GaussLegendreRule rule(order);
        std::vector<double> edges;
        edges.reserve(panels + rows_.size() + 1);
        for (int p = 0; p <= panels; ++p) edges.push_back(H * p / panels);
        for (const Row& r : rows_)
            if (r.cut > 0.0 && r.cut < H) edges.push_back(r.cut);
        std::sort(edges.begin(), edges.end());
        double sum = 0.0;
        std::size_t k = 0;
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
            const double a = edges[e], b = edges[e + 1];
            if (b - a <= 0.0) continue;
            while (k < rows_.size() && rows_[k].cut <= a) ++k;
            const double W = suffix_w_[k], WK = suffix_wk_[k];
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double panel = 0.0;
            for (int q = 0; q < order; ++q) {
                const double t = mid + half * rule.nodes[q];
                panel += rule.weights[q] * f(t) * (W - t * WK);
            }
            sum += half * panel;
        }
        return sum;
    }

private:
    static constexpr int kCellOrder = 8;
    static constexpr int kMaxKnots = 16;
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    /// Value and parameter slope of one smooth cut branch.
    struct Branch {
        double value = kInf;
        double slope = 0.0;
    };

    struct Sample {
        int hint = -1;  // sample index of the nearest competing arc
        Branch focal, ratio;
    };

    /// c0 + c1 u + c2 u^2 + c3 u^3 on u in [0, 1].
    struct Cubic {
        double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
        double operator()(double u) const { return c0 + u * (c1 + u * (c2 + u * c3)); }
    };

    struct Cell {
        double s0 = 0.0;
        std::array<Cubic, 3> branch{};
        int count = 0;
        std::array<double, kMaxKnots> knots{};  // interior points where the active branch changes
        int knot_count = 0;
        double lo = kInf;  // min of cut over the cell
        double hi = kInf;  // upper bound for max of cut over the cell
        double weight = 0.0, weight_kappa = 0.0;
        double removed_area = 0.0;  // area swept when the whole cell is past its cut
    };

    struct Row {
        double weight;  // |gamma'(s_i)| / n
        double kappa;   // curvature toward the side's normal
        double cut;     // depth of the cut point along the normal
    };

    double side_curvature(double s) const { return sign_ * contour_.curvature(s); }

    Branch focal_branch(double s) const {
        const double kappa = side_curvature(s);
        if (!(kappa > 0.0)) return {};
        return {1.0 / kappa, -sign_ * contour_.curvature_derivative(s) / (kappa * kappa)};
    }

    /// Local minimum of the bitangent ratio near sample `hint`, with its
    /// slope in s at the fixed minimizer.
    Branch ratio_branch(double s, int hint) const {
        const Vec2 p = contour_.position(s);
        const Vec2 g1 = contour_.derivative(s);
        const Vec2 nu = sign_ * ((1.0 / norm(g1)) * perp_left(g1));
        const double kappa = side_curvature(s);
        auto ratio = [&](double sp) {
            const Vec2 d = p - contour_.position(sp);
            const double dn = dot(d, nu);
            return dn < 0.0 ? norm2(d) / (-2.0 * dn) : kInf;
        };
        const double centre = static_cast<double>(hint) / n_;
        const double sc = s + std::round(centre - s);
        double a = centre - 3.0 / n_, b = centre + 3.0 / n_;
        if (sc > a && sc < b) (sc < centre ? a : b) = sc;
        const double a0 = a, b0 = b;

        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        double f1 = ratio(x1), f2 = ratio(x2);
        for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
            if (f1 < f2) {
                b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = ratio(x1);
            } else {
                a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = ratio(x2);
            }
        }
        const double sp = f1 < f2 ? x1 : x2;
        const double r = std::min(f1, f2);
        if (!std::isfinite(r)) return {};
        // A minimizer on the bracket edge means the arc has no local minimum here.
        const double edge = 1e-3 / n_;
        if ((sp - a0 < edge && a0 != sc) || (b0 - sp < edge && b0 != sc)) return {};
        // Minimizer next to s: the bitangent disk degenerates to the osculating
        // one, and the slope formula below loses all digits.
        if (std::abs(sp - sc) < 0.25 / n_) return focal_branch(s);
        const Vec2 d = p - contour_.position(sp);
        const double dn = dot(d, nu);
        return {r, -dot(d, g1) * (2.0 * dn + kappa * norm2(d)) / (2.0 * dn * dn)};
    }

    Cubic hermite(const Branch& a, const Branch& b) const {
        const double h = 1.0 / n_;
        const double da = h * a.slope, db = h * b.slope;
        return {a.value, da, 3.0 * (b.value - a.value) - 2.0 * da - db, 2.0 * (a.value - b.value) + da + db};
    }

    /// Roots of q(u) = t in (0, 1), appended to out.
    static void roots(const Cubic& q, double t, std::array<double, kMaxKnots>& out, int& count) {
        std::array<double, 4> ends{0.0, 1.0, 0.0, 0.0};
        int n_ends = 2;
        // Critical points split [0, 1] into monotone pieces.
        const double A = 3.0 * q.c3, B = 2.0 * q.c2, C = q.c1;
        if (A != 0.0) {
            const double disc = B * B - 4.0 * A * C;
            if (disc > 0.0) {
                const double r = std::sqrt(disc);
                for (double u : {(-B - r) / (2.0 * A), (-B + r) / (2.0 * A)})
                    if (u > 0.0 && u < 1.0) ends[n_ends++] = u;
            }
        } else if (B != 0.0) {
            const double u = -C / B;
            if (u > 0.0 && u < 1.0) ends[n_ends++] = u;
        }
        std::sort(ends.begin(), ends.begin() + n_ends);
        for (int k = 0; k + 1 < n_ends; ++k) {
            double lo = ends[k], hi = ends[k + 1];
            double flo = q(lo) - t;
            const double fhi = q(hi) - t;
            if ((flo > 0.0) == (fhi > 0.0)) continue;
            for (int it = 0; it < 100 && hi - lo > 1e-16; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = q(mid) - t;
                if ((fm > 0.0) == (flo > 0.0)) lo = mid, flo = fm;
                else hi = mid;
            }
            if (count < kMaxKnots) out[count++] = 0.5 * (lo + hi);
        }
    }

    double model(const Cell& cell, double u) const {
        double v = kInf;
        for (int b = 0; b < cell.count; ++b) v = std::min(v, cell.branch[b](u));
        return v;
    }

    void build_cell(int i, const Sample& a, const Sample& b) {
        Cell& cell = cells_[i];
        cell.s0 = static_cast<double>(i) / n_;
        const double s1 = static_cast<double>(i + 1) / n_;

        // 1/kappa only matters where it is the active branch at an end; elsewhere
        // it can be huge near an inflection and its cubic meaningless.
        const bool focal_active = a.focal.value <= a.ratio.value || b.focal.value <= b.ratio.value;
        if (focal_active && std::isfinite(a.focal.value) && std::isfinite(b.focal.value))
            cell.branch[cell.count++] = hermite(a.focal, b.focal);
        auto cyclic_gap = [&](int x, int y) {
            const int d = std::abs(x - y) % n_;
            return std::min(d, n_ - d);
        };
        if (a.hint >= 0 && b.hint >= 0 && cyclic_gap(a.hint, b.hint) <= 3) {
            if (std::isfinite(a.ratio.value) && std::isfinite(b.ratio.value))
                cell.branch[cell.count++] = hermite(a.ratio, b.ratio);
        } else {
            // Competing arcs differ across the cell: follow both.
            for (const Sample* own : {&a, &b}) {
                if (own->hint < 0 || cell.count >= 3) continue;
                const Branch ea = own == &a ? a.ratio : ratio_branch(cell.s0, own->hint);
                const Branch eb = own == &b ? b.ratio : ratio_branch(s1, own->hint);
                if (std::isfinite(ea.value) && std::isfinite(eb.value)) cell.branch[cell.count++] = hermite(ea, eb);
            }
        }

        if (cell.count == 0) {
            const double ca = std::min(a.focal.value, a.ratio.value), cb = std::min(b.focal.value, b.ratio.value);
            if (std::isfinite(ca) && std::isfinite(cb)) cell.branch[cell.count++] = {ca, cb - ca, 0.0, 0.0};
        }

        // Knots where two branches cross.
        for (int x = 0; x < cell.count; ++x)
            for (int y = x + 1; y < cell.count; ++y) {
                const Cubic& p = cell.branch[x];
                const Cubic& q = cell.branch[y];
                roots({p.c0 - q.c0, p.c1 - q.c1, p.c2 - q.c2, p.c3 - q.c3}, 0.0, cell.knots, cell.knot_count);
            }
        std::sort(cell.knots.begin(), cell.knots.begin() + cell.knot_count);

        for (int b2 = 0; b2 < cell.count; ++b2) {
            double bmax = -kInf;
            for (double u : extrema_candidates(cell.branch[b2])) {
                const double v = cell.branch[b2](u);
                cell.lo = std::min(cell.lo, v);
                bmax = std::max(bmax, v);
            }
            cell.hi = std::min(cell.hi, bmax);
        }

        integrate_cell(cell, 0.0, 1.0, [&](double, double speed, double kappa) {
            return std::array<double, 2>{speed, speed * kappa};
        }, cell.weight, cell.weight_kappa);
        if (cell.count > 0) {
            double unused = 0.0;
            integrate_pieces(cell, 0.0, 1.0, [&](double u, double speed, double kappa) {
                const double m = model(cell, u);
                return std::array<double, 2>{speed * (m - 0.5 * kappa * m * m), 0.0};
            }, cell.removed_area, unused);
        }
    }

    static std::array<double, 4> extrema_candidates(const Cubic& q) {
        std::array<double, 4> out{0.0, 1.0, 0.0, 1.0};
        const double A = 3.0 * q.c3, B = 2.0 * q.c2, C = q.c1;
        if (A != 0.0) {
            const double disc = B * B - 4.0 * A * C;
            if (disc >= 0.0) {
                const double r = std::sqrt(disc);
                out[2] = std::clamp((-B - r) / (2.0 * A), 0.0, 1.0);
                out[3] = std::clamp((-B + r) / (2.0 * A), 0.0, 1.0);
            }
        } else if (B != 0.0) {
            out[2] = std::clamp(-C / B, 0.0, 1.0);
        }
        return out;
    }

    /// Gauss-Legendre over u in [ua, ub] of a two-component integrand
    /// g(u, |gamma'|, kappa), accumulated into r0 and r1.
    template <class G>
    void integrate_cell(const Cell& cell, double ua, double ub, G&& g, double& r0, double& r1) const {
        if (ub <= ua) return;
        const double h = 1.0 / n_;
        const double mid = 0.5 * (ua + ub), half = 0.5 * (ub - ua);
        for (int q = 0; q < kCellOrder; ++q) {
            const double u = mid + half * rule_.nodes[q];
            const double s = cell.s0 + h * u;
            const Vec2 d1 = contour_.derivative(s), d2 = contour_.second_derivative(s);
            const double speed = norm(d1);
            const double kappa = sign_ * cross(d1, d2) / (speed * speed * speed);
            const auto v = g(u, speed, kappa);
            r0 += rule_.weights[q] * half * h * v[0];
            r1 += rule_.weights[q] * half * h * v[1];
        }
    }

    /// As integrate_cell, split at the cell's branch knots.
    template <class G>
    void integrate_pieces(const Cell& cell, double ua, double ub, G&& g, double& r0, double& r1) const {
        double a = ua;
        for (int k = 0; k < cell.knot_count; ++k) {
            const double knot = cell.knots[k];
            if (knot <= a || knot >= ub) continue;
            integrate_cell(cell, a, knot, g, r0, r1);
            a = knot;
        }
        integrate_cell(cell, a, ub, g, r0, r1);
    }

    /// Contribution of a cell that is partly past its cut at depth t.
    double partial(const Cell& cell, double t, bool length) const {
        std::array<double, kMaxKnots> cuts{};
        int count = 0;
        for (int b = 0; b < cell.count; ++b) roots(cell.branch[b], t, cuts, count);
        std::array<double, kMaxKnots + 2> edges{};
        edges[0] = 0.0;
        int n_edges = 1;
        for (int k = 0; k < count; ++k) edges[n_edges++] = cuts[k];
        edges[n_edges++] = 1.0;
        std::sort(edges.begin(), edges.begin() + n_edges);

        double sum = 0.0, unused = 0.0;
        for (int k = 0; k + 1 < n_edges; ++k) {
            const double a = edges[k], b = edges[k + 1];
            if (b <= a) continue;
            const bool alive = model(cell, 0.5 * (a + b)) > t;
            if (length) {
                if (alive)
                    integrate_cell(cell, a, b, [&](double, double speed, double kappa) {
                        return std::array<double, 2>{speed * (1.0 - kappa * t), 0.0};
                    }, sum, unused);
            } else if (alive) {
                integrate_cell(cell, a, b, [&](double, double speed, double kappa) {
                    return std::array<double, 2>{speed * (t - 0.5 * kappa * t * t), 0.0};
                }, sum, unused);
            } else {
                integrate_pieces(cell, a, b, [&](double u, double speed, double kappa) {
                    const double m = model(cell, u);
                    return std::array<double, 2>{speed * (m - 0.5 * kappa * m * m), 0.0};
                }, sum, unused);
            }
        }
        return sum;
    }

    /// Maximum of the cell's cut model and where it is attained: at an end,
    /// a knot, or a branch extremum.
    std::pair<double, double> cell_max(const Cell& cell) const {
        if (cell.count == 0) return {kInf, 0.0};
        std::pair<double, double> best{-kInf, 0.0};
        auto consider = [&](double u) { best = std::max(best, std::pair<double, double>{model(cell, u), u}); };
        consider(0.0);
        consider(1.0);
        for (int k = 0; k < cell.knot_count; ++k) consider(cell.knots[k]);
        for (int b = 0; b < cell.count; ++b)
            for (double u : extrema_candidates(cell.branch[b])) consider(u);
        return best;
    }

    /// Cut depth at s from the exact branches of the neighbouring samples.
    double exact_cut(double s, const Sample& a, const Sample& b) const {
        double v = focal_branch(s).value;
        for (const Sample* q : {&a, &b})
            if (q->hint >= 0) v = std::min(v, ratio_branch(s, q->hint).value);
        return v;
    }

    /// The cubic model locates the deepest cell; the maximum itself is taken
    /// from the exact cut function, whose slopes carry no rounding noise.
    double refine_max_depth(const std::vector<Sample>& smp) const {
        double best = -kInf, best_u = 0.0;
        int best_cell = 0;
        for (int i = 0; i < n_; ++i) {
            const auto [v, u] = cell_max(cells_[i]);
            if (v > best) best = v, best_u = u, best_cell = i;
        }
        if (!std::isfinite(best)) return best;
        const Sample& a = smp[best_cell];
        const Sample& b = smp[(best_cell + 1) % n_];
        const double h = 1.0 / n_;
        const double centre = cells_[best_cell].s0 + h * best_u;
        double lo = centre - h, hi = centre + h;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = exact_cut(x1, a, b), f2 = exact_cut(x2, a, b);
        for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
            if (f1 > f2) {
                hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = exact_cut(x1, a, b);
            } else {
                lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = exact_cut(x2, a, b);
            }
        }
        double sample_max = -kInf;
        for (const Sample& q : smp) sample_max = std::max(sample_max, std::min(q.focal.value, q.ratio.value));
        return std::max({f1, f2, sample_max});
    }

    ProfileSide side_;
    Contour contour_;
    double sign_;
    int n_;
    GaussLegendreRule rule_;
    std::vector<Row> rows_;
    std::vector<double> suffix_w_, suffix_wk_;
    std::vector<Cell> cells_;
    double max_cut_ = 0.0;
};

/// Radius of the largest inscribed disk.
inline double in_radius(const Contour& c) {
    return ParallelCoordinates(c, ProfileSide::inner).max_depth();
}

struct DistanceProfileTable {
    ProfileSide side;
    std::vector<double> t;
    std::vector<double> area;    ///< A(t_j)
    std::vector<double> length;  ///< L(t_j)

    void write_csv(std::ostream& os) const {
        os << "t,A,L\n";
        os.precision(17);
        for (std::size_t j = 0; j < t.size(); ++j) os << t[j] << ',' << area[j] << ',' << length[j] << '\n';
    }
};

/// Tabulates A and L on n + 1 equispaced depths in [0, horizon]. For the
/// inner side the horizon is the in-radius and is chosen automatically when
/// `horizon` is not positive; for the outer side it defaults to 6 L / (2 pi).
inline DistanceProfileTable distance_profiles(const ParallelCoordinates& pc, double horizon, int n) {
    detail::require(n >= 1, "distance_profiles: grid size must be positive");
    if (pc.side() == ProfileSide::inner) {
        horizon = pc.max_depth();
    } else if (!(horizon > 0.0)) {
        horizon = 6.0 * pc.contour_length() / (2.0 * std::numbers::pi);
    }
    DistanceProfileTable table{pc.side(), {}, {}, {}};
    for (int j = 0; j <= n; ++j) {
        const double t = horizon * j / n;
        table.t.push_back(t);
        table.area.push_back(pc.level_area(t));
        table.length.push_back(pc.level_length(t));
    }
    for (std::size_t j = 1; j < table.area.size(); ++j)
        if (table.area[j] < table.area[j - 1] - 1e-12 * table.area.back())
            throw ConvergenceError("distance_profiles: area profile is not monotone");
    return table;
}

inline DistanceProfileTable distance_profiles(const Contour& c, ProfileSide side, double horizon = 0.0,
                                              int n = 512) {
    return distance_profiles(ParallelCoordinates(c, side), horizon, n);
}

} // namespace dprime
