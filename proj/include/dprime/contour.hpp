#pragma once

// Closed C^2 contours represented by truncated Fourier series of the
// parametrization s in [0, 1) -> R^2. Curves are stored counterclockwise,
// so the left normal points into the bounded component.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dprime/errors.hpp"
#include "dprime/quadrature.hpp"

namespace dprime {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline Vec2 perp_left(Vec2 a) { return {-a.y, a.x}; }

/// x(s) = sum_k cx[k] cos(2 pi k s) + sx[k] sin(2 pi k s), same for y.
struct FourierCurve {
    std::vector<double> cx, sx, cy, sy;

    std::size_t modes() const { return cx.size(); }

    /// d-th derivative with respect to s.
    Vec2 eval(double s, int derivative = 0) const {
        Vec2 p;
        const double w = 2.0 * std::numbers::pi;
        for (std::size_t k = 0; k < cx.size(); ++k) {
            if (k == 0 && derivative > 0) continue;
            const double a = w * static_cast<double>(k);
            const double c = std::cos(a * s);
            const double sn = std::sin(a * s);
            double fc = c, fs = sn;  // derivative of cos and sin terms
            switch (derivative) {
                case 0: break;
                case 1: fc = -a * sn; fs = a * c; break;
                case 2: fc = -a * a * c; fs = -a * a * sn; break;
                case 3: fc = a * a * a * sn; fs = -a * a * a * c; break;
                default: throw DomainError("FourierCurve: derivative order above 3");
            }
            p.x += cx[k] * fc + sx[k] * fs;
            p.y += cy[k] * fc + sy[k] * fs;
        }
        return p;
    }

    FourierCurve scaled(double factor) const {
        FourierCurve out = *this;
        for (auto* v : {&out.cx, &out.sx, &out.cy, &out.sy})
            for (double& c : *v) c *= factor;
        return out;
    }

    /// s -> -s, which flips the orientation.
    FourierCurve reversed() const {
        FourierCurve out = *this;
        for (double& c : out.sx) c = -c;
        for (double& c : out.sy) c = -c;
        return out;
    }
};

enum class ContourKind { circle, ellipse, perturbed, general };

class Contour {
public:
    Contour(FourierCurve curve, ContourKind kind = ContourKind::general, int sample_count = 2048)
        : curve_(std::move(curve)), kind_(kind), n_(sample_count) {
        detail::require(n_ >= 64, "Contour: sample_count must be at least 64");
        detail::require(curve_.cx.size() == curve_.sx.size() && curve_.cx.size() == curve_.cy.size() &&
                            curve_.cx.size() == curve_.sy.size() && curve_.cx.size() >= 2,
                        "Contour: inconsistent Fourier coefficient arrays");
        sample();
        if (area_ < 0.0) {
            curve_ = curve_.reversed();
            sample();
        }
        validate();
    }

    const FourierCurve& curve() const { return curve_; }
    ContourKind kind() const { return kind_; }
    int sample_count() const { return n_; }

    Vec2 position(double s) const { return curve_.eval(s, 0); }
    Vec2 derivative(double s) const { return curve_.eval(s, 1); }
    Vec2 second_derivative(double s) const { return curve_.eval(s, 2); }

    /// Signed curvature; positive where the curve bends toward the interior.
    double curvature(double s) const {
        const Vec2 d1 = derivative(s);
        const Vec2 d2 = second_derivative(s);
        const double speed = norm(d1);
        return cross(d1, d2) / (speed * speed * speed);
    }

    /// d kappa / ds with respect to the parameter.
    double curvature_derivative(double s) const {
        const Vec2 d1 = derivative(s);
        const Vec2 d2 = second_derivative(s);
        const Vec2 d3 = curve_.eval(s, 3);
        const double sp2 = norm2(d1);
        const double sp3 = sp2 * std::sqrt(sp2);
        return cross(d1, d3) / sp3 - 3.0 * cross(d1, d2) * dot(d1, d2) / (sp3 * sp2);
    }

    Vec2 inward_normal(double s) const {
        const Vec2 d1 = derivative(s);
        return (1.0 / norm(d1)) * perp_left(d1);
    }

    double length() const { return length_; }
    double area() const { return area_; }
    Vec2 centroid() const { return centroid_; }
    double max_abs_curvature() const { return max_abs_curvature_; }

    /// L^2 - 4 pi |Omega_+| >= 0, zero only for circles.
    double isoperimetric_defect() const {
        return length_ * length_ - 4.0 * std::numbers::pi * area_;
    }

    /// Uniform parameter samples s_i = i / n.
    const std::vector<Vec2>& samples() const { return points_; }
    const std::vector<Vec2>& sample_derivatives() const { return d1_; }
    const std::vector<double>& sample_curvatures() const { return kappa_; }
    double sample_parameter(int i) const { return static_cast<double>(i) / n_; }

    /// Arc length from s = 0 to s, for s in [0, 1].
    double arc_length_to(double s) const {
        const double pos = std::clamp(s, 0.0, 1.0) * n_;
        const int i = std::min(static_cast<int>(pos), n_ - 1);
        const double s0 = static_cast<double>(i) / n_;
        return cumulative_[i] + speed_integral(s0, s);
    }

    /// Parameters of n points spaced uniformly in arc length, starting at s = 0.
    std::vector<double> arclength_parameters(int n) const {
        detail::require(n >= 3, "arclength_parameters: need at least three points");
        std::vector<double> out(n);
        int seg = 0;
        for (int j = 0; j < n; ++j) {
            const double target = length_ * j / n;
            while (seg + 1 < n_ && cumulative_[seg + 1] <= target) ++seg;
            const double s0 = static_cast<double>(seg) / n_;
            double s = s0 + (target - cumulative_[seg]) / norm(d1_[seg]);
            for (int it = 0; it < 30; ++it) {
                const double f = cumulative_[seg] + speed_integral(s0, s) - target;
                const double step = f / norm(derivative(s));
                s -= step;
                if (std::abs(step) < 1e-15) break;
            }
            out[j] = s;
        }
        return out;
    }

    /// Closest boundary parameter to p: dense sample search then Newton on
    /// |gamma(s) - p|^2.
    double closest_parameter(Vec2 p) const {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_; ++i) {
            const double d2 = norm2(points_[i] - p);
            if (d2 < best_d2) best_d2 = d2, best = i;
        }
        double s = sample_parameter(best);
        const double h = 1.0 / n_;
        for (int it = 0; it < 20; ++it) {
            const Vec2 r = position(s) - p;
            const Vec2 d1 = derivative(s);
            const Vec2 d2 = second_derivative(s);
            const double g = dot(r, d1);
            const double gp = norm2(d1) + dot(r, d2);
            if (gp <= 0.0) break;
            const double step = std::clamp(g / gp, -h, h);
            s -= step;
            if (std::abs(step) < 1e-15) break;
        }
        if (norm2(position(s) - p) > best_d2) s = sample_parameter(best);
        return s - std::floor(s);
    }

private:
    void sample() {
        points_.resize(n_);
        d1_.resize(n_);
        kappa_.resize(n_);
        double len = 0.0, twice_area = 0.0, mx = 0.0, my = 0.0;
        max_abs_curvature_ = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double s = sample_parameter(i);
            points_[i] = position(s);
            d1_[i] = derivative(s);
            kappa_[i] = curvature(s);
            max_abs_curvature_ = std::max(max_abs_curvature_, std::abs(kappa_[i]));
            len += norm(d1_[i]);
            const double c = cross(points_[i], d1_[i]);
            twice_area += c;
            // centroid by Green: x dA = (1/3) x (x dy - y dx) summed, same for y
            mx += points_[i].x * c;
            my += points_[i].y * c;
        }
        length_ = len / n_;
        area_ = 0.5 * twice_area / n_;
        centroid_ = {mx / n_ / (3.0 * area_), my / n_ / (3.0 * area_)};
        cumulative_.assign(n_ + 1, 0.0);
        for (int i = 0; i < n_; ++i)
            cumulative_[i + 1] = cumulative_[i] + speed_integral(sample_parameter(i), sample_parameter(i + 1));
    }

    double speed_integral(double a, double b) const {
        static const GaussLegendreRule rule(8);
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            sum += rule.weights[i] * norm(derivative(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]));
        return 0.5 * (b - a) * sum;
    }

    void validate() const {
        double min_speed = std::numeric_limits<double>::infinity();
        for (const Vec2& d : d1_) min_speed = std::min(min_speed, norm(d));
        if (!(min_speed > 1e-8 * length_))
            throw DomainError("Contour: regularity violation (vanishing tangent)");
        if (!std::isfinite(max_abs_curvature_))
            throw DomainError("Contour: curvature is not finite");
        // Segment sweep for self-intersections at sample resolution.
        for (int i = 0; i < n_; ++i) {
            const Vec2 a = points_[i], b = points_[(i + 1) % n_];
            for (int j = i + 2; j < n_; ++j) {
                if (i == 0 && j == n_ - 1) continue;
                const Vec2 c = points_[j], d = points_[(j + 1) % n_];
                const double o1 = cross(b - a, c - a), o2 = cross(b - a, d - a);
                const double o3 = cross(d - c, a - c), o4 = cross(d - c, b - c);
                if (o1 * o2 < 0.0 && o3 * o4 < 0.0)
                    throw DomainError("Contour: self-intersection detected");
            }
        }
    }

    FourierCurve curve_;
    ContourKind kind_;
    int n_;
    std::vector<Vec2> points_, d1_;
    std::vector<double> kappa_, cumulative_;
    double length_ = 0.0, area_ = 0.0, max_abs_curvature_ = 0.0;
    Vec2 centroid_;
};

/// Circle of radius R centred at the origin.
inline Contour make_circle(double R, int sample_count = 2048) {
    detail::require(R > 0.0 && std::isfinite(R), "make_circle: radius must be positive");
    FourierCurve c{{0.0, R}, {0.0, 0.0}, {0.0, 0.0}, {0.0, R}};
    return Contour(std::move(c), ContourKind::circle, sample_count);
}

namespace detail {

/// Perimeter of a Fourier curve by the periodic trapezoidal rule, which
/// converges geometrically for analytic parametrizations.
inline double fourier_perimeter(const FourierCurve& c, int n = 1 << 14) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += norm(c.eval(static_cast<double>(i) / n, 1));
    return sum / n;
}

} // namespace detail

/// Ellipse with semi-axes (a, a / aspect) and perimeter L. Perimeter is
/// homogeneous of degree one in the semi-axes, so a = L / P(1, 1/aspect).
inline Contour make_ellipse_by_perimeter(double L, double aspect, int sample_count = 2048) {
    detail::require(L > 0.0 && std::isfinite(L), "make_ellipse_by_perimeter: length must be positive");
    detail::require(aspect > 1.0 && aspect <= 20.0, "make_ellipse_by_perimeter: aspect must lie in (1, 20]");
    FourierCurve unit{{0.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 1.0 / aspect}};
    const double a = L / detail::fourier_perimeter(unit);
    if (!std::isfinite(a) || a <= 0.0) throw ConvergenceError("make_ellipse_by_perimeter: perimeter scaling failed");
    return Contour(unit.scaled(a), ContourKind::ellipse, sample_count);
}

/// Radial perturbation r(theta) = rho0 (1 + eps cos(m theta)) scaled to length L.
inline Contour make_perturbed_circle(double L, int mode, double eps, int sample_count = 2048) {
    detail::require(L > 0.0 && std::isfinite(L), "make_perturbed_circle: length must be positive");
    detail::require(mode >= 2, "make_perturbed_circle: mode must be at least 2");
    detail::require(std::abs(eps) < 1.0, "make_perturbed_circle: |eps| must be below 1");
    const std::size_t K = static_cast<std::size_t>(mode) + 2;
    FourierCurve unit{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0),
                      std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
    // r cos t = cos t + eps/2 (cos (m+1)t + cos (m-1)t)
    // r sin t = sin t + eps/2 (sin (m+1)t - sin (m-1)t)
    unit.cx[1] += 1.0;
    unit.sy[1] += 1.0;
    unit.cx[mode + 1] += 0.5 * eps;
    unit.cx[mode - 1] += 0.5 * eps;
    unit.sy[mode + 1] += 0.5 * eps;
    unit.sy[mode - 1] -= 0.5 * eps;
    const double rho0 = L / detail::fourier_perimeter(unit);
    const ContourKind kind = eps == 0.0 ? ContourKind::circle : ContourKind::perturbed;
    return Contour(unit.scaled(rho0), kind, sample_count);
}

/// Signed distance to the contour: positive inside, negative outside.
inline double signed_distance(const Contour& c, Vec2 p) {
    const double s = c.closest_parameter(p);
    const Vec2 foot = c.position(s);
    const double d = norm(p - foot);
    return dot(p - foot, c.inward_normal(s)) >= 0.0 ? d : -d;
}

} // namespace dprime
