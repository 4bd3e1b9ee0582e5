#pragma once

// Rayleigh-quotient upper bounds for the lowest eigenvalue built from a pair
// of one-dimensional profiles (psi_plus inside, psi_minus outside, both in
// the distance-to-boundary variable t) transplanted onto a contour.
//
// For the circle of length L the weights are the exact level lengths
// L - 2 pi t and L + 2 pi t. For a general contour they are the measured
// level lengths L_+(t), L_-(t); since L_+ <= L - 2 pi t and L_- <= L + 2 pi t
// while the jump term omega L |psi_+(0) - psi_-(0)|^2 is unchanged, a
// negative circle quotient can only decrease when transplanted.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "dprime/circle_spectrum.hpp"
#include "dprime/contour.hpp"
#include "dprime/distance_profiles.hpp"
#include "dprime/errors.hpp"
#include "dprime/quadrature.hpp"
#include "dprime/special_functions.hpp"

namespace dprime {

struct RadialProfile {
    double R;  ///< inner profile lives on [0, R], R = L / (2 pi)
    double T;  ///< outer horizon, psi_minus(T) = 0
    std::function<double(double)> psi_plus;
    std::function<double(double)> psi_minus;
    /// Optional analytic derivatives; central differences otherwise.
    std::function<double(double)> dpsi_plus;
    std::function<double(double)> dpsi_minus;

    double d_plus(double t) const { return dpsi_plus ? dpsi_plus(t) : central_difference(psi_plus, t, 0.0, R); }
    double d_minus(double t) const { return dpsi_minus ? dpsi_minus(t) : central_difference(psi_minus, t, 0.0, T); }

private:
    static double central_difference(const std::function<double(double)>& f, double t, double lo, double hi) {
        const double h = 1e-6 * std::max(1.0, hi - lo);
        const double a = std::max(lo, t - h), b = std::min(hi, t + h);
        return (f(b) - f(a)) / (b - a);
    }
};

/// Checks the profile invariants: positive extents and psi_minus(T) = 0.
inline RadialProfile make_profile(double R, double T, std::function<double(double)> psi_plus,
                                  std::function<double(double)> psi_minus,
                                  std::function<double(double)> dpsi_plus = {},
                                  std::function<double(double)> dpsi_minus = {}) {
    detail::require(R > 0.0 && T > 0.0, "make_profile: R and T must be positive");
    detail::require(psi_plus && psi_minus, "make_profile: both profiles are required");
    const double scale = std::max({std::abs(psi_minus(0.0)), std::abs(psi_plus(0.0)), 1.0});
    detail::require(std::abs(psi_minus(T)) <= 1e-12 * scale, "make_profile: psi_minus must vanish at the horizon");
    return RadialProfile{R, T, std::move(psi_plus), std::move(psi_minus), std::move(dpsi_plus), std::move(dpsi_minus)};
}

struct QuotientReport {
    double gradient_inner = 0.0;
    double gradient_outer = 0.0;
    double mass_inner = 0.0;
    double mass_outer = 0.0;
    double numerator_gradient = 0.0;
    double numerator_jump = 0.0;  ///< omega L (psi_+(0) - psi_-(0))^2, no quadrature
    double denominator = 0.0;
    double quotient = 0.0;
};

namespace detail {

inline QuotientReport finish_report(QuotientReport r, const RadialProfile& p, double L, double omega) {
    const double jump = p.psi_plus(0.0) - p.psi_minus(0.0);
    r.numerator_gradient = r.gradient_inner + r.gradient_outer;
    r.numerator_jump = omega * L * jump * jump;
    r.denominator = r.mass_inner + r.mass_outer;
    if (!(r.denominator > 0.0)) throw ConvergenceError("quotient: denominator quadrature is not positive");
    r.quotient = (r.numerator_gradient - r.numerator_jump) / r.denominator;
    return r;
}

inline constexpr int kQuotientPanels = 256;
inline constexpr int kQuotientOrder = 16;

} // namespace detail

/// Smallest horizon T with K0(k (R + T)) < 1e-14 K0(k R).
inline double default_profile_horizon(const CircleSolution& sol) {
    const double k = sol.k_star, R = sol.problem.radius;
    const double base = bessel_k_scaled(BesselOrder::zero, k * R);
    double T = 1.0 / k;
    while (bessel_k_scaled(BesselOrder::zero, k * (R + T)) * std::exp(-k * T) >= 1e-14 * base) T *= 1.1;
    return T;
}

/// Ground state of the circle of radius R in distance coordinates, with the
/// outer branch linearly tapered to zero on the last 1% of [0, T].
inline RadialProfile optimal_profile(const CircleSolution& sol, double T) {
    const double k = sol.k_star, R = sol.problem.radius;
    const double base = bessel_k_scaled(BesselOrder::zero, k * R);
    if (!(bessel_k_scaled(BesselOrder::zero, k * (R + T)) * std::exp(-k * T) < 1e-14 * base))
        throw DomainError("optimal_profile: horizon T too short for the exterior tail");
    const double taper_start = 0.99 * T;
    const double taper_width = T - taper_start;

    auto plus = [sol](double t) { return eigenfunction_circle(sol, sol.problem.radius - t, Side::inside); };
    auto dplus = [sol](double t) {
        return -eigenfunction_circle_derivative(sol, sol.problem.radius - t, Side::inside);
    };
    auto taper = [=](double t) { return t <= taper_start ? 1.0 : std::max(0.0, (T - t) / taper_width); };
    auto dtaper = [=](double t) { return (t <= taper_start || t >= T) ? 0.0 : -1.0 / taper_width; };
    auto minus = [sol, taper](double t) {
        return taper(t) * eigenfunction_circle(sol, sol.problem.radius + t, Side::outside);
    };
    auto dminus = [sol, taper, dtaper](double t) {
        const double r = sol.problem.radius + t;
        return dtaper(t) * eigenfunction_circle(sol, r, Side::outside) +
               taper(t) * eigenfunction_circle_derivative(sol, r, Side::outside);
    };
    return make_profile(R, T, plus, minus, dplus, dminus);
}

inline RadialProfile optimal_profile(double R, double omega, double T = 0.0) {
    const CircleSolution sol = solve_k_star(CircleProblem(R, omega));
    return optimal_profile(sol, T > 0.0 ? T : default_profile_horizon(sol));
}

/// Rayleigh quotient of the profile on the circle of length L.
inline QuotientReport circle_quotient(const RadialProfile& p, double L, double omega) {
    detail::require(L > 0.0 && omega > 0.0, "circle_quotient: L and omega must be positive");
    detail::require(std::abs(L - 2.0 * std::numbers::pi * p.R) <= 1e-8 * L,
                    "circle_quotient: profile radius does not match L / (2 pi)");
    const double tau = 2.0 * std::numbers::pi;
    const CompositeRule inner(0.0, p.R, detail::kQuotientPanels, detail::kQuotientOrder);
    const CompositeRule outer(0.0, p.T, detail::kQuotientPanels, detail::kQuotientOrder);
    QuotientReport r;
    r.gradient_inner = inner.integrate([&](double t) { const double d = p.d_plus(t); return d * d * (L - tau * t); });
    r.mass_inner = inner.integrate([&](double t) { const double v = p.psi_plus(t); return v * v * (L - tau * t); });
    r.gradient_outer = outer.integrate([&](double t) { const double d = p.d_minus(t); return d * d * (L + tau * t); });
    r.mass_outer = outer.integrate([&](double t) { const double v = p.psi_minus(t); return v * v * (L + tau * t); });
    return detail::finish_report(r, p, L, omega);
}

/// Rayleigh quotient of the transplanted test function psi_pm(rho_pm(x))
/// on the contour, reduced to one-dimensional integrals against L_pm(t).
inline QuotientReport domain_quotient(const RadialProfile& p, const ParallelCoordinates& inner,
                                      const ParallelCoordinates& outer, double omega) {
    const double L = inner.contour_length();
    detail::require(omega > 0.0, "domain_quotient: omega must be positive");
    detail::require(std::abs(L - 2.0 * std::numbers::pi * p.R) <= 1e-8 * L,
                    "domain_quotient: contour length differs from the profile's L");
    const double inner_extent = std::min(p.R, inner.max_depth());
    QuotientReport r;
    r.gradient_inner = inner.integrate_against_length(
        [&](double t) { const double d = p.d_plus(t); return d * d; }, inner_extent,
        detail::kQuotientPanels, detail::kQuotientOrder);
    r.mass_inner = inner.integrate_against_length(
        [&](double t) { const double v = p.psi_plus(t); return v * v; }, inner_extent,
        detail::kQuotientPanels, detail::kQuotientOrder);
    r.gradient_outer = outer.integrate_against_length(
        [&](double t) { const double d = p.d_minus(t); return d * d; }, p.T,
        detail::kQuotientPanels, detail::kQuotientOrder);
    r.mass_outer = outer.integrate_against_length(
        [&](double t) { const double v = p.psi_minus(t); return v * v; }, p.T,
        detail::kQuotientPanels, detail::kQuotientOrder);
    return detail::finish_report(r, p, L, omega);
}

inline QuotientReport domain_quotient(const RadialProfile& p, const Contour& c, double omega) {
    return domain_quotient(p, ParallelCoordinates(c, ProfileSide::inner), ParallelCoordinates(c, ProfileSide::outer),
                           omega);
}

/// Circle-versus-contour comparison of one profile. The ordering
/// domain <= circle is only implied when the circle quotient is negative.
struct QuotientComparison {
    QuotientReport circle;
    QuotientReport domain;
    bool ordering_applicable;  ///< circle quotient < 0
    bool ordered;              ///< domain <= circle (1e-8 relative slack)
};

inline QuotientComparison compare_quotients(const RadialProfile& p, const Contour& c, double omega) {
    QuotientComparison out{circle_quotient(p, c.length(), omega), domain_quotient(p, c, omega), false, false};
    out.ordering_applicable = out.circle.quotient < 0.0;
    out.ordered = out.domain.quotient <= out.circle.quotient + 1e-8 * std::abs(out.circle.quotient);
    return out;
}

struct TheoremCertificate {
    double length;
    double omega;
    double lambda1_circle;  ///< exact circle eigenvalue for radius L / (2 pi)
    double circle_bound;    ///< circle quotient of the optimal profile
    double domain_bound;    ///< transplanted quotient on the contour, >= lambda1 of the contour
    double margin;          ///< lambda1_circle - domain_bound
    double in_radius;
    double horizon;
    CircleSolution circle;
    QuotientReport circle_report;
    QuotientReport domain_report;
};

/// lambda1(contour) <= domain_bound <= lambda1(circle of equal length).
inline TheoremCertificate theorem_certificate(const Contour& c, double omega) {
    const double L = c.length();
    const double R = L / (2.0 * std::numbers::pi);
    const CircleSolution sol = solve_k_star(CircleProblem(R, omega));
    const double T = default_profile_horizon(sol);
    const RadialProfile p = optimal_profile(sol, T);
    const ParallelCoordinates inner(c, ProfileSide::inner), outer(c, ProfileSide::outer);
    const QuotientReport cq = circle_quotient(p, L, omega);
    const QuotientReport dq = domain_quotient(p, inner, outer, omega);
    return TheoremCertificate{L, omega, sol.lambda1, cq.quotient, dq.quotient, sol.lambda1 - dq.quotient,
                              inner.max_depth(), T, sol, cq, dq};
}

} // namespace dprime
