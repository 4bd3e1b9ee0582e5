#pragma once

// Ground state of the delta-prime interaction supported on a circle of
// radius R with coupling omega > 0.
//
// The radial eigenfunction is
//     psi(r) =  K1(kR) I0(kr)   for r < R,
//     psi(r) = -I1(kR) K0(kr)   for r > R,
// and lambda1 = -k^2 where k is the unique positive root of
//     G(k) := k^2 R I1(kR) K1(kR) = omega.
// G is strictly increasing, which makes the root bracketed by
// 2 omega < k < omega / F(2 omega R),  F(x) := x K1(x) I1(x).

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dprime/errors.hpp"
#include "dprime/quadrature.hpp"
#include "dprime/special_functions.hpp"

namespace dprime {

struct CircleProblem {
    double radius;
    double omega;

    CircleProblem(double radius_, double omega_) : radius(radius_), omega(omega_) {
        detail::require(radius > 0.0 && std::isfinite(radius), "CircleProblem: radius must be positive");
        detail::require(omega > 0.0 && std::isfinite(omega), "CircleProblem: omega must be positive");
    }

    double length() const { return 2.0 * std::numbers::pi * radius; }
};

struct CircleSolution {
    CircleProblem problem;
    double k_star;
    double lambda1;        ///< -k_star^2
    double coeff_inside;   ///< K1(k R); underflows to 0 for very large kR
    double coeff_outside;  ///< -I1(k R); +-inf for very large kR
    double residual;       ///< G(k_star) - omega
    int iterations;
};

enum class Side { inside, outside };

/// F(x) = x K1(x) I1(x); increasing from 0 to 1/2.
inline double profile_F(double x) {
    detail::require(x > 0.0, "profile_F: argument must be positive");
    return x * bessel_ik_product(BesselOrder::one, BesselOrder::one, x);
}

/// G(k) - omega = k^2 R I1(kR) K1(kR) - omega.
inline double secular_residual(double k, const CircleProblem& prob) {
    detail::require(k > 0.0, "secular_residual: k must be positive");
    return k * profile_F(k * prob.radius) - prob.omega;
}

/// Lower and upper bound for k_star. The upper bound is the analytic one
/// unless it pushes Bessel arguments beyond 700, in which case it is found
/// by doubling from 2 omega.
inline std::pair<double, double> k_star_bracket(const CircleProblem& prob) {
    const double lo = 2.0 * prob.omega;
    const double analytic_hi = prob.omega / profile_F(2.0 * prob.omega * prob.radius);
    if (std::isfinite(analytic_hi) && analytic_hi * prob.radius <= 700.0) return {lo, analytic_hi};
    double hi = 2.0 * lo;
    for (int i = 0; i < 200 && secular_residual(hi, prob) <= 0.0; ++i) hi *= 2.0;
    return {lo, hi};
}

/// Bisection to a bracket of relative width 1e-8, then Newton with a
/// central-difference derivative of G.
inline CircleSolution solve_k_star(const CircleProblem& prob, double tol = 1e-12) {
    detail::require(tol > 0.0, "solve_k_star: tolerance must be positive");
    auto [lo, hi] = k_star_bracket(prob);
    if (secular_residual(lo, prob) >= 0.0 || secular_residual(hi, prob) <= 0.0)
        throw ConvergenceError("solve_k_star: secular function does not change sign on bracket");

    int iterations = 0;
    while (hi - lo > 1e-8 * hi && iterations < 200) {
        const double mid = 0.5 * (lo + hi);
        (secular_residual(mid, prob) < 0.0 ? lo : hi) = mid;
        ++iterations;
    }

    double k = 0.5 * (lo + hi);
    double res = secular_residual(k, prob);
    for (int newton = 0; newton < 50 && std::abs(res) > tol; ++newton, ++iterations) {
        const double dk = 1e-6 * k;
        const double slope =
            (secular_residual(k + dk, prob) - secular_residual(k - dk, prob)) / (2.0 * dk);
        double next = k - res / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double next_res = secular_residual(next, prob);
        (next_res < 0.0 ? lo : hi) = next;
        if (next == k) break;
        k = next;
        res = next_res;
    }
    if (!(std::abs(res) <= tol))
        throw ConvergenceError("solve_k_star: residual " + std::to_string(res) +
                               " above tolerance; Bessel accuracy exhausted");

    const double x = k * prob.radius;
    const double k1 = x > 700.0 ? 0.0 : bessel_k(BesselOrder::one, x);
    const double i1 = x > 700.0 ? std::numeric_limits<double>::infinity() : bessel_i(BesselOrder::one, x);
    return CircleSolution{prob, k, -k * k, k1, -i1, res, iterations};
}

/// dk_star/dR from implicit differentiation of k F(kR) = omega:
///   k' = -k^2 F'(kR) / (F(kR) + k R F'(kR)) < 0.
inline double k_star_radius_derivative(const CircleSolution& sol) {
    const double R = sol.problem.radius;
    const double x = sol.k_star * R;
    const double dx = 1e-6 * x;
    const double dF = (profile_F(x + dx) - profile_F(x - dx)) / (2.0 * dx);
    return -sol.k_star * sol.k_star * dF / (profile_F(x) + x * dF);
}

/// Value of the unnormalized ground state at radius r on the given side of
/// the circle. The function jumps at r = R, so the side is explicit.
inline double eigenfunction_circle(const CircleSolution& sol, double r, Side side) {
    const double R = sol.problem.radius;
    const double k = sol.k_star;
    detail::require(r >= 0.0, "eigenfunction_circle: radius must be nonnegative");
    if (side == Side::inside) {
        detail::require(r <= R, "eigenfunction_circle: inside branch needs r <= R");
        return bessel_k_scaled(BesselOrder::one, k * R) * bessel_i_scaled(BesselOrder::zero, k * r) *
               std::exp(k * (r - R));
    }
    detail::require(r >= R, "eigenfunction_circle: outside branch needs r >= R");
    return -bessel_i_scaled(BesselOrder::one, k * R) * bessel_k_scaled(BesselOrder::zero, k * r) *
           std::exp(k * (R - r));
}

/// Side deduced from r; r = R is rejected because only one-sided traces exist there.
inline double eigenfunction_circle(const CircleSolution& sol, double r) {
    if (r == sol.problem.radius)
        throw DomainError("eigenfunction_circle: value at r = R is two-valued, pass a Side");
    return eigenfunction_circle(sol, r, r < sol.problem.radius ? Side::inside : Side::outside);
}

/// psi'(r): k K1(kR) I1(kr) inside, k I1(kR) K1(kr) outside.
inline double eigenfunction_circle_derivative(const CircleSolution& sol, double r, Side side) {
    const double R = sol.problem.radius;
    const double k = sol.k_star;
    if (side == Side::inside) {
        detail::require(r >= 0.0 && r <= R, "eigenfunction_circle_derivative: inside branch needs 0 <= r <= R");
        return k * bessel_k_scaled(BesselOrder::one, k * R) * bessel_i_scaled(BesselOrder::one, k * r) *
               std::exp(k * (r - R));
    }
    detail::require(r >= R, "eigenfunction_circle_derivative: outside branch needs r >= R");
    return k * bessel_i_scaled(BesselOrder::one, k * R) * bessel_k_scaled(BesselOrder::one, k * r) *
           std::exp(k * (R - r));
}

struct TransmissionDefect {
    double derivative_mismatch;  ///< |psi'(R-) - psi'(R+)|
    double jump_condition;       ///< |psi'(R-) - omega (psi(R-) - psi(R+))|
    double scale;                ///< |psi'(R-)|
};

/// Transmission defects of the closed-form profile built with decay rate k.
/// At k = k_star both vanish; elsewhere the jump condition fails.
inline TransmissionDefect transmission_defect(const CircleProblem& prob, double k) {
    detail::require(k > 0.0, "transmission_defect: k must be positive");
    const double x = k * prob.radius;
    const double i0 = bessel_i_scaled(BesselOrder::zero, x);
    const double i1 = bessel_i_scaled(BesselOrder::one, x);
    const double k0 = bessel_k_scaled(BesselOrder::zero, x);
    const double k1 = bessel_k_scaled(BesselOrder::one, x);
    const double d_in = k * k1 * i1;
    const double d_out = k * i1 * k1;
    const double jump = k1 * i0 + i1 * k0;
    return {std::abs(d_in - d_out), std::abs(d_in - prob.omega * jump), std::abs(d_in)};
}

inline TransmissionDefect transmission_defect(const CircleSolution& sol) {
    return transmission_defect(sol.problem, sol.k_star);
}

/// Rayleigh quotient of the disk indicator: -2 omega / R >= lambda1.
inline double disk_indicator_bound(const CircleProblem& prob) {
    return -2.0 * prob.omega / prob.radius;
}

/// L2(R^2) norm of the unnormalized ground state.
inline double eigenfunction_l2_norm(const CircleSolution& sol) {
    const double R = sol.problem.radius;
    const double tail = 40.0 / sol.k_star;
    const double inside = integrate_composite(
        [&](double r) { const double v = eigenfunction_circle(sol, r, Side::inside); return v * v * r; },
        0.0, R, 64);
    const double outside = integrate_composite(
        [&](double r) { const double v = eigenfunction_circle(sol, r, Side::outside); return v * v * r; },
        R, R + tail, 256);
    return std::sqrt(2.0 * std::numbers::pi * (inside + outside));
}

/// L2-normalized ground state.
inline double eigenfunction_circle_normalized(const CircleSolution& sol, double r, Side side) {
    return eigenfunction_circle(sol, r, side) / eigenfunction_l2_norm(sol);
}

/// Solves every radius of an ascending list; output order matches input order.
inline std::vector<CircleSolution> sweep_radius(double omega, const std::vector<double>& radii,
                                                double tol = 1e-12) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
        detail::require(radii[i] > 0.0, "sweep_radius: radii must be positive");
        if (i > 0) detail::require(radii[i] > radii[i - 1], "sweep_radius: radii must be strictly ascending");
    }
    std::vector<CircleSolution> out;
    out.reserve(radii.size());
    for (double R : radii) out.push_back(solve_k_star(CircleProblem(R, omega), tol));
    return out;
}

} // namespace dprime
