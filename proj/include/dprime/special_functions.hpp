#pragma once

// Modified Bessel functions I0, I1, K0, K1 for real positive argument.
//
// Branches:
//   I_n : power series for x <= 20, Hankel asymptotic expansion above.
//   K_n : logarithmic power series for x <= 2, trapezoidal rule on
//         e^x K_n(x) = int_0^inf exp(-x (cosh t - 1)) cosh(n t) dt for
//         2 < x <= 25, Hankel asymptotic expansion above.
//
// The asymptotic expansions carry an intrinsic relative error of order
// e^{-2x}, which is why neither is used below x = 20.

#include <cmath>
#include <numbers>
#include <string>

#include "dprime/errors.hpp"

namespace dprime {

enum class BesselOrder : int { zero = 0, one = 1 };

constexpr int as_int(BesselOrder n) { return static_cast<int>(n); }

namespace bessel_detail {

inline constexpr double kISeriesMax = 20.0;
inline constexpr double kKSeriesMax = 2.0;
inline constexpr double kKIntegralMax = 25.0;
inline constexpr double kIOverflow = 700.0;
inline constexpr double kEulerGamma = std::numbers::egamma;

/// sum_m (x/2)^{2m+n} / (m! (m+n)!)
inline double i_series(int n, double x) {
    const double q = 0.25 * x * x;
    double term = (n == 0) ? 1.0 : 0.5 * x;
    double sum = term;
    for (int m = 1; m < 2000; ++m) {
        term *= q / (static_cast<double>(m) * static_cast<double>(m + n));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

/// Hankel expansion of sqrt(2 pi x) e^{-x} I_n(x) (sign = -1) or
/// sqrt(2x/pi) e^{x} K_n(x) (sign = +1).
inline double hankel_sum(int n, double x, double sign) {
    const double mu = 4.0 * n * n;
    double term = 1.0;
    double sum = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= sign * (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(term) > std::abs(prev)) break;  // divergent tail
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        prev = term;
    }
    return sum;
}

inline double i_scaled_asymptotic(int n, double x) {
    return hankel_sum(n, x, -1.0) / std::sqrt(2.0 * std::numbers::pi * x);
}

inline double k_scaled_asymptotic(int n, double x) {
    return hankel_sum(n, x, 1.0) * std::sqrt(std::numbers::pi / (2.0 * x));
}

/// e^x K_n(x) by the trapezoidal rule; the integrand is entire in t and
/// decays doubly exponentially, so the rule converges geometrically.
inline double k_scaled_integral(int n, double x) {
    constexpr double h = 0.05;
    double sum = 0.5;  // t = 0 contributes cosh(0) = 1 with half weight
    for (int j = 1; j < 4000; ++j) {
        const double t = j * h;
        const double exponent = x * (std::cosh(t) - 1.0);
        const double f = std::exp(-exponent) * std::cosh(n * t);
        sum += f;
        if (exponent > 50.0 && f < 1e-18 * sum) break;
    }
    return h * sum;
}

inline double k0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double harmonic = 0.0;
    double tail = 0.0;
    for (int m = 1; m < 200; ++m) {
        term *= q / (static_cast<double>(m) * m);
        harmonic += 1.0 / m;
        const double c = term * harmonic;
        tail += c;
        if (c < 1e-17 * std::abs(tail)) break;
    }
    return -(std::log(0.5 * x) + kEulerGamma) * i_series(0, x) + tail;
}

inline double k1_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;       // q^k / (k! (k+1)!)
    double h_k = 0.0;        // H_k
    double sum = 2.0 * (-kEulerGamma) + 1.0;  // psi(1) + psi(2) at k = 0
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * (k + 1));
        h_k += 1.0 / k;
        const double psi_sum = 2.0 * (-kEulerGamma) + 2.0 * h_k + 1.0 / (k + 1);
        const double c = term * psi_sum;
        sum += c;
        if (std::abs(c) < 1e-17 * std::abs(sum)) break;
    }
    return 1.0 / x + std::log(0.5 * x) * i_series(1, x) - 0.25 * x * sum;
}

} // namespace bessel_detail

/// e^{-x} I_n(x), finite for every x >= 0.
inline double bessel_i_scaled(BesselOrder order, double x) {
    using namespace bessel_detail;
    detail::require(x >= 0.0, "bessel_i: argument must be nonnegative");
    const int n = as_int(order);
    if (x <= kISeriesMax) return std::exp(-x) * i_series(n, x);
    return i_scaled_asymptotic(n, x);
}

/// e^{x} K_n(x), finite for every x > 0.
inline double bessel_k_scaled(BesselOrder order, double x) {
    using namespace bessel_detail;
    detail::require(x > 0.0, "bessel_k: argument must be positive");
    const int n = as_int(order);
    if (x <= kKSeriesMax) return std::exp(x) * (n == 0 ? k0_series(x) : k1_series(x));
    if (x <= kKIntegralMax) return k_scaled_integral(n, x);
    return k_scaled_asymptotic(n, x);
}

inline double bessel_i(BesselOrder order, double x) {
    using namespace bessel_detail;
    detail::require(x >= 0.0, "bessel_i: argument must be nonnegative");
    if (x > kIOverflow) throw OverflowError("bessel_i: argument exceeds 700");
    if (x <= kISeriesMax) return i_series(as_int(order), x);
    return std::exp(x) * i_scaled_asymptotic(as_int(order), x);
}

inline double bessel_k(BesselOrder order, double x) {
    using namespace bessel_detail;
    detail::require(x > 0.0, "bessel_k: argument must be positive");
    const int n = as_int(order);
    if (x <= kKSeriesMax) return n == 0 ? k0_series(x) : k1_series(x);
    return std::exp(-x) * bessel_k_scaled(order, x);
}

/// K1(x) I0(x) + I1(x) K0(x) - 1/x. Vanishes identically; the magnitude
/// measures the internal consistency of the four evaluations.
inline double wronskian_defect(double x) {
    detail::require(x > 0.0, "wronskian_defect: argument must be positive");
    const double i0 = bessel_i_scaled(BesselOrder::zero, x);
    const double i1 = bessel_i_scaled(BesselOrder::one, x);
    const double k0 = bessel_k_scaled(BesselOrder::zero, x);
    const double k1 = bessel_k_scaled(BesselOrder::one, x);
    return k1 * i0 + i1 * k0 - 1.0 / x;
}

/// I_n(x) K_m(x) without overflow at large x.
inline double bessel_ik_product(BesselOrder i_order, BesselOrder k_order, double x) {
    return bessel_i_scaled(i_order, x) * bessel_k_scaled(k_order, x);
}

} // namespace dprime
