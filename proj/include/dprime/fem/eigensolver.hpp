#pragma once

// Lowest eigenpair of the symmetric pencil (K, M) by shifted inverse
// iteration. A shift sigma is usable only when K - sigma M is positive
// definite, which the LDL^T pivots certify (Sylvester inertia); the same
// pivots count eigenvalues below any trial value.

#include <cmath>
#include <memory>
#include <string>

#include <Eigen/SparseCholesky>

#include "dprime/circle_spectrum.hpp"
#include "dprime/errors.hpp"
#include "dprime/fem/assembly.hpp"

namespace dprime::fem {

struct EigenResult {
    double lambda1 = 0.0;
    Vector coeffs;               ///< M-normalized; sign is arbitrary
    double residual = 0.0;       ///< ||K x - lambda M x|| / ||M x||
    double shift = 0.0;          ///< last shift used
    int iterations = 0;
    int factorizations = 0;
    int eigenvalues_below = -1;  ///< inertia count at lambda1 (1 + 1e-8)
};

class ShiftedFactorization {
public:
    ShiftedFactorization(const DiscreteForm& form, double sigma) : sigma_(sigma) {
        const SparseMatrix A = form.stiffness - sigma * form.mass;
        ldlt_.compute(A);
        if (ldlt_.info() != Eigen::Success) {
            ok_ = false;
            return;
        }
        const Vector& d = ldlt_.vectorD();
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (d[i] < 0.0) ++negative_;
    }

    bool factorized() const { return ok_; }
    /// Number of eigenvalues of the pencil strictly below sigma.
    int negative_pivots() const { return negative_; }
    bool positive_definite() const { return ok_ && negative_ == 0; }
    double sigma() const { return sigma_; }
    Vector solve(const Vector& b) const { return ldlt_.solve(b); }

private:
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    double sigma_;
    bool ok_ = true;
    int negative_ = 0;
};

/// Number of eigenvalues of (K, M) below `value`.
inline int count_eigenvalues_below(const DiscreteForm& form, double value) {
    ShiftedFactorization f(form, value);
    if (!f.factorized()) throw IndefiniteShiftError("count_eigenvalues_below: singular factorization");
    return f.negative_pivots();
}

/// Initial shift: 1.5 times -(k_upper)^2 with k_upper = omega / F(2 omega R),
/// R the radius of the circle with the same interface length.
inline double default_shift(const DiscreteForm& form) {
    const double R = form.interface_length / (2.0 * std::numbers::pi);
    const double k_upper = form.omega / profile_F(2.0 * form.omega * R);
    return -1.5 * k_upper * k_upper;
}

inline EigenResult lowest_eigenpair(const DiscreteForm& form, double tol, double initial_shift = 0.0,
                                    int max_iterations = 2000) {
    detail::require(tol > 0.0, "lowest_eigenpair: tolerance must be positive");
    EigenResult out;
    double sigma = initial_shift < 0.0 ? initial_shift : default_shift(form);

    auto factor = [&](double s) {
        ++out.factorizations;
        return std::make_unique<ShiftedFactorization>(form, s);
    };
    auto fac = factor(sigma);
    for (int retry = 0; !fac->positive_definite(); ++retry) {
        if (retry >= 20) throw IndefiniteShiftError("lowest_eigenpair: no positive definite shift found");
        sigma *= 2.0;
        fac = factor(sigma);
    }

    const SparseMatrix& K = form.stiffness;
    const SparseMatrix& M = form.mass;
    // The ground state is positive inside. A constant start would not do: with
    // a natural outer boundary constants are exact null vectors, M-orthogonal
    // to every eigenvector with nonzero eigenvalue.
    Vector x = form.interior_indicator;
    if (x.size() != form.size() || x.squaredNorm() == 0.0) x = Vector::Ones(form.size());
    x /= std::sqrt(x.dot(M * x));
    double lambda = x.dot(K * x);
    double resid = 1e300;
    bool reshifted_at[3] = {false, false, false};
    const double reshift_trigger[3] = {1e-2, 1e-4, 1e-6};
    const double reshift_gap[3] = {0.05, 0.01, 0.002};

    for (int it = 1; it <= max_iterations; ++it) {
        Vector y = fac->solve(M * x);
        x = y / std::sqrt(y.dot(M * y));
        const Vector Kx = K * x;
        const Vector Mx = M * x;
        lambda = x.dot(Kx);
        resid = (Kx - lambda * Mx).norm() / Mx.norm();
        out.iterations = it;
        if (resid <= tol) break;
        // Move the shift toward lambda while the pencil stays definite; the
        // Rayleigh quotient is an upper bound, so lambda - gap |lambda| is
        // tried and kept only if the pivots certify it below lambda1.
        for (int stage = 0; stage < 3; ++stage) {
            if (reshifted_at[stage] || resid > reshift_trigger[stage] * std::abs(lambda)) continue;
            reshifted_at[stage] = true;
            auto trial = factor(lambda - reshift_gap[stage] * std::abs(lambda));
            if (trial->positive_definite()) fac = std::move(trial);
        }
    }
    if (!(resid <= tol))
        throw ConvergenceError("lowest_eigenpair: residual " + std::to_string(resid) + " above tolerance");

    out.lambda1 = lambda;
    out.coeffs = x;
    out.residual = resid;
    out.shift = fac->sigma();
    out.eigenvalues_below = count_eigenvalues_below(form, lambda + 1e-8 * std::abs(lambda));
    ++out.factorizations;
    if (out.eigenvalues_below != 1)
        throw ConvergenceError("lowest_eigenpair: converged eigenvalue is not the lowest (inertia " +
                               std::to_string(out.eigenvalues_below) + ")");
    return out;
}

/// Discrete Rayleigh quotient x^T K x / x^T M x.
inline double rayleigh_quotient(const DiscreteForm& form, const Vector& x) {
    return x.dot(form.stiffness * x) / x.dot(form.mass * x);
}

} // namespace dprime::fem
