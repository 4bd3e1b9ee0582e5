#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "dprime/errors.hpp"

namespace dprime {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendreRule(int n) : nodes(n), weights(n) {
        detail::require(n >= 1, "GaussLegendreRule: need at least one node");
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
    }
};

/// Flattened composite Gauss-Legendre rule over [a, b]: `panels` equal panels,
/// `order` nodes each.
struct CompositeRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    CompositeRule() = default;

    CompositeRule(double a, double b, int panels, int order = 16) {
        const GaussLegendreRule base(order);
        nodes.reserve(static_cast<std::size_t>(panels) * order);
        weights.reserve(nodes.capacity());
        const double width = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = a + (p + 0.5) * width;
            for (int i = 0; i < order; ++i) {
                nodes.push_back(mid + 0.5 * width * base.nodes[i]);
                weights.push_back(0.5 * width * base.weights[i]);
            }
        }
    }

    template <class F>
    double integrate(F&& f) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
        return sum;
    }
};

template <class F>
double integrate_composite(F&& f, double a, double b, int panels, int order = 16) {
    return CompositeRule(a, b, panels, order).integrate(std::forward<F>(f));
}

} // namespace dprime
