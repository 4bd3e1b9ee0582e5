#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "dprime/contour.hpp"
#include "dprime/fem/assembly.hpp"
#include "dprime/fem/eigensolver.hpp"
#include "dprime/fem/mesh.hpp"
#include "dprime/parallel_bound.hpp"

namespace dprime::fem {

struct FemOptions {
    double tol = 1e-8;
    OuterBoundary outer = OuterBoundary::dirichlet;
    MeshOptions mesh;
};

struct FemResult {
    double lambda1 = 0.0;
    double residual = 0.0;
    int iterations = 0;
    int eigenvalues_below = 0;
    std::size_t node_count = 0;
    std::size_t triangle_count = 0;
    std::size_t interface_pairs = 0;
    std::size_t dofs = 0;
    double min_angle = 0.0;
    double h = 0.0;
    double r_out = 0.0;
    InterfaceMesh mesh;
    std::vector<double> eigenvector;  ///< per node; interior side positive
};

inline FemResult solve_lambda1(const Contour& c, double omega, double h, double r_out,
                               const FemOptions& opt = {}) {
    FemResult out;
    out.mesh = build_mesh(c, h, r_out, opt.mesh);
    const DiscreteForm form = assemble(out.mesh, omega, opt.outer);
    const EigenResult eig = lowest_eigenpair(form, opt.tol);
    out.lambda1 = eig.lambda1;
    out.residual = eig.residual;
    out.iterations = eig.iterations;
    out.eigenvalues_below = eig.eigenvalues_below;
    out.node_count = out.mesh.nodes.size();
    out.triangle_count = out.mesh.triangles.size();
    out.interface_pairs = out.mesh.interface_pairs.size();
    out.dofs = static_cast<std::size_t>(form.size());
    out.min_angle = out.mesh.min_angle_degrees();
    out.h = h;
    out.r_out = r_out;
    out.eigenvector = form.to_nodes(eig.coeffs);
    double inner_trace = 0.0;
    for (const auto& p : out.mesh.interface_pairs) inner_trace += out.eigenvector[p[0]];
    if (inner_trace < 0.0)
        for (double& v : out.eigenvector) v = -v;
    return out;
}

/// Eigenpair CSV: node,x,y,side,value with side in {inner, outer, interface_inner, interface_outer}.
inline void write_eigenpair_csv(std::ostream& os, const FemResult& r) {
    std::vector<int> tag(r.mesh.nodes.size(), -1);
    for (std::size_t t = 0; t < r.mesh.triangles.size(); ++t)
        for (int v : r.mesh.triangles[t]) tag[v] = static_cast<int>(r.mesh.region[t]);
    for (const auto& p : r.mesh.interface_pairs) tag[p[0]] = 2, tag[p[1]] = 3;
    static const char* names[] = {"inner", "outer", "interface_inner", "interface_outer"};
    os.precision(17);
    os << "node,x,y,side,value\n";
    for (std::size_t i = 0; i < r.mesh.nodes.size(); ++i)
        os << i << ',' << r.mesh.nodes[i].x << ',' << r.mesh.nodes[i].y << ','
           << (tag[i] >= 0 ? names[tag[i]] : "outer") << ',' << r.eigenvector[i] << '\n';
}

/// Jump u_+ - u_- at every interface vertex.
inline std::vector<double> interface_jump(const FemResult& r) {
    std::vector<double> out;
    out.reserve(r.mesh.interface_pairs.size());
    for (const auto& p : r.mesh.interface_pairs) out.push_back(r.eigenvector[p[0]] - r.eigenvector[p[1]]);
    return out;
}

/// Ratio of the largest |Fourier coefficient| of mode >= 1 to mode 0 for the
/// eigenvector sampled on a circle of radius r around the mesh centre.
inline double angular_nonradial_ratio(const FemResult& r, double radius, int samples = 256, int max_mode = 16) {
    // Piecewise-linear interpolation through a triangle search.
    const auto& mesh = r.mesh;
    auto value_at = [&](Vec2 p) {
        for (const auto& t : mesh.triangles) {
            const Vec2 a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], c = mesh.nodes[t[2]];
            const double area = cross(b - a, c - a);
            const double l1 = cross(c - b, p - b) / area;
            const double l2 = cross(a - c, p - c) / area;
            const double l3 = 1.0 - l1 - l2;
            if (l1 >= -1e-12 && l2 >= -1e-12 && l3 >= -1e-12)
                return l1 * r.eigenvector[t[0]] + l2 * r.eigenvector[t[1]] + l3 * r.eigenvector[t[2]];
        }
        throw DomainError("angular_nonradial_ratio: sample outside the mesh");
    };
    std::vector<double> vals(samples);
    for (int i = 0; i < samples; ++i) {
        const double th = 2.0 * std::numbers::pi * i / samples;
        vals[i] = value_at(mesh.center + Vec2{radius * std::cos(th), radius * std::sin(th)});
    }
    double mode0 = 0.0;
    for (double v : vals) mode0 += v;
    mode0 = std::abs(mode0) / samples;
    double worst = 0.0;
    for (int m = 1; m <= max_mode; ++m) {
        std::complex<double> acc = 0.0;
        for (int i = 0; i < samples; ++i) acc += vals[i] * std::polar(1.0, -2.0 * std::numbers::pi * m * i / samples);
        worst = std::max(worst, 2.0 * std::abs(acc) / samples);
    }
    return worst / mode0;
}

/// Node field of the transplanted profile: psi_+(rho_+) inside,
/// psi_-(rho_-) outside, zero beyond the profile horizon.
inline std::vector<double> transplant_profile(const InterfaceMesh& mesh, const Contour& c, const RadialProfile& p) {
    std::vector<int> side(mesh.nodes.size(), -1);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        for (int v : mesh.triangles[t]) side[v] = static_cast<int>(mesh.region[t]);
    std::vector<double> u(mesh.nodes.size(), 0.0);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const double d = signed_distance(c, mesh.nodes[i]);
        if (side[i] == static_cast<int>(Region::inner)) {
            u[i] = p.psi_plus(std::clamp(d, 0.0, p.R));
        } else {
            const double t = std::max(0.0, -d);
            u[i] = t < p.T ? p.psi_minus(t) : 0.0;
        }
    }
    for (const auto& pr : mesh.interface_pairs) {
        u[pr[0]] = p.psi_plus(0.0);
        u[pr[1]] = p.psi_minus(0.0);
    }
    return u;
}

struct ConvergenceRow {
    double h;
    double r_out;
    double lambda1;
    std::optional<double> error;           ///< |lambda1 - reference|
    std::optional<double> observed_order;  ///< against the previous h at the same r_out
    std::size_t nodes;
};

/// lambda1 over every (r_out, h) pair; h_list must be strictly decreasing.
inline std::vector<ConvergenceRow> convergence_study(const Contour& c, double omega, const std::vector<double>& h_list,
                                                     const std::vector<double>& r_out_list,
                                                     std::optional<double> reference = std::nullopt,
                                                     const FemOptions& opt = {}) {
    for (std::size_t i = 1; i < h_list.size(); ++i)
        detail::require(h_list[i] < h_list[i - 1], "convergence_study: h_list must be decreasing");
    std::vector<ConvergenceRow> rows;
    for (double r_out : r_out_list) {
        std::optional<double> prev_err;
        double prev_h = 0.0;
        for (double h : h_list) {
            const FemResult r = solve_lambda1(c, omega, h, r_out, opt);
            ConvergenceRow row{h, r_out, r.lambda1, std::nullopt, std::nullopt, r.node_count};
            if (reference) {
                row.error = std::abs(r.lambda1 - *reference);
                if (prev_err && *row.error > 0.0)
                    row.observed_order = std::log(*prev_err / *row.error) / std::log(prev_h / h);
                prev_err = row.error;
            }
            prev_h = h;
            rows.push_back(row);
        }
    }
    return rows;
}

/// Richardson estimate from two solves at h and h/2 with order 2.
struct RichardsonEstimate {
    double coarse;
    double fine;
    double extrapolated;
    double error_estimate;  ///< |coarse - fine| / 3, the estimated error of `fine`
};

inline RichardsonEstimate richardson(double coarse, double fine) {
    return {coarse, fine, fine - (coarse - fine) / 3.0, std::abs(coarse - fine) / 3.0};
}

} // namespace dprime::fem
