#pragma once

// P1 discretization of the form
//     h[u] = sum over both sides of int |grad u|^2  -  omega int_Sigma (u_+ - u_-)^2
// on an InterfaceMesh. The duplicated interface vertices make the discrete
// space a subspace of H^1(Omega_+) + H^1(Omega_-); the transmission
// condition is natural and never imposed.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>

#include "dprime/errors.hpp"
#include "dprime/fem/mesh.hpp"

namespace dprime::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

enum class OuterBoundary { dirichlet, natural };

struct DiscreteForm {
    SparseMatrix grad_part;  ///< positive semidefinite
    SparseMatrix jump_term;  ///< negative semidefinite, supported on interface pairs
    SparseMatrix stiffness;  ///< grad_part + jump_term
    SparseMatrix mass;
    std::vector<int> dof_of_node;  ///< -1 for eliminated (Dirichlet) nodes
    std::vector<int> node_of_dof;
    Vector interior_indicator;     ///< 1 on dofs of interior elements, else 0
    double omega = 0.0;
    double interface_length = 0.0;
    OuterBoundary outer = OuterBoundary::dirichlet;

    Eigen::Index size() const { return static_cast<Eigen::Index>(node_of_dof.size()); }

    /// Node field (zeros at eliminated nodes) from a dof vector.
    std::vector<double> to_nodes(const Vector& x) const {
        std::vector<double> out(dof_of_node.size(), 0.0);
        for (std::size_t i = 0; i < node_of_dof.size(); ++i) out[node_of_dof[i]] = x[static_cast<Eigen::Index>(i)];
        return out;
    }

    /// Dof vector from a node field; values at eliminated nodes are dropped.
    Vector from_nodes(const std::vector<double>& values) const {
        Vector x(size());
        for (std::size_t i = 0; i < node_of_dof.size(); ++i) x[static_cast<Eigen::Index>(i)] = values[node_of_dof[i]];
        return x;
    }
};

namespace assembly_detail {

struct LocalP1 {
    std::array<std::array<double, 3>, 3> stiffness;
    std::array<std::array<double, 3>, 3> mass;
};

inline LocalP1 local_p1(Vec2 a, Vec2 b, Vec2 c) {
    const double area = 0.5 * cross(b - a, c - a);
    // grad of barycentric lambda_k = perp(edge opposite k) / (2 area)
    const std::array<Vec2, 3> e{c - b, a - c, b - a};
    LocalP1 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            out.stiffness[i][j] = dot(e[i], e[j]) / (4.0 * area);
            out.mass[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
        }
    return out;
}

} // namespace assembly_detail

inline DiscreteForm assemble(const InterfaceMesh& mesh, double omega,
                             OuterBoundary outer = OuterBoundary::dirichlet) {
    detail::require(omega > 0.0, "assemble: omega must be positive");
    DiscreteForm form;
    form.omega = omega;
    form.outer = outer;
    form.interface_length = mesh.interface_length();

    const std::size_t n = mesh.nodes.size();
    form.dof_of_node.assign(n, 0);
    if (outer == OuterBoundary::dirichlet)
        for (int b : mesh.outer_boundary_nodes) form.dof_of_node[b] = -1;
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (form.dof_of_node[i] < 0) continue;
        form.dof_of_node[i] = next++;
        form.node_of_dof.push_back(static_cast<int>(i));
    }

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> kt, mt, jt;
    kt.reserve(9 * mesh.triangles.size());
    mt.reserve(9 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const auto loc = assembly_detail::local_p1(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
        for (int i = 0; i < 3; ++i) {
            const int di = form.dof_of_node[t[i]];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = form.dof_of_node[t[j]];
                if (dj < 0) continue;
                kt.emplace_back(di, dj, loc.stiffness[i][j]);
                mt.emplace_back(di, dj, loc.mass[i][j]);
            }
        }
    }

    // Jump term per interface edge: the jump j = u_+ - u_- is linear along
    // the edge, int j^2 = len/6 (2 ja^2 + 2 jb^2 + 2 ja jb).
    const std::size_t np = mesh.interface_pairs.size();
    for (std::size_t e = 0; e < np; ++e) {
        const auto& pa = mesh.interface_pairs[e];
        const auto& pb = mesh.interface_pairs[(e + 1) % np];
        const double len = norm(mesh.nodes[pb[0]] - mesh.nodes[pa[0]]);
        const std::array<int, 4> dofs{form.dof_of_node[pa[0]], form.dof_of_node[pa[1]], form.dof_of_node[pb[0]],
                                      form.dof_of_node[pb[1]]};
        // jumps: ja = x0 - x1, jb = x2 - x3
        const std::array<std::array<double, 2>, 4> P{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};
        const double edge_mass[2][2] = {{len / 3.0, len / 6.0}, {len / 6.0, len / 3.0}};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double v = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) v += P[i][a] * edge_mass[a][b] * P[j][b];
                if (dofs[i] >= 0 && dofs[j] >= 0) jt.emplace_back(dofs[i], dofs[j], -omega * v);
            }
    }

    const auto N = form.size();
    auto build = [N](const std::vector<Trip>& trips) {
        SparseMatrix m(N, N);
        m.setFromTriplets(trips.begin(), trips.end());
        SparseMatrix sym = SparseMatrix(m.transpose());
        return SparseMatrix(0.5 * (m + sym));  // a + b == b + a, so exactly symmetric
    };
    form.grad_part = build(kt);
    form.mass = build(mt);
    form.jump_term = build(jt);
    form.stiffness = form.grad_part + form.jump_term;
    form.stiffness.makeCompressed();
    form.interior_indicator = Vector::Zero(N);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (mesh.region[t] != Region::inner) continue;
        for (int v : mesh.triangles[t])
            if (form.dof_of_node[v] >= 0) form.interior_indicator[form.dof_of_node[v]] = 1.0;
    }
    return form;
}

/// Per-element recomputation of x^T K x from a node field, independent of
/// the sparse matrices.
inline double form_value_direct(const InterfaceMesh& mesh, double omega, const std::vector<double>& u) {
    double grad = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec2 a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], c = mesh.nodes[t[2]];
        const double area = 0.5 * cross(b - a, c - a);
        // grad u = sum u_k perp(opposite edge) / (2 area), rotated consistently
        const Vec2 g = (1.0 / (2.0 * area)) *
                       (u[t[0]] * perp_left(c - b) + u[t[1]] * perp_left(a - c) + u[t[2]] * perp_left(b - a));
        grad += area * norm2(g);
    }
    double jump = 0.0;
    const std::size_t np = mesh.interface_pairs.size();
    for (std::size_t e = 0; e < np; ++e) {
        const auto& pa = mesh.interface_pairs[e];
        const auto& pb = mesh.interface_pairs[(e + 1) % np];
        const double len = norm(mesh.nodes[pb[0]] - mesh.nodes[pa[0]]);
        const double ja = u[pa[0]] - u[pa[1]], jb = u[pb[0]] - u[pb[1]];
        jump += len / 3.0 * (ja * ja + ja * jb + jb * jb);
    }
    return grad - omega * jump;
}

} // namespace dprime::fem
