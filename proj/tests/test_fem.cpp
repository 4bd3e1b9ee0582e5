#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "dprime/fem_solver.hpp"

using namespace dprime;
using namespace dprime::fem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLambdaUnitCircle = -4.84338872756125058871;

const InterfaceMesh& circle_mesh_008() {
    static const InterfaceMesh m = build_mesh(make_circle(1.0), 0.08, 6.0);
    return m;
}

const FemResult& circle_solution_004() {
    static const FemResult r = solve_lambda1(make_circle(1.0), 1.0, 0.04, 6.0);
    return r;
}

std::vector<double> random_field(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> u(n);
    for (double& v : u) v = g(rng);
    return u;
}

std::set<std::pair<int, int>> edges_of(const InterfaceMesh& m, Region region) {
    std::set<std::pair<int, int>> e;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        if (m.region[t] != region) continue;
        const auto& v = m.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = v[k], b = v[(k + 1) % 3];
            e.insert({std::min(a, b), std::max(a, b)});
        }
    }
    return e;
}

} // namespace

TEST(Mesh, InterfacePairCount) {
    const InterfaceMesh m = build_mesh(make_circle(1.0), 0.05, 3.0);
    const long expected = std::lround(kTwoPi / 0.05);
    EXPECT_LE(std::labs(static_cast<long>(m.interface_pairs.size()) - expected), 2);
}

TEST(Mesh, ValidityInvariants) {
    for (const Contour& c : {make_circle(1.0), make_ellipse_by_perimeter(kTwoPi, 3.0),
                             make_perturbed_circle(kTwoPi, 4, 0.1)}) {
        const InterfaceMesh m = build_mesh(c, 0.06, 6.0);
        ASSERT_EQ(m.region.size(), m.triangles.size());
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
            ASSERT_GT(m.triangle_area(t), 0.0);
            const auto& v = m.triangles[t];
            const Vec2 centroid = (1.0 / 3.0) * (m.nodes[v[0]] + m.nodes[v[1]] + m.nodes[v[2]]);
            const bool inside = signed_distance(c, centroid) > 0.0;
            ASSERT_EQ(inside, m.region[t] == Region::inner);
        }
        EXPECT_GE(m.min_angle_degrees(), 20.0);

        // Each interface point has one copy per side, used only by that side.
        std::vector<int> owner(m.nodes.size(), -1);
        for (std::size_t t = 0; t < m.triangles.size(); ++t)
            for (int v : m.triangles[t]) {
                const int r = static_cast<int>(m.region[t]);
                if (owner[v] == -1) owner[v] = r;
                else if (owner[v] != r) owner[v] = 2;
            }
        for (const auto& p : m.interface_pairs) {
            EXPECT_NE(p[0], p[1]);
            EXPECT_EQ(m.nodes[p[0]].x, m.nodes[p[1]].x);
            EXPECT_EQ(m.nodes[p[0]].y, m.nodes[p[1]].y);
            EXPECT_EQ(owner[p[0]], 0);
            EXPECT_EQ(owner[p[1]], 1);
        }
        for (int v = 0; v < static_cast<int>(m.nodes.size()); ++v) EXPECT_NE(owner[v], 2) << v;

        // Conformity: consecutive interface vertices are mesh edges on both sides.
        const auto inner_edges = edges_of(m, Region::inner), outer_edges = edges_of(m, Region::outer);
        const std::size_t n = m.interface_pairs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = m.interface_pairs[i];
            const auto& b = m.interface_pairs[(i + 1) % n];
            EXPECT_TRUE(inner_edges.count({std::min(a[0], b[0]), std::max(a[0], b[0])}));
            EXPECT_TRUE(outer_edges.count({std::min(a[1], b[1]), std::max(a[1], b[1])}));
        }
        for (int b : m.outer_boundary_nodes) EXPECT_NEAR(norm(m.nodes[b] - m.center), 6.0, 1e-12);
        EXPECT_NEAR(m.interface_length(), c.length(), 2e-3 * c.length());
    }
}

TEST(Mesh, RefinementQuadruplesBandTriangles) {
    auto band_count = [](const InterfaceMesh& m) {
        std::size_t count = 0;
        for (const auto& v : m.triangles) {
            const Vec2 g = (1.0 / 3.0) * (m.nodes[v[0]] + m.nodes[v[1]] + m.nodes[v[2]]);
            if (std::abs(norm(g) - 1.0) < 0.25) ++count;
        }
        return static_cast<double>(count);
    };
    const Contour c = make_circle(1.0);
    const double ratio = band_count(build_mesh(c, 0.04, 4.0)) / band_count(build_mesh(c, 0.08, 4.0));
    EXPECT_GT(ratio, 3.2);
    EXPECT_LT(ratio, 4.8);
}

TEST(Mesh, PointsDoNotDependOnOuterRadius) {
    const Contour c = make_circle(1.0);
    const InterfaceMesh a = build_mesh(c, 0.08, 4.0), b = build_mesh(c, 0.08, 7.0);
    std::set<std::pair<double, double>> pts;
    for (const Vec2& p : b.nodes) pts.insert({p.x, p.y});
    for (const Vec2& p : a.nodes)
        if (norm(p) < 3.0) {
            EXPECT_TRUE(pts.count({p.x, p.y})) << p.x << ' ' << p.y;
        }
}

TEST(Mesh, Preconditions) {
    const Contour c = make_circle(1.0);
    EXPECT_THROW(build_mesh(c, 0.2, 6.0), DomainError);
    EXPECT_THROW(build_mesh(c, 0.05, 2.5), DomainError);
}

TEST(Mesh, ExportFormat) {
    const InterfaceMesh& m = circle_mesh_008();
    std::ostringstream os;
    m.write(os);
    std::istringstream is(os.str());
    std::string tag;
    std::size_t count = 0;
    std::getline(is, tag);
    EXPECT_EQ(tag, "dprime-mesh 1");
    is >> tag >> count;
    EXPECT_EQ(tag, "nodes");
    EXPECT_EQ(count, m.nodes.size());
    double x, y;
    for (std::size_t i = 0; i < count; ++i) is >> x >> y;
    is >> tag >> count;
    EXPECT_EQ(tag, "triangles");
    EXPECT_EQ(count, m.triangles.size());
    int a, b, c, r;
    for (std::size_t i = 0; i < count; ++i) is >> a >> b >> c >> r;
    EXPECT_TRUE(r == 0 || r == 1);
    is >> tag >> count;
    EXPECT_EQ(tag, "interface_pairs");
    EXPECT_EQ(count, m.interface_pairs.size());
    for (std::size_t i = 0; i < count; ++i) is >> a >> b;
    is >> tag >> count;
    EXPECT_EQ(tag, "outer_boundary");
    EXPECT_EQ(count, m.outer_boundary_nodes.size());
    for (std::size_t i = 0; i < count; ++i) is >> a;
    EXPECT_TRUE(static_cast<bool>(is));
    is >> tag;
    EXPECT_TRUE(is.eof());
}

TEST(Assembly, IndicatorFieldGivesMinusOmegaPerimeter) {
    const InterfaceMesh& m = circle_mesh_008();
    for (double omega : {0.5, 1.0, 2.0}) {
        const DiscreteForm f = assemble(m, omega);
        std::vector<double> u(m.nodes.size(), 0.0);
        for (std::size_t t = 0; t < m.triangles.size(); ++t)
            if (m.region[t] == Region::inner)
                for (int v : m.triangles[t]) u[v] = 1.0;
        const Vector x = f.from_nodes(u);
        const double expected = -omega * m.interface_length();
        EXPECT_NEAR(x.dot(f.stiffness * x), expected, 1e-12 * std::abs(expected));
        EXPECT_NEAR(form_value_direct(m, omega, u), expected, 1e-12 * std::abs(expected));
    }
}

TEST(Assembly, ExactSymmetry) {
    const DiscreteForm f = assemble(circle_mesh_008(), 1.0);
    for (const SparseMatrix* A : {&f.stiffness, &f.mass, &f.jump_term, &f.grad_part}) {
        double worst = 0.0;
        for (int k = 0; k < A->outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(*A, k); it; ++it)
                worst = std::max(worst, std::abs(it.value() - A->coeff(it.col(), it.row())));
        EXPECT_EQ(worst, 0.0);
    }
}

TEST(Assembly, MatchesDirectElementRecomputation) {
    const InterfaceMesh& m = circle_mesh_008();
    for (OuterBoundary bc : {OuterBoundary::dirichlet, OuterBoundary::natural}) {
        const DiscreteForm f = assemble(m, 1.3, bc);
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            std::vector<double> u = random_field(m.nodes.size(), seed);
            if (bc == OuterBoundary::dirichlet)
                for (int b : m.outer_boundary_nodes) u[b] = 0.0;
            const Vector x = f.from_nodes(u);
            const double direct = form_value_direct(m, 1.3, u);
            EXPECT_NEAR(x.dot(f.stiffness * x), direct, 1e-12 * std::abs(direct));
        }
    }
}

TEST(Assembly, JumpTermProperties) {
    const InterfaceMesh& m = circle_mesh_008();
    const DiscreteForm f = assemble(m, 1.0);
    std::vector<double> u = random_field(m.nodes.size(), 11);
    for (const auto& p : m.interface_pairs) u[p[1]] = u[p[0]];
    const Vector x = f.from_nodes(u);
    EXPECT_NEAR(x.dot(f.jump_term * x), 0.0, 1e-13);
    for (std::uint64_t seed : {4u, 5u, 6u}) {
        const Vector y = f.from_nodes(random_field(m.nodes.size(), seed));
        EXPECT_LE(y.dot(f.jump_term * y), 0.0);
        EXPECT_GE(y.dot(f.grad_part * y), 0.0);
        EXPECT_GT(y.dot(f.mass * y), 0.0);
    }
    std::set<int> support;
    for (int k = 0; k < f.jump_term.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(f.jump_term, k); it; ++it) support.insert(static_cast<int>(it.row()));
    EXPECT_EQ(support.size(), 2 * m.interface_pairs.size());
}

TEST(Eigen, CircleGroundState) {
    const FemResult& r = circle_solution_004();
    EXPECT_LT(r.lambda1, 0.0);
    EXPECT_LE(r.residual, 1e-8);
    EXPECT_EQ(r.eigenvalues_below, 1);
    EXPECT_LE(std::abs(r.lambda1 - kLambdaUnitCircle), 0.02 * std::abs(kLambdaUnitCircle));
    // P1 on a polygon from above
    EXPECT_GT(r.lambda1, kLambdaUnitCircle);
}

TEST(Eigen, JumpHasConstantSign) {
    for (const Contour& c : {make_circle(1.0), make_ellipse_by_perimeter(kTwoPi, 2.0)}) {
        const FemResult r = solve_lambda1(c, 1.0, 0.08, 6.0);
        for (double j : interface_jump(r)) EXPECT_GT(j, 0.0);
    }
}

TEST(Eigen, CircleGroundStateIsRadial) {
    const FemResult& r = circle_solution_004();
    for (double radius : {0.3, 0.8, 1.2, 2.0}) EXPECT_LT(angular_nonradial_ratio(r, radius), 0.01) << radius;
}

TEST(Eigen, TransplantedProfileQuotientIsAboveLambda) {
    for (const Contour& c : {make_circle(1.0), make_ellipse_by_perimeter(kTwoPi, 2.0),
                             make_perturbed_circle(kTwoPi, 3, 0.1)}) {
        const InterfaceMesh m = build_mesh(c, 0.06, 6.0);
        const DiscreteForm f = assemble(m, 1.0);
        const EigenResult e = lowest_eigenpair(f, 1e-10);
        const RadialProfile p = optimal_profile(c.length() / kTwoPi, 1.0);
        const double q = rayleigh_quotient(f, f.from_nodes(transplant_profile(m, c, p)));
        EXPECT_GE(q, e.lambda1 - 1e-10 * std::abs(e.lambda1));
        // and it is close to the continuous transplanted quotient
        EXPECT_NEAR(q, domain_quotient(p, c, 1.0).quotient, 0.05);
    }
}

TEST(Eigen, EllipseBelowCircle) {
    const Contour c = make_ellipse_by_perimeter(kTwoPi, 2.0);
    const FemResult r = solve_lambda1(c, 1.0, 0.04, 6.0);
    const TheoremCertificate cert = theorem_certificate(c, 1.0);
    EXPECT_LE(r.lambda1, cert.domain_bound + 5e-3);
    EXPECT_LT(r.lambda1, kLambdaUnitCircle - 0.1);
}

TEST(Eigen, DirichletAndNaturalTruncationAgree) {
    const Contour c = make_circle(1.0);
    FemOptions natural;
    natural.outer = OuterBoundary::natural;
    const FemResult d = solve_lambda1(c, 1.0, 0.08, 8.0);
    const FemResult n = solve_lambda1(c, 1.0, 0.08, 8.0, natural);
    EXPECT_LT(std::abs(d.lambda1 - n.lambda1), 1e-5);
    EXPECT_LE(n.lambda1, d.lambda1);
}

TEST(Eigen, IndefiniteInitialShiftIsRecovered) {
    const DiscreteForm f = assemble(circle_mesh_008(), 1.0);
    const EigenResult good = lowest_eigenpair(f, 1e-10);
    const EigenResult retried = lowest_eigenpair(f, 1e-10, -3.0);
    EXPECT_NEAR(good.lambda1, retried.lambda1, 1e-9);
    EXPECT_GT(retried.factorizations, 2);
    EXPECT_THROW(lowest_eigenpair(f, 0.0), DomainError);
}

TEST(Eigen, InertiaCountsEigenvalues) {
    const DiscreteForm f = assemble(circle_mesh_008(), 1.0);
    const EigenResult e = lowest_eigenpair(f, 1e-10);
    EXPECT_EQ(count_eigenvalues_below(f, e.lambda1 * 1.001), 0);
    EXPECT_EQ(count_eigenvalues_below(f, e.lambda1 * 0.999), 1);
}

TEST(Convergence, ObservedOrderAndOuterRadius) {
    const auto rows = convergence_study(make_circle(1.0), 1.0, {0.08, 0.04, 0.02}, {6.0}, kLambdaUnitCircle);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_TRUE(rows[i].observed_order.has_value());
        EXPECT_GE(*rows[i].observed_order, 1.5);
        EXPECT_LE(*rows[i].observed_order, 2.5);
        EXPECT_LT(*rows[i].error, *rows[i - 1].error);
        EXPECT_GT(rows[i].lambda1, kLambdaUnitCircle);
        EXPECT_LT(rows[i].lambda1, rows[i - 1].lambda1);
    }
    const auto wide = convergence_study(make_circle(1.0), 1.0, {0.08}, {5.0, 8.0});
    EXPECT_LT(std::abs(wide[0].lambda1 - wide[1].lambda1), 1e-6);
    EXPECT_THROW(convergence_study(make_circle(1.0), 1.0, {0.04, 0.08}, {6.0}), DomainError);
}

TEST(Convergence, Richardson) {
    const RichardsonEstimate e = richardson(-4.8238315210, -4.8387300112);
    EXPECT_NEAR(e.extrapolated, -4.8436961746, 1e-9);
    EXPECT_NEAR(e.error_estimate, 0.0049661634, 1e-9);
}

TEST(Export, EigenpairCsv) {
    const FemResult r = solve_lambda1(make_circle(1.0), 1.0, 0.08, 4.0);
    std::ostringstream os;
    write_eigenpair_csv(os, r);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "node,x,y,side,value");
    std::map<std::string, int> sides;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string field;
        for (int i = 0; i < 4; ++i) std::getline(ss, field, ',');
        ++sides[field];
    }
    EXPECT_EQ(rows, r.mesh.nodes.size());
    EXPECT_EQ(sides["interface_inner"], static_cast<int>(r.interface_pairs));
    EXPECT_EQ(sides["interface_outer"], static_cast<int>(r.interface_pairs));
    EXPECT_GT(sides["inner"], 0);
    EXPECT_GT(sides["outer"], 0);
}
