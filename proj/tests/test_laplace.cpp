#include <cmath>

#include "doctest.h"
#include "mfe/laplace.hpp"

using namespace mfe;

namespace {

constexpr double kPi = 3.14159265358979323846;

DomainSpec unit_disk() { return {DiskCurve{{0, 0}, 1.0}, {}}; }

double bubble_exp(const Vec2& p) {
    double t = 1.0 + p.norm2() / 8.0;
    return 1.0 / (t * t);
}

Mesh renumbered(const Mesh& m) {
    int n = m.n_nodes();
    Mesh out;
    out.target_h = m.target_h;
    out.nodes.resize(n);
    out.marker.resize(n);
    for (int i = 0; i < n; ++i) {
        out.nodes[n - 1 - i] = m.nodes[i];
        out.marker[n - 1 - i] = m.marker[i];
    }
    for (auto tr : m.triangles) {
        for (int& v : tr) v = n - 1 - v;
        out.triangles.push_back(tr);
    }
    return out;
}

}  // namespace

TEST_CASE("dirichlet solve reproduces linear boundary data exactly") {
    Mesh m = triangulate(unit_disk(), 0.06);
    LaplaceSolver solver(m);
    std::vector<double> g(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) g[i] = m.nodes[i].x;
    ScalarField u = solver.solve_dirichlet(g);
    for (int i = 0; i < m.n_nodes(); ++i)
        CHECK(std::abs(u[i] - m.nodes[i].x) < 1e-9);
}

TEST_CASE("dirichlet solve: zero log data at the disk center gives the zero field") {
    Mesh m = triangulate(unit_disk(), 0.06);
    LaplaceSolver solver(m);
    std::vector<double> g(m.n_nodes(), 0.0);
    for (int i = 0; i < m.n_nodes(); ++i)
        if (m.is_boundary(i)) g[i] = std::log(m.nodes[i].norm()) / (2 * kPi);
    ScalarField u = solver.solve_dirichlet(g);
    for (int i = 0; i < m.n_nodes(); ++i) CHECK(std::abs(u[i]) < 1e-9);
}

TEST_CASE("dirichlet solve: constant rhs 4 gives 1 - |x|^2 to O(h^2)") {
    Mesh m = triangulate(unit_disk(), 0.03);
    LaplaceSolver solver(m);
    std::vector<double> g(m.n_nodes(), 0.0);
    ScalarField u = solver.solve_dirichlet([](const Vec2&) { return 4.0; }, g);
    double err = 0;
    for (int i = 0; i < m.n_nodes(); ++i)
        err = std::max(err, std::abs(u[i] - (1.0 - m.nodes[i].norm2())));
    CHECK(err < 5e-3);
}

TEST_CASE("discrete maximum principle for zero-rhs solves") {
    Mesh m = triangulate({DiskCurve{{0, 0}, 1.0}, {DiskCurve{{0.3, 0}, 0.2}}}, 0.04);
    LaplaceSolver solver(m);
    std::vector<double> g(m.n_nodes(), 0.0);
    double glo = 1e300, ghi = -1e300;
    for (int i = 0; i < m.n_nodes(); ++i)
        if (m.is_boundary(i)) {
            g[i] = std::sin(3 * m.nodes[i].x) + m.nodes[i].y;
            glo = std::min(glo, g[i]);
            ghi = std::max(ghi, g[i]);
        }
    ScalarField u = solver.solve_dirichlet(g);
    for (int i = 0; i < m.n_nodes(); ++i) {
        CHECK(u[i] <= ghi + 1e-12);
        CHECK(u[i] >= glo - 1e-12);
    }
}

TEST_CASE("green_regular matches the disk image-charge closed form") {
    Mesh m = triangulate(unit_disk(), 0.02);
    LaplaceSolver solver(m);
    CHECK(std::abs(solver.green_regular({0, 0}).gamma_q) < 1e-4);
    double got = solver.green_regular({0.5, 0}).gamma_q;
    double expected = std::log(0.75) / (2 * kPi);
    CHECK(std::abs(got - expected) < 1e-3);
    CHECK_THROWS_AS(solver.green_regular({1.0 - 0.5 * m.target_h, 0}), Error);
}

TEST_CASE("robin_field: decreasing along a disk ray; empty input") {
    Mesh m = triangulate(unit_disk(), 0.03);
    LaplaceSolver solver(m);
    auto vals = solver.robin_field({{0, 0}, {0.5, 0}, {0.9, 0}});
    REQUIRE(vals.size() == 3);
    CHECK(vals[0].second > vals[1].second);
    CHECK(vals[1].second > vals[2].second);
    CHECK(vals[1].second == doctest::Approx(std::log(0.75) / (2 * kPi)).epsilon(2e-2));
    CHECK(solver.robin_field({}).empty());
}

TEST_CASE("robin_field on the concentric annulus has an interior max circle") {
    DomainSpec annulus{DiskCurve{{0, 0}, 1.0}, {DiskCurve{{0, 0}, 0.25}}};
    auto argmax_radius = [&](double h) {
        Mesh m = triangulate(annulus, h);
        LaplaceSolver solver(m);
        double best = -1e300, best_r = 0;
        for (double r = 0.25 + 3 * h; r <= 1.0 - 3 * h; r += 0.02) {
            double g = solver.green_regular({r, 0}).gamma_q;
            if (g > best) { best = g; best_r = r; }
        }
        CHECK(best_r > 0.35);
        CHECK(best_r < 0.9);
        return best_r;
    };
    double r1 = argmax_radius(0.04);
    double r2 = argmax_radius(0.02);
    CHECK(std::abs(r1 - r2) < 0.03);  // self-convergence under refinement
}

TEST_CASE("robin_all_nodes agrees with per-point green_regular") {
    Mesh m = triangulate(unit_disk(), 0.05);
    LaplaceSolver solver(m);
    ScalarField gamma = solver.robin_all_nodes();
    int checked = 0;
    for (int i = 0; i < m.n_nodes() && checked < 12; ++i) {
        if (m.is_boundary(i)) continue;
        if (solver.min_boundary_distance(m.nodes[i]) <= 2.5 * m.target_h) continue;
        double direct = solver.green_regular(m.nodes[i]).gamma_q;
        CHECK(std::abs(gamma[i] - direct) < 2e-3);
        ++checked;
    }
    CHECK(checked == 12);
}

TEST_CASE("eig_smallest: bubble weight on B_sqrt8 has first eigenvalue near 0") {
    DomainSpec b8{DiskCurve{{0, 0}, std::sqrt(8.0)}, {}};
    Mesh m = triangulate(b8, 0.05);
    SparseOperator A = assemble_stiffness(m);
    SparseOperator B = assemble_weighted_mass(m, bubble_exp);
    auto pairs = eig_smallest(m, A, B, 2);
    REQUIRE(pairs.size() == 2);
    CHECK(std::abs(pairs[0].first) < 1e-2);
    CHECK(pairs[1].first > pairs[0].first);

    ScalarField z(m);
    for (int i = 0; i < m.n_nodes(); ++i) {
        double r2 = m.nodes[i].norm2();
        z[i] = (8 - r2) / (8 + r2);
    }
    Eigen::Map<const Eigen::VectorXd> zv(z.values.data(), m.n_nodes());
    Eigen::Map<const Eigen::VectorXd> pv(pairs[0].second.values.data(), m.n_nodes());
    double num = std::abs(pv.dot(B.mat * zv));
    double den = std::sqrt(pv.dot(B.mat * pv) * zv.dot(B.mat * zv));
    CHECK(num / den > 0.999);

    // Halving the weight raises the first eigenvalue of (A - B, B).
    SparseOperator Bh = assemble_weighted_mass(m, [](const Vec2& p) { return 0.5 * bubble_exp(p); });
    auto half = eig_smallest(m, A, Bh, 1);
    CHECK(half[0].first > pairs[0].first);

    CHECK(eig_smallest(m, A, B, 0).empty());
}

TEST_CASE("eig_smallest is invariant under node renumbering") {
    Mesh m = triangulate(unit_disk(), 0.08);
    Mesh mr = renumbered(m);
    auto run = [](const Mesh& mesh) {
        SparseOperator A = assemble_stiffness(mesh);
        SparseOperator B = assemble_weighted_mass(mesh, [](const Vec2&) { return 1.0; });
        return eig_smallest(mesh, A, B, 3);
    };
    auto p1 = run(m);
    auto p2 = run(mr);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(p1[j].first - p2[j].first) < 1e-8);
}
