#include <cmath>
#include <unordered_map>

#include "doctest.h"
#include "mfe/geometry.hpp"

using namespace mfe;

namespace {

constexpr double kPi = 3.14159265358979323846;

DomainSpec unit_disk() { return {DiskCurve{{0, 0}, 1.0}, {}}; }

DomainSpec annulus(Vec2 hole_center, double hole_r, double outer_r = 1.0) {
    return {DiskCurve{{0, 0}, outer_r}, {DiskCurve{hole_center, hole_r}}};
}

double disk_area_error(double h) {
    Mesh m = triangulate(unit_disk(), h);
    double a = integrate(m, [](const Vec2&) { return 1.0; });
    return std::abs(a - kPi);
}

}  // namespace

TEST_CASE("disk mesh: boundary nodes on the circle, invariants hold") {
    Mesh m = triangulate(unit_disk(), 0.05);
    double diam = m.diameter();
    int n_boundary = 0;
    for (int i = 0; i < m.n_nodes(); ++i) {
        if (m.marker[i] == kOuter) {
            ++n_boundary;
            CHECK(std::abs(m.nodes[i].norm() - 1.0) <= 1e-10 * diam);
        }
    }
    CHECK(n_boundary >= 12);
    for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.tri_area(t) > 0.0);

    // Conforming: interior edges shared by exactly two triangles.
    std::unordered_map<long long, int> edges;
    long long N = m.n_nodes();
    for (const auto& tr : m.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = tr[(e + 1) % 3], b = tr[(e + 2) % 3];
            edges[std::min(a, b) * N + std::max(a, b)]++;
        }
    for (const auto& [k, cnt] : edges) {
        CHECK(cnt <= 2);
        if (cnt == 1) {
            int a = static_cast<int>(k / N), b = static_cast<int>(k % N);
            CHECK(m.is_boundary(a));
            CHECK(m.is_boundary(b));
        }
    }
}

TEST_CASE("annulus mesh: markers and hole exclusion") {
    DomainSpec spec = annulus({0.3, 0}, 0.2);
    Mesh m = triangulate(spec, 0.03);
    for (int i = 0; i < m.n_nodes(); ++i) {
        int mk = m.marker[i];
        CHECK((mk == kInterior || mk == kOuter || mk == 1));
        if (mk == 1) CHECK(std::abs(dist(m.nodes[i], {0.3, 0}) - 0.2) <= 1e-10 * m.diameter());
        // No node strictly inside the hole.
        CHECK(dist(m.nodes[i], {0.3, 0}) >= 0.2 - 1e-10);
    }
}

TEST_CASE("hole exiting the outer disk is rejected") {
    CHECK_THROWS_AS(triangulate(annulus({0.9, 0}, 0.2), 0.03), Error);
    try {
        triangulate(annulus({0.9, 0}, 0.2), 0.03);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidDomain);
    }
}

TEST_CASE("quadrature: unit disk area within 1e-3 at h=0.02") {
    Mesh m = triangulate(unit_disk(), 0.02);
    double a = integrate(m, [](const Vec2&) { return 1.0; });
    CHECK(std::abs(a - kPi) < 1e-3);
}

TEST_CASE("quadrature: analytic areas for ellipse and rectangle") {
    {
        DomainSpec e{EllipseCurve{2.0, 0.5}, {}};
        Mesh m = triangulate(e, 0.04);
        double a = integrate(m, [](const Vec2&) { return 1.0; });
        CHECK(std::abs(a - kPi) < 6e-3);
    }
    {
        DomainSpec r{RectangleCurve{4.0, 0.5}, {}};
        Mesh m = triangulate(r, 0.04);
        double a = integrate(m, [](const Vec2&) { return 1.0; });
        CHECK(std::abs(a - 2.0) < 1e-9);  // straight boundary is exact
    }
}

TEST_CASE("refining h by 2 shrinks the disk area error by >= 3x") {
    double e1 = disk_area_error(0.04);
    double e2 = disk_area_error(0.02);
    CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("bubble mass: e^U over B_sqrt8 is 4*pi, growing toward 8*pi") {
    auto eU = [](const Vec2& p) {
        double t = 1.0 + p.norm2() / 8.0;
        return 1.0 / (t * t);
    };
    DomainSpec b8{DiskCurve{{0, 0}, std::sqrt(8.0)}, {}};
    Mesh m = triangulate(b8, 0.05);
    CHECK(integrate(m, eU) == doctest::Approx(4 * kPi).epsilon(1e-4));

    // Closed form for radius R: 8 pi R^2 / (8 + R^2).
    for (double R : {1.0, 4.0, 10.0}) {
        DomainSpec bn{DiskCurve{{0, 0}, R}, {}};
        Mesh mr = triangulate(bn, R / 40.0);
        double expected = 8 * kPi * R * R / (8 + R * R);
        CHECK(integrate(mr, eU) == doctest::Approx(expected).epsilon(2e-3));
    }
}

TEST_CASE("exterior inverse quartic: unit disk center is pi, delta independent") {
    DomainSpec d = unit_disk();
    double v1 = exterior_inverse_quartic(d, {0, 0}, 0.1);
    double v2 = exterior_inverse_quartic(d, {0, 0}, 0.2);
    CHECK(v1 == doctest::Approx(kPi).epsilon(1e-8));
    CHECK(std::abs(v1 - v2) < 1e-4);
    CHECK_THROWS_AS(exterior_inverse_quartic(d, {0.95, 0}, 0.1), Error);
}

TEST_CASE("exterior inverse quartic: square [-1,1]^2 matches the polar oracle") {
    DomainSpec sq{RectangleCurve{2.0, 2.0}, {}};
    double got = exterior_inverse_quartic(sq, {0, 0}, 0.25);

    // Independent oracle: midpoint rule in theta with the square's exit radius
    // 1/max(|cos|,|sin|) and the exact radial tail 1/(2 R^2). The closed form
    // of this integral is (pi + 2)/2.
    int M = 200000;
    double acc = 0;
    for (int i = 0; i < M; ++i) {
        double th = 2 * kPi * (i + 0.5) / M;
        double R = 1.0 / std::max(std::abs(std::cos(th)), std::abs(std::sin(th)));
        acc += 0.5 / (R * R);
    }
    acc *= 2 * kPi / M;
    CHECK(acc == doctest::Approx((kPi + 2) / 2).epsilon(1e-9));
    CHECK(got == doctest::Approx(acc).epsilon(1e-6));
    CHECK(got > 0);
    CHECK(got < kPi);
}

TEST_CASE("graded mesh: focal refinement keeps invariants") {
    FocalGrade g{{0.2, 0.1}, 0.004, 0.3};
    Mesh m = triangulate(unit_disk(), 0.05, g);
    for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.tri_area(t) > 0.0);
    double a = integrate(m, [](const Vec2&) { return 1.0; });
    CHECK(std::abs(a - kPi) < 2e-3);
    // The focal point itself is a mesh node.
    double best = 1e9;
    for (const Vec2& p : m.nodes) best = std::min(best, dist(p, {0.2, 0.1}));
    CHECK(best < 1e-12);
}

TEST_CASE("locator: interpolation reproduces linear fields") {
    Mesh m = triangulate(unit_disk(), 0.06);
    MeshLocator loc(m);
    ScalarField f(m);
    for (int i = 0; i < m.n_nodes(); ++i) f[i] = 3.0 * m.nodes[i].x - 1.5 * m.nodes[i].y + 0.25;
    for (double r : {0.0, 0.3, 0.7, 0.95}) {
        Vec2 p{r * 0.7071, -r * 0.7071};
        CHECK(loc.interpolate(f, p) == doctest::Approx(3.0 * p.x - 1.5 * p.y + 0.25).epsilon(1e-12));
    }
}
