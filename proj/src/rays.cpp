#include <algorithm>
#include <cmath>

#include "mfe/geometry.hpp"

namespace mfe {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Nodes/weights of the 16-point Gauss-Legendre rule on [-1, 1].
const double kGX[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
const double kGW[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// Maximal radial intervals of { r > rmin : q + r e_theta in Omega }.
void ray_intervals(const DomainSpec& spec, const Vec2& q, double theta, double rmin,
                   std::vector<std::pair<double, double>>& out) {
    out.clear();
    Vec2 dir{std::cos(theta), std::sin(theta)};
    static thread_local std::vector<double> hits;
    hits.clear();
    curve_ray_hits(spec.outer, q, dir, hits);
    for (const auto& h : spec.holes) curve_ray_hits(h, q, dir, hits);
    hits.erase(std::remove_if(hits.begin(), hits.end(), [rmin](double t) { return t < rmin; }),
               hits.end());
    hits.push_back(rmin);
    std::sort(hits.begin(), hits.end());
    // Classify each gap by its midpoint; robust against tangential hits.
    for (size_t i = 0; i + 1 < hits.size(); ++i) {
        double a = hits[i], b = hits[i + 1];
        if (b - a < 1e-14) continue;
        Vec2 mid = q + dir * (0.5 * (a + b));
        if (domain_contains(spec, mid)) out.push_back({a, b});
    }
}

std::vector<double> arc_breakpoints(const DomainSpec& spec, const Vec2& q) {
    std::vector<double> brk;
    curve_breakpoint_angles(spec.outer, q, brk);
    for (const auto& h : spec.holes) curve_breakpoint_angles(h, q, brk);
    for (double& a : brk) {
        a = std::fmod(a, 2 * kPi);
        if (a < 0) a += 2 * kPi;
    }
    brk.push_back(0.0);
    brk.push_back(2 * kPi);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end(),
                          [](double a, double b) { return b - a < 1e-12; }),
              brk.end());
    if (brk.back() < 2 * kPi - 1e-12) brk.push_back(2 * kPi);
    return brk;
}

}  // namespace

void for_each_ray_interval(const DomainSpec& spec, const Vec2& q, double rmin,
                           int /*nodes_per_arc*/, int min_arcs,
                           const std::function<void(double, double, double, double)>& cb) {
    auto brk = arc_breakpoints(spec, q);
    std::vector<std::pair<double, double>> iv;
    for (size_t s = 0; s + 1 < brk.size(); ++s) {
        double a0 = brk[s], a1 = brk[s + 1];
        double span = a1 - a0;
        if (span < 1e-13) continue;
        // Split long smooth arcs so the global angular resolution is bounded.
        int chunks = std::max(1, static_cast<int>(std::ceil(span / (2 * kPi / min_arcs))));
        for (int c = 0; c < chunks; ++c) {
            double b0 = a0 + span * c / chunks;
            double b1 = a0 + span * (c + 1) / chunks;
            double mid = 0.5 * (b0 + b1), half = 0.5 * (b1 - b0);
            for (int g = 0; g < 16; ++g) {
                double theta = mid + half * kGX[g];
                double wt = half * kGW[g];
                ray_intervals(spec, q, theta, rmin, iv);
                for (const auto& [ra, rb] : iv) cb(theta, wt, ra, rb);
            }
        }
    }
}

double radial_power_integral(const DomainSpec& spec, const Vec2& q, double rmin, int p, int rays) {
    if (p != 2 && p != 4)
        throw Error(ErrorKind::InvalidConfig, "radial power must be 2 or 4");
    KahanSum sum;
    int arcs = std::max(8, rays / 16);
    for_each_ray_interval(spec, q, rmin, 16, arcs,
                          [&](double, double wt, double a, double b) {
                              double g = (p == 4) ? 0.5 * (1.0 / (a * a) - 1.0 / (b * b))
                                                  : std::log(b / a);
                              sum.add(wt * g);
                          });
    return sum.value();
}

double radial_quartic_integral(const DomainSpec& spec, const Vec2& q, double rmin,
                               const std::function<double(const Vec2&)>& f,
                               int /*radial_nodes*/, int rays) {
    KahanSum sum;
    int arcs = std::max(8, rays / 16);
    for_each_ray_interval(
        spec, q, rmin, 16, arcs, [&](double theta, double wt, double a, double b) {
            // substitute u = 1/(2 r^2): integral f / r^4 dA = du dtheta of f
            Vec2 dir{std::cos(theta), std::sin(theta)};
            double ua = 1.0 / (2 * b * b), ub = 1.0 / (2 * a * a);
            double mid = 0.5 * (ua + ub), half = 0.5 * (ub - ua);
            KahanSum inner;
            for (int g = 0; g < 16; ++g) {
                double u = mid + half * kGX[g];
                double r = 1.0 / std::sqrt(2 * u);
                inner.add(half * kGW[g] * f(q + dir * r));
            }
            sum.add(wt * inner.value());
        });
    return sum.value();
}

double exterior_inverse_quartic(const DomainSpec& spec, const Vec2& q, double delta) {
    if (!(delta > 0) || !domain_contains(spec, q) ||
        domain_boundary_distance(spec, q) <= delta)
        throw Error(ErrorKind::DeltaTooLarge, "closure of B(q,delta) must lie inside the domain");
    double inner = radial_power_integral(spec, q, delta, 4);
    return kPi / (delta * delta) - inner;
}

}  // namespace mfe
