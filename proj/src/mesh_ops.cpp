#include <algorithm>
#include <cmath>

#include "mfe/geometry.hpp"

namespace mfe {

namespace {

// Degree-4 Dunavant rule, 6 points, weights sum to 1.
struct QuadRule {
    static constexpr int n = 6;
    double w[6];
    double l1[6], l2[6];

    QuadRule() {
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        double L1[6] = {a1, 1 - 2 * a1, a1, a2, 1 - 2 * a2, a2};
        double L2[6] = {a1, a1, 1 - 2 * a1, a2, a2, 1 - 2 * a2};
        double W[6] = {w1, w1, w1, w2, w2, w2};
        for (int i = 0; i < 6; ++i) { w[i] = W[i]; l1[i] = L1[i]; l2[i] = L2[i]; }
    }
};

const QuadRule& quad_rule() {
    static QuadRule r;
    return r;
}

}  // namespace

double integrate(const Mesh& mesh, const std::function<double(const Vec2&)>& f) {
    const QuadRule& q = quad_rule();
    KahanSum sum;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const Vec2 &a = mesh.nodes[tr[0]], &b = mesh.nodes[tr[1]], &c = mesh.nodes[tr[2]];
        double area = mesh.tri_area(t);
        KahanSum local;
        for (int i = 0; i < QuadRule::n; ++i) {
            double l1 = q.l1[i], l2 = q.l2[i], l0 = 1 - l1 - l2;
            Vec2 p = l0 * a + l1 * b + l2 * c;
            double v = f(p);
            if (!std::isfinite(v))
                throw Error(ErrorKind::NonFiniteIntegrand, "integrand not finite at quadrature node");
            local.add(q.w[i] * v);
        }
        sum.add(area * local.value());
    }
    return sum.value();
}

double integrate(const Mesh& mesh, const ScalarField& field,
                 const std::function<double(const Vec2&, double)>& f) {
    const QuadRule& q = quad_rule();
    KahanSum sum;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const Vec2 &a = mesh.nodes[tr[0]], &b = mesh.nodes[tr[1]], &c = mesh.nodes[tr[2]];
        double fa = field[tr[0]], fb = field[tr[1]], fc = field[tr[2]];
        double area = mesh.tri_area(t);
        KahanSum local;
        for (int i = 0; i < QuadRule::n; ++i) {
            double l1 = q.l1[i], l2 = q.l2[i], l0 = 1 - l1 - l2;
            Vec2 p = l0 * a + l1 * b + l2 * c;
            double v = f(p, l0 * fa + l1 * fb + l2 * fc);
            if (!std::isfinite(v))
                throw Error(ErrorKind::NonFiniteIntegrand, "integrand not finite at quadrature node");
            local.add(q.w[i] * v);
        }
        sum.add(area * local.value());
    }
    return sum.value();
}

double log_integral_exp(const Mesh& mesh, const ScalarField& w) {
    double shift = w.max();
    const QuadRule& q = quad_rule();
    KahanSum sum;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        double fa = w[tr[0]] - shift, fb = w[tr[1]] - shift, fc = w[tr[2]] - shift;
        double area = mesh.tri_area(t);
        KahanSum local;
        for (int i = 0; i < QuadRule::n; ++i) {
            double l1 = q.l1[i], l2 = q.l2[i], l0 = 1 - l1 - l2;
            local.add(q.w[i] * std::exp(l0 * fa + l1 * fb + l2 * fc));
        }
        sum.add(area * local.value());
    }
    return shift + std::log(sum.value());
}

MeshLocator::MeshLocator(const Mesh& mesh) : mesh_(mesh) {
    lo_ = hi_ = mesh.nodes[0];
    for (const Vec2& p : mesh.nodes) {
        lo_.x = std::min(lo_.x, p.x); lo_.y = std::min(lo_.y, p.y);
        hi_.x = std::max(hi_.x, p.x); hi_.y = std::max(hi_.y, p.y);
    }
    int target = std::max(8, static_cast<int>(std::sqrt((double)mesh.n_triangles())));
    cell_ = std::max(hi_.x - lo_.x, hi_.y - lo_.y) / target;
    nx_ = static_cast<int>((hi_.x - lo_.x) / cell_) + 1;
    ny_ = static_cast<int>((hi_.y - lo_.y) / cell_) + 1;
    bins_.resize(static_cast<size_t>(nx_) * ny_);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        Vec2 tlo = mesh.nodes[tr[0]], thi = tlo;
        for (int k = 1; k < 3; ++k) {
            const Vec2& p = mesh.nodes[tr[k]];
            tlo.x = std::min(tlo.x, p.x); tlo.y = std::min(tlo.y, p.y);
            thi.x = std::max(thi.x, p.x); thi.y = std::max(thi.y, p.y);
        }
        int i0 = std::clamp(static_cast<int>((tlo.x - lo_.x) / cell_), 0, nx_ - 1);
        int i1 = std::clamp(static_cast<int>((thi.x - lo_.x) / cell_), 0, nx_ - 1);
        int j0 = std::clamp(static_cast<int>((tlo.y - lo_.y) / cell_), 0, ny_ - 1);
        int j1 = std::clamp(static_cast<int>((thi.y - lo_.y) / cell_), 0, ny_ - 1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) bins_[static_cast<size_t>(j) * nx_ + i].push_back(t);
    }
}

int MeshLocator::locate(const Vec2& p, std::array<double, 3>* bary) const {
    int ci = std::clamp(static_cast<int>((p.x - lo_.x) / cell_), 0, nx_ - 1);
    int cj = std::clamp(static_cast<int>((p.y - lo_.y) / cell_), 0, ny_ - 1);
    int best = -1;
    double best_neg = -1e300;
    std::array<double, 3> best_bary{};
    for (int ring = 0; ring < 2 && best_neg < -1e-9; ++ring) {
        for (int dj = -ring; dj <= ring; ++dj) {
            for (int di = -ring; di <= ring; ++di) {
                if (ring > 0 && std::abs(di) != ring && std::abs(dj) != ring) continue;
                int i = ci + di, j = cj + dj;
                if (i < 0 || i >= nx_ || j < 0 || j >= ny_) continue;
                for (int t : bins_[static_cast<size_t>(j) * nx_ + i]) {
                    const auto& tr = mesh_.triangles[t];
                    const Vec2 &a = mesh_.nodes[tr[0]], &b = mesh_.nodes[tr[1]], &c = mesh_.nodes[tr[2]];
                    double den = (b - a).cross(c - a);
                    if (den <= 0) continue;
                    double l1 = (p - a).cross(c - a) / den;
                    double l2 = (b - a).cross(p - a) / den;
                    double l0 = 1 - l1 - l2;
                    double neg = std::min({l0, l1, l2});
                    if (neg > best_neg) {
                        best_neg = neg;
                        best = t;
                        best_bary = {l0, l1, l2};
                    }
                }
            }
        }
    }
    // Accept points marginally outside (boundary roundoff).
    if (best < 0 || best_neg < -0.05) return -1;
    if (bary) {
        double l0 = std::max(best_bary[0], 0.0), l1 = std::max(best_bary[1], 0.0),
               l2 = std::max(best_bary[2], 0.0);
        double s = l0 + l1 + l2;
        *bary = {l0 / s, l1 / s, l2 / s};
    }
    return best;
}

double MeshLocator::interpolate(const ScalarField& f, const Vec2& p) const {
    std::array<double, 3> bary;
    int t = locate(p, &bary);
    if (t < 0) throw Error(ErrorKind::NonFiniteIntegrand, "interpolation point outside mesh");
    const auto& tr = mesh_.triangles[t];
    return bary[0] * f[tr[0]] + bary[1] * f[tr[1]] + bary[2] * f[tr[2]];
}

}  // namespace mfe
