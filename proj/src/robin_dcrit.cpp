#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "mfe/detail/gauss.hpp"
#include "mfe/robin_dcrit.hpp"

namespace mfe {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2 * kPi;

using detail::kGaussW16;
using detail::kGaussX16;

}  // namespace

WeightSpec WeightSpec::exp_harmonic(std::vector<Monomial> c) {
    WeightSpec w;
    w.kind = Kind::ExpHarmonic;
    w.coeffs = std::move(c);
    w.validate();
    return w;
}

WeightSpec WeightSpec::exp_harmonic_plus_quartic(std::vector<Monomial> c, double t) {
    WeightSpec w;
    w.kind = Kind::ExpHarmonicPlusQuartic;
    w.coeffs = std::move(c);
    w.t = t;
    w.validate();
    return w;
}

double WeightSpec::harmonic_part(const Vec2& p) const {
    double v = 0.0;
    for (const Monomial& m : coeffs)
        v += m.c * std::pow(p.x, m.i) * std::pow(p.y, m.j);
    return v;
}

Vec2 WeightSpec::grad_log_h(const Vec2& p) const {
    Vec2 g{0, 0};
    for (const Monomial& m : coeffs) {
        if (m.i > 0) g.x += m.c * m.i * std::pow(p.x, m.i - 1) * std::pow(p.y, m.j);
        if (m.j > 0) g.y += m.c * m.j * std::pow(p.x, m.i) * std::pow(p.y, m.j - 1);
    }
    g.x += -4.0 * t * p.x * p.x * p.x;
    return g;
}

void WeightSpec::validate() const {
    // Laplacian of the polynomial must vanish coefficient by coefficient.
    int deg = 0;
    for (const Monomial& m : coeffs) {
        if (m.i < 0 || m.j < 0) throw Error(ErrorKind::InvalidConfig, "negative monomial exponent");
        deg = std::max(deg, m.i + m.j);
    }
    std::vector<std::vector<double>> c(deg + 1, std::vector<double>(deg + 1, 0.0));
    double scale = 1.0;
    for (const Monomial& m : coeffs) {
        c[m.i][m.j] += m.c;
        scale = std::max(scale, std::abs(m.c));
    }
    for (int a = 0; a + 2 <= deg; ++a)
        for (int b = 0; a + b + 2 <= deg; ++b) {
            double lap = (a + 2.0) * (a + 1.0) * c[a + 2][b] + (b + 2.0) * (b + 1.0) * c[a][b + 2];
            if (std::abs(lap) > 1e-12 * scale)
                throw Error(ErrorKind::InvalidConfig, "log h polynomial is not harmonic");
        }
}

HarmonicLocalModel::HarmonicLocalModel(const LaplaceSolver& solver, const RobinData& robin,
                                       const WeightSpec& h, double sample_radius, int n_modes,
                                       int n_samples)
    : solver_(solver), robin_(robin), weight_(h), q_(robin.q), rs_(sample_radius) {
    // DFT of the harmonic part of Phi restricted to the sample circle.
    std::vector<double> vals(n_samples);
    double lo = 1e300, hi = -1e300;
    for (int s = 0; s < n_samples; ++s) {
        double th = kTwoPi * s / n_samples;
        Vec2 x = q_ + Vec2{rs_ * std::cos(th), rs_ * std::sin(th)};
        double v = h.harmonic_part(x) +
                   8 * kPi * solver_.locator().interpolate(robin_.regular_part, x);
        vals[s] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    range_ = hi - lo;
    ak_.assign(n_modes + 1, 0.0);
    bk_.assign(n_modes + 1, 0.0);
    for (int k = 0; k <= n_modes; ++k) {
        double ca = 0, cb = 0;
        for (int s = 0; s < n_samples; ++s) {
            double th = kTwoPi * s / n_samples;
            ca += vals[s] * std::cos(k * th);
            cb += vals[s] * std::sin(k * th);
        }
        double norm = (k == 0) ? 1.0 / n_samples : 2.0 / n_samples;
        ak_[k] = ca * norm;
        bk_[k] = cb * norm;
    }
}

double HarmonicLocalModel::phi_series(double r, double theta) const {
    // Harmonic expansion: sum_k (r/rs)^k (a_k cos k theta + b_k sin k theta).
    double v = ak_[0];
    double ratio = r / rs_;
    double pw = 1.0;
    for (size_t k = 1; k < ak_.size(); ++k) {
        pw *= ratio;
        v += pw * (ak_[k] * std::cos(k * theta) + bk_[k] * std::sin(k * theta));
    }
    Vec2 x = q_ + Vec2{r * std::cos(theta), r * std::sin(theta)};
    return v + weight_.quartic_part(x);
}

double HarmonicLocalModel::phi(const Vec2& x) const {
    Vec2 d = x - q_;
    double r = d.norm();
    if (r <= switch_radius()) return phi_series(r, std::atan2(d.y, d.x));
    return weight_.harmonic_part(x) +
           8 * kPi * solver_.locator().interpolate(robin_.regular_part, x) +
           weight_.quartic_part(x);
}

double HarmonicLocalModel::phi_at_q() const { return ak_[0] + weight_.quartic_part(q_); }

Vec2 HarmonicLocalModel::grad_at_q() const {
    Vec2 g{ak_[1] / rs_, bk_[1] / rs_};
    g.x += -4.0 * weight_.t * q_.x * q_.x * q_.x;
    return g;
}

std::array<double, 3> HarmonicLocalModel::harmonic_hessian_at_q() const {
    // r^2 cos 2t = x^2 - y^2 and r^2 sin 2t = 2xy.
    double a2 = ak_[2] / (rs_ * rs_), b2 = bk_[2] / (rs_ * rs_);
    return {2 * a2, 2 * b2, -2 * a2};
}

AngularRule AngularRule::uniform(int m) {
    AngularRule r;
    r.theta.resize(m);
    r.weight.assign(m, kTwoPi / m);
    for (int i = 0; i < m; ++i) r.theta[i] = kTwoPi * i / m;
    return r;
}

double inner_ball_term(const HarmonicLocalModel& model, double delta, const AngularRule& rule,
                       double r_floor) {
    double phi_q = model.phi_at_q();
    KahanSum sum;
    // Radial panels refine toward 0, where expm1(Phi - Phi(q))/r^3 flattens
    // only after the angular sum cancels the trace-free quadratic part.
    const int panels = 6;
    double edges[panels + 1];
    edges[0] = r_floor;
    for (int p = 1; p <= panels; ++p) {
        double f = static_cast<double>(p) / panels;
        edges[p] = r_floor + (delta - r_floor) * f * f;
    }
    for (size_t a = 0; a < rule.theta.size(); ++a) {
        double th = rule.theta[a];
        KahanSum radial;
        for (int p = 0; p < panels; ++p) {
            double mid = 0.5 * (edges[p] + edges[p + 1]);
            double half = 0.5 * (edges[p + 1] - edges[p]);
            for (int g = 0; g < 16; ++g) {
                double r = mid + half * kGaussX16[g];
                if (r <= 0) continue;
                double val = std::expm1(model.phi_series(r, th) - phi_q);
                radial.add(half * kGaussW16[g] * val / (r * r * r));
            }
        }
        sum.add(rule.weight[a] * radial.value());
    }
    return sum.value();
}

double compute_D(const DomainSpec& spec, const LaplaceSolver& solver, const WeightSpec& h,
                 const Vec2& q, const RobinData& robin, double delta, double* grad_norm_out,
                 const DCritOptions& opt) {
    double bdist = domain_boundary_distance(spec, q);
    if (delta <= 0) delta = opt.delta > 0 ? opt.delta : 0.4 * bdist;
    if (delta >= bdist) throw Error(ErrorKind::DeltaTooLarge, "B(q,delta) exits the domain");

    double rs = std::min(0.92 * bdist, std::max(delta / 0.55, 1.2 * delta));
    if (0.6 * rs < delta)
        throw Error(ErrorKind::DeltaTooLarge, "delta too large for the local model zone");

    HarmonicLocalModel model(solver, robin, h, rs);
    double phi_q = model.phi_at_q();
    Vec2 grad = model.grad_at_q();
    if (grad_norm_out) *grad_norm_out = grad.norm();
    double scale = std::max(model.circle_range(), 1.0);
    if (grad.norm() * delta > opt.grad_tol * scale)
        throw Error(ErrorKind::NotCritical,
                    "q fails the stationarity tolerance; D is defined only at critical points");

    auto f = [&](const Vec2& x) { return std::expm1(model.phi(x) - phi_q); };
    double outer = radial_quartic_integral(spec, q, delta, f);
    double inner = inner_ball_term(model, delta, AngularRule::uniform(opt.angular_nodes));
    double ext = exterior_inverse_quartic(spec, q, delta);
    return outer + inner - ext;
}

namespace {

struct QuadFit {
    Vec2 grad;
    std::array<double, 3> hess;  // hxx, hxy, hyy
    double center_value;
};

// Least-squares quartic in coordinates scaled by 1/s; the reported gradient
// and Hessian come from the low-order coefficients. The quartic tail absorbs
// the field's higher-order structure so ring radii can stay at a few h,
// averaging out P1 interpolation noise.
QuadFit fit_quartic(const Vec2& c, double s, const std::vector<Vec2>& pts,
                    const std::vector<double>& vals) {
    static const int ex[15] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0, 4, 3, 2, 1, 0};
    static const int ey[15] = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3, 0, 1, 2, 3, 4};
    int n = static_cast<int>(pts.size());
    Eigen::MatrixXd M(n, 15);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        double dx = (pts[i].x - c.x) / s, dy = (pts[i].y - c.y) / s;
        for (int j = 0; j < 15; ++j)
            M(i, j) = std::pow(dx, ex[j]) * std::pow(dy, ey[j]);
        rhs[i] = vals[i];
    }
    Eigen::VectorXd sol = M.colPivHouseholderQr().solve(rhs);
    QuadFit f;
    f.center_value = sol[0];
    f.grad = Vec2{sol[1] / s, sol[2] / s};
    f.hess = {2 * sol[3] / (s * s), sol[4] / (s * s), 2 * sol[5] / (s * s)};
    return f;
}

}  // namespace

MaxPointResult find_max_point(const LaplaceSolver& solver, const WeightSpec& h) {
    const Mesh& mesh = solver.mesh();
    ScalarField gamma = solver.robin_all_nodes();
    double best = -1e300;
    int best_node = -1;
    double lo = 1e300;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        if (mesh.is_boundary(i)) continue;
        double v = h.log_h(mesh.nodes[i]) + 4 * kPi * gamma[i];
        if (v > best) { best = v; best_node = i; }
        lo = std::min(lo, v);
    }
    if (best_node < 0) throw Error(ErrorKind::MeshFailure, "no interior nodes");
    auto hops = mesh.boundary_hops(4);
    if (hops[best_node] <= 2)
        throw Error(ErrorKind::MaximizerOnBoundaryRing,
                    "nodal maximizer within two edges of the boundary; refine the mesh");
    double field_range = best - lo;

    auto value_at = [&](const Vec2& p) {
        return h.log_h(p) + 4 * kPi * solver.green_regular(p).gamma_q;
    };

    Vec2 q = mesh.nodes[best_node];
    double h0 = mesh.target_h;
    QuadFit fit{};
    for (int round = 0; round < 6; ++round) {
        std::vector<Vec2> pts{q};
        std::vector<double> vals{value_at(q)};
        for (int ring = 0; ring < 2; ++ring) {
            double radius = (ring == 0) ? 2.0 * h0 : 3.5 * h0;
            double stagger = (ring == 0) ? 0.0 : kTwoPi / 24.0;
            for (int i = 0; i < 12; ++i) {
                double a = kTwoPi * i / 12.0 + stagger;
                Vec2 p = q + Vec2{radius * std::cos(a), radius * std::sin(a)};
                if (solver.min_boundary_distance(p) <= 2.0 * h0) continue;
                pts.push_back(p);
                vals.push_back(value_at(p));
            }
        }
        if (pts.size() < 18)
            throw Error(ErrorKind::MaximizerOnBoundaryRing, "polish stencil hits the boundary ring");
        fit = fit_quartic(q, 3.5 * h0, pts, vals);

        // Ascent step on the fitted quadratic part; flat or wrong-sign
        // curvature directions get a bounded gradient step instead.
        Eigen::Matrix2d H;
        H << fit.hess[0], fit.hess[1], fit.hess[1], fit.hess[2];
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
        Eigen::Vector2d g(fit.grad.x, fit.grad.y);
        double floor = std::max(es.eigenvalues().cwiseAbs().maxCoeff() * 1e-2, 1e-12);
        Eigen::Vector2d step = Eigen::Vector2d::Zero();
        for (int i = 0; i < 2; ++i) {
            double lam = es.eigenvalues()[i];
            double denom = (lam < -floor) ? lam : -floor;
            step += -(es.eigenvectors().col(i).dot(g) / denom) * es.eigenvectors().col(i);
        }
        double sn = step.norm();
        if (sn > 2.0 * h0) step *= 2.0 * h0 / sn;
        Vec2 qn{q.x + step[0], q.y + step[1]};
        if (solver.min_boundary_distance(qn) > 2.0 * h0) q = qn;
        if (sn < 1e-5 * h0) break;
    }

    MaxPointResult res;
    res.q = q;
    res.grad_norm = fit.grad.norm();
    res.hessian = fit.hess;
    res.field_range = field_range;
    double tr = fit.hess[0] + fit.hess[2];
    double det = fit.hess[0] * fit.hess[2] - fit.hess[1] * fit.hess[1];
    res.hessian_negative_definite = (tr < 0 && det > 0);
    double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    double l_big = std::abs(tr / 2 - disc), l_small = std::abs(tr / 2 + disc);
    if (l_small > l_big) std::swap(l_small, l_big);
    res.degenerate_ring = l_small < 5e-2 * l_big;
    RobinData rd = solver.green_regular(q);
    res.gamma_q = rd.gamma_q;
    res.value = h.log_h(q) + 4 * kPi * rd.gamma_q;
    return res;
}

MaxPointResult find_max_point(const Mesh& mesh, const WeightSpec& h) {
    LaplaceSolver solver(mesh);
    return find_max_point(solver, h);
}

DCritReport classify(const DomainSpec& spec, const LaplaceSolver& solver, const WeightSpec& h) {
    MaxPointResult mp = find_max_point(solver, h);
    RobinData robin = solver.green_regular(mp.q);
    double delta = 0.4 * domain_boundary_distance(spec, mp.q);
    DCritReport rep;
    rep.q = mp.q;
    rep.gamma_q = robin.gamma_q;
    rep.hessian = mp.hessian;
    rep.delta_used = delta;
    rep.degenerate_ring = mp.degenerate_ring;
    rep.max_value = mp.value;
    rep.D_value = compute_D(spec, solver, h, mp.q, robin, delta, &rep.grad_norm);
    rep.verdict = rep.D_value > 0 ? Verdict::SecondKind : Verdict::FirstKind;
    rep.hessian_negative_definite = mp.hessian_negative_definite;
    return rep;
}

DCritReport classify(const DomainSpec& spec, const Mesh& mesh, const WeightSpec& h) {
    LaplaceSolver solver(mesh);
    return classify(spec, solver, h);
}

}  // namespace mfe
