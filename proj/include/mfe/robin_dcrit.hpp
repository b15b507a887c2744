#pragma once

#include <array>

#include "mfe/laplace.hpp"

namespace mfe {

// The weight h of the general problem; log h is polynomial so harmonicity is a
// coefficient-level property. The quartic variant (-t x1^4) breaks it and is
// carried as an explicit extra term for perturbation experiments.
struct WeightSpec {
    enum class Kind { ConstantOne, ExpHarmonic, ExpHarmonicPlusQuartic };

    struct Monomial {
        int i = 0, j = 0;
        double c = 0.0;
    };

    Kind kind = Kind::ConstantOne;
    std::vector<Monomial> coeffs;  // log h harmonic part
    double t = 0.0;                // coefficient of -t * x1^4

    static WeightSpec one() { return {}; }
    static WeightSpec exp_harmonic(std::vector<Monomial> c);
    static WeightSpec exp_harmonic_plus_quartic(std::vector<Monomial> c, double t);

    bool log_harmonic() const { return kind != Kind::ExpHarmonicPlusQuartic; }
    double harmonic_part(const Vec2& p) const;
    double quartic_part(const Vec2& p) const { return -t * p.x * p.x * p.x * p.x; }
    double log_h(const Vec2& p) const { return harmonic_part(p) + quartic_part(p); }
    double h(const Vec2& p) const { return std::exp(log_h(p)); }
    Vec2 grad_log_h(const Vec2& p) const;
    // Throws InvalidConfig unless the stored polynomial is harmonic.
    void validate() const;
};

// Smooth local surrogate of Phi(x) = log h(x) + 8 pi G~(x, q), built from a
// Fourier analysis of the interpolated field on a circle around q. Phi is
// harmonic, so the circle data determines it inside; within switch_radius the
// series replaces the raw P1 field, filtering interpolation noise that the
// 1/|x-q|^4 kernels would otherwise amplify.
class HarmonicLocalModel {
public:
    HarmonicLocalModel(const LaplaceSolver& solver, const RobinData& robin,
                       const WeightSpec& h, double sample_radius, int n_modes = 24,
                       int n_samples = 512);

    const Vec2& q() const { return q_; }
    double sample_radius() const { return rs_; }
    double switch_radius() const { return 0.6 * rs_; }
    // Full Phi, series inside switch_radius, interpolated field outside.
    double phi(const Vec2& x) const;
    double phi_series(double r, double theta) const;  // harmonic part + quartic
    double phi_at_q() const;
    Vec2 grad_at_q() const;
    // Hessian (hxx, hxy, hyy) of the harmonic part at q (trace free).
    std::array<double, 3> harmonic_hessian_at_q() const;
    double circle_range() const { return range_; }

private:
    const LaplaceSolver& solver_;
    const RobinData& robin_;
    const WeightSpec& weight_;
    Vec2 q_;
    double rs_;
    std::vector<double> ak_, bk_;  // cos/sin coefficients, scaled to radius rs_
    double range_ = 0.0;
};

struct MaxPointResult {
    Vec2 q;
    double value = 0.0;                    // log h + 4 pi gamma at q
    double grad_norm = 0.0;                // from the final quadratic fit
    std::array<double, 3> hessian{};       // (hxx, hxy, hyy)
    double field_range = 0.0;              // nodal field max - min
    bool hessian_negative_definite = false;
    bool degenerate_ring = false;          // near-zero curvature direction
    double gamma_q = 0.0;
};

MaxPointResult find_max_point(const LaplaceSolver& solver, const WeightSpec& h);
MaxPointResult find_max_point(const Mesh& mesh, const WeightSpec& h);

// Angular rule for the inner-ball term; uniform symmetric pairs by default.
// Exposed so the cancellation property is testable against lopsided rules.
struct AngularRule {
    std::vector<double> theta;
    std::vector<double> weight;  // sums to 2 pi

    static AngularRule uniform(int m);
};

// integral over B(q,delta) of (r_hat - 1)/|x-q|^4 dx evaluated on the series
// model, radial floor r_floor >= 0 (0 means the full ball).
double inner_ball_term(const HarmonicLocalModel& model, double delta,
                       const AngularRule& rule, double r_floor = 0.0);

struct DCritOptions {
    double delta = 0.0;          // 0: auto = 0.4 * dist(q, boundary)
    double grad_tol = 0.05;      // on |grad Phi(q)| * delta, relative to field scale
    int angular_nodes = 64;
};

double compute_D(const DomainSpec& spec, const LaplaceSolver& solver, const WeightSpec& h,
                 const Vec2& q, const RobinData& robin, double delta,
                 double* grad_norm_out = nullptr, const DCritOptions& opt = {});

enum class Verdict { FirstKind, SecondKind };

struct DCritReport {
    Vec2 q;
    double gamma_q = 0.0;
    double grad_norm = 0.0;
    std::array<double, 3> hessian{};
    double D_value = 0.0;
    double delta_used = 0.0;
    Verdict verdict = Verdict::FirstKind;
    bool hessian_negative_definite = false;
    bool degenerate_ring = false;
    double max_value = 0.0;  // sup of log h + 4 pi gamma
};

DCritReport classify(const DomainSpec& spec, const Mesh& mesh, const WeightSpec& h);
DCritReport classify(const DomainSpec& spec, const LaplaceSolver& solver, const WeightSpec& h);

}  // namespace mfe
