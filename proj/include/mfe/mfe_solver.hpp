#pragma once

#include "mfe/robin_dcrit.hpp"

namespace mfe {

// One converged solution of the mean field problem at a given rho, with the
// blow-up and stability diagnostics attached.
struct SolutionPoint {
    double rho = 0.0;
    ScalarField u;
    double lambda_blow = 0.0;       // max u - log integral h e^u
    double eig1_weighted = 0.0;     // first eigenvalue, V = rho h e^u / integral
    bool nonlocal_nonsingular = true;
    double I_value = 0.0;
    double energy_E = 0.0;          // (1/2 rho^2) integral |grad u|^2
    double entropy_S = 0.0;         // -integral rho_hat log rho_hat
    double log_mass = 0.0;          // log integral h e^u
    double max_u = 0.0;
    Vec2 argmax_x;
    double residual = 0.0;          // relative nonlinear residual
    bool converged = false;
    bool requested = false;         // landed on a caller-requested rho
};

enum class BranchTermination { ConvergedAt8Pi, BlowupDetected, StepUnderflow };

struct Branch {
    std::vector<SolutionPoint> points;
    BranchTermination termination = BranchTermination::StepUnderflow;
    double lambda_cap = 12.0;
};

double evaluate_I(const Mesh& mesh, const WeightSpec& h, double rho, const ScalarField& u);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 60;
    bool diagnostics = true;  // fill eigenvalue and entropy fields
};

SolutionPoint newton_solve(const Mesh& mesh, const WeightSpec& h, double rho,
                           const ScalarField& init, const NewtonOptions& opt = {});

struct ContinuationOptions {
    std::vector<double> rho_required;  // ascending, each < 8 pi; always landed on
    double lambda_cap = 12.0;
    double rho_start = 0.25;
    double first_step = 0.5;
    bool diagnostics_each = true;
};

Branch continue_branch(const Mesh& mesh, const WeightSpec& h, const ContinuationOptions& opt = {});
// Reuses a prebuilt solver (stiffness factorization shared with other stages).
Branch continue_branch(const LaplaceSolver& solver, const WeightSpec& h,
                       const ContinuationOptions& opt = {});

// Least-squares fit of log(8 pi - rho) against lambda_blow over the blow-up
// tail (lambda > 5, at least 6 points). Returns (slope, intercept).
std::pair<double, double> fit_blowup_rate(const Branch& branch);

struct TestFunctionEnergyResult {
    std::vector<std::pair<double, double>> samples;  // (eps, I_8pi(v_eps))
    double C0 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double D_estimate = 0.0;
    double C0_check = 0.0;
    double sigma = 1.0;  // recentering scale actually used
};

// Energy of the paper-style glued test functions, evaluated semi-analytically
// (ray quadrature + local harmonic model), fitted as C0 + c2 eps^2 + c3 eps^3.
TestFunctionEnergyResult test_function_energy(const DomainSpec& spec, const LaplaceSolver& solver,
                                              const RobinData& robin, const WeightSpec& h,
                                              const std::vector<double>& eps_list = {},
                                              double sigma_override = 0.0);

// First k eigenvalues of the weighted problem at a converged point, plus the
// invertibility flag of the full nonlocal linearization.
std::vector<double> linearized_spectrum(const SolutionPoint& point, int k,
                                        const WeightSpec& h,
                                        bool* nonlocal_nonsingular = nullptr);

}  // namespace mfe
