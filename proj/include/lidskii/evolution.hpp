#pragma once

#include "lidskii/abel.hpp"
#include "lidskii/contour.hpp"
#include "lidskii/spectral.hpp"

#include <functional>
#include <vector>

namespace lidskii {

/// Cauchy problem D^{1/alpha}_- u = W u, u(0) = h, solved through the compact
/// surrogate A = W^{-1}.
struct CauchyProblem {
    OperatorSpec W;
    OperatorSpec A;  // W^{-1}
    Vector h;
    double alpha = 2.0;  // > 1
    SectorEstimate sector_A;
    double condition_W = 0.0;
};

CauchyProblem make_cauchy_problem(OperatorSpec W, Vector h, double alpha);

enum class EvolutionBackend { contour, series, eigen_oracle };

struct Trajectory {
    std::vector<double> t_grid;
    std::vector<Vector> values;
    EvolutionBackend backend = EvolutionBackend::series;
    std::vector<double> error_estimate;
    std::function<Vector(double)> eval;  // continuous evaluator bound to the backend
};

/// Grid points are independent contour integrals / series evaluations;
/// `threads` > 1 maps them over a worker pool with an index-ordered reduction.
Trajectory solve_cauchy(const CauchyProblem& problem, const std::vector<double>& t_grid,
                        EvolutionBackend backend, double tolerance = 1e-10, int threads = 1);

/// Right-sided Riemann-Liouville derivative
/// D^{1/alpha}_- f(t) = -(1/Gamma(1-1/alpha)) d/dt int_0^infty f(t+x) x^{-1/alpha} dx.
/// The x-singularity is removed by the substitution x = s^{alpha/(alpha-1)};
/// the outer derivative uses a fourth-order central stencil. `horizon` <= 0
/// selects an automatic cut from the observed decay; throws if f does not decay.
Vector rl_fractional_derivative(const std::function<Vector(double)>& f, double alpha, double t,
                                double horizon, double tolerance, double* tail_bound = nullptr);

struct GammaTailCheck {
    Complex lhs;  // quadrature of int_0^infty x^{-1/alpha} e^{-lambda^alpha x} dx
    Complex rhs;  // Gamma(1-1/alpha) lambda^{1-alpha}
    double rel_err = 0.0;
};

GammaTailCheck gamma_tail_identity(Complex lambda, double alpha, double tolerance = 1e-12);

struct SolutionChecks {
    bool residual = true;
    bool initial = true;
    bool contraction = true;
};

struct SolutionReport {
    bool residual_checked = false;
    double max_residual = 0.0;
    std::string residual_note;

    bool initial_checked = false;
    bool initial_monotone = false;
    double initial_final_error = 0.0;
    std::vector<double> initial_errors;  // along t = 1e-1 ... 1e-6

    bool contraction_checked = false;
    bool contraction_ok = false;
    std::string contraction_note;  // labeled "surrogate" when gated
};

SolutionReport verify_solution(const CauchyProblem& problem, const Trajectory& trajectory,
                               const SolutionChecks& checks = {});

}  // namespace lidskii
