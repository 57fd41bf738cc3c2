#include "lidskii/evolution.hpp"

#include "lidskii/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <memory>
#include <sstream>

namespace lidskii {

namespace {

/// Jordan description of W^{-1} from a structured W: the root subspaces agree
/// blockwise; within a block the chain basis comes from the staircase of the
/// small matrix J_k(w)^{-1} - w^{-1} I.
OperatorSpec invert_structured(const OperatorSpec& W) {
    const auto& sf = *W.structured;
    const int n = W.dimension;
    std::vector<JordanBlock> blocks;
    Matrix basis(n, n);
    int at = 0;
    for (const auto& b : sf.blocks) {
        if (std::abs(b.eigenvalue) == 0.0) throw Error("cauchy problem: W must be invertible");
        const int k = b.size;
        Matrix Jb = Matrix::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            Jb(i, i) = b.eigenvalue;
            if (i + 1 < k) Jb(i, i + 1) = 1.0;
        }
        Matrix M = Jb.partialPivLu().solve(Matrix::Identity(k, k));
        // chain basis for the single eigenvalue 1/w
        OperatorSpec small = make_operator(M, "block");
        SpectralDecomposition sd = decompose(small, 1e-11);
        if (sd.groups.size() != 1 || sd.groups[0].chains.size() != 1)
            throw Error("cauchy problem: unexpected block structure in W^{-1}");
        Matrix T(k, k);
        for (int i = 0; i < k; ++i) T.col(i) = sd.groups[0].chains[0].e[i];
        basis.block(0, at, n, k) = sf.basis.middleCols(at, k) * T;
        blocks.push_back({1.0 / b.eigenvalue, k});
        at += k;
    }
    return make_structured_operator(blocks, basis, W.label + "^-1");
}

Vector shifted_solve(const Matrix& W, Complex lambda, const Vector& h) {
    Matrix M = W - lambda * Matrix::Identity(W.rows(), W.cols());
    return refined_solve(M, h);
}

struct SeriesData {
    SpectralDecomposition decomp;
    Vector raw;
    SummationSchedule schedule;
};

SeriesData series_data(const CauchyProblem& p) {
    SeriesData d;
    d.decomp = build_biorthogonal(decompose(p.A), p.A);
    d.raw = raw_coefficients(d.decomp, p.h);
    double tau = 1.0 / (2.0 * p.alpha);
    double K = 0.5;
    d.schedule = group_schedule(d.decomp, tau, K);
    return d;
}

bool is_normal(const Matrix& W) {
    const double scale = std::max(W.norm(), 1e-300);
    return (W * W.adjoint() - W.adjoint() * W).norm() <= 1e-10 * scale * scale;
}

}  // namespace

CauchyProblem make_cauchy_problem(OperatorSpec W, Vector h, double alpha) {
    if (!(alpha > 1.0)) throw Error("cauchy problem: alpha must exceed 1");
    validate_operator(W);
    if (h.size() != W.dimension) throw Error("cauchy problem: initial value size mismatch");

    CauchyProblem p;
    RealVector sv = singular_values(W);
    const double smin = sv.minCoeff();
    if (smin <= 1e-14 * sv.maxCoeff()) {
        std::ostringstream msg;
        msg << "cauchy problem: W is numerically singular (condition "
            << (smin > 0 ? sv.maxCoeff() / smin : std::numeric_limits<double>::infinity()) << ")";
        throw Error(msg.str());
    }
    p.condition_W = sv.maxCoeff() / smin;
    if (W.structured) {
        p.A = invert_structured(W);
    } else {
        Matrix Ainv = W.dense.partialPivLu().solve(Matrix::Identity(W.dimension, W.dimension));
        p.A = make_operator(std::move(Ainv), W.label + "^-1");
    }
    p.sector_A = estimate_sector(p.A, std::max(64, 8 * W.dimension));
    p.W = std::move(W);
    p.h = std::move(h);
    p.alpha = alpha;
    return p;
}

Trajectory solve_cauchy(const CauchyProblem& problem, const std::vector<double>& t_grid,
                        EvolutionBackend backend, double tolerance, int threads) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0)) throw Error("solve_cauchy: grid values must be positive");
        if (i > 0 && t_grid[i] <= t_grid[i - 1])
            throw Error("solve_cauchy: grid must be strictly increasing");
    }

    Trajectory traj;
    traj.t_grid = t_grid;
    traj.backend = backend;
    double nominal_error = 1e-12;

    switch (backend) {
        case EvolutionBackend::contour: {
            const double limit = kPi / (2.0 * problem.alpha);
            if (problem.sector_A.semi_angle >= limit)
                throw Error(
                    "solve_cauchy: sector of A too wide for this alpha; select the Gamma_A contour "
                    "explicitly");
            // A(I - lambda A)^{-1} h = (W - lambda I)^{-1} h, so each point is a
            // quadrature of e^{-lambda^alpha t} (W - lambda)^{-1} h.
            auto problem_copy = std::make_shared<CauchyProblem>(problem);
            const double tol = tolerance;
            auto solve_point = [problem_copy, tol](double t) -> QuadratureResult {
                ContourSpec c = build_contour(ContourKind::gamma_B, problem_copy->A,
                                              problem_copy->sector_A, t, problem_copy->alpha, tol);
                return integrate_resolvent_functional(problem_copy->A, problem_copy->h, t,
                                                      problem_copy->alpha, c, tol);
            };
            traj.eval = [solve_point](double t) { return solve_point(t).value; };
            traj.values.resize(t_grid.size());
            traj.error_estimate.resize(t_grid.size());
            parallel_for(t_grid.size(), threads, [&](std::size_t i) {
                QuadratureResult qr = solve_point(t_grid[i]);
                traj.values[i] = qr.value;
                traj.error_estimate[i] = qr.panel_error_estimate + qr.truncation_bound;
            });
            return traj;
        }
        case EvolutionBackend::series: {
            auto data = std::make_shared<SeriesData>(series_data(problem));
            const double alpha = problem.alpha;
            traj.eval = [data, alpha](double t) -> Vector {
                RegularizedCoefficients ct =
                    regularized_coefficients(data->decomp, data->raw, t, alpha);
                return grouped_partial_sums(data->decomp, ct, data->schedule).total;
            };
            break;
        }
        case EvolutionBackend::eigen_oracle: {
            if (!is_normal(problem.W.dense))
                throw Error("solve_cauchy: eigen-oracle backend requires a normal W");
            Eigen::ComplexSchur<Matrix> schur(problem.W.dense);
            const Matrix U = schur.matrixU();
            Vector w(problem.W.dimension);
            for (int i = 0; i < problem.W.dimension; ++i) w[i] = schur.matrixT()(i, i);
            Vector hu = U.adjoint() * problem.h;
            const double alpha = problem.alpha;
            traj.eval = [U, w, hu, alpha](double t) -> Vector {
                Vector c(hu.size());
                for (int i = 0; i < hu.size(); ++i)
                    c[i] = std::exp(-principal_pow(w[i], alpha) * t) * hu[i];
                return U * c;
            };
            nominal_error = 1e-14;
            break;
        }
    }
    traj.values.resize(t_grid.size());
    traj.error_estimate.assign(t_grid.size(), nominal_error);
    parallel_for(t_grid.size(), threads, [&](std::size_t i) { traj.values[i] = traj.eval(t_grid[i]); });
    return traj;
}

Vector rl_fractional_derivative(const std::function<Vector(double)>& f, double alpha, double t,
                                double horizon, double tolerance, double* tail_bound) {
    if (!(alpha > 1.0)) throw Error("rl_fractional_derivative: alpha must exceed 1");
    if (!(t > 0.0)) throw Error("rl_fractional_derivative: t must be positive");
    const int dim = static_cast<int>(f(t).size());

    // choose the cut from the observed decay when not given
    double X = horizon;
    double decay_rate = 0.0;
    {
        double x1 = std::max(4.0, 2.0 * t), prev = f(t + x1 / 2.0).norm(), cur = f(t + x1).norm();
        int guard = 0;
        while (guard++ < 60) {
            if (cur <= 1e-300) break;
            decay_rate = std::log(std::max(prev, 1e-300) / cur) / (x1 / 2.0);
            if (decay_rate <= 1e-12)
                throw Error("rl_fractional_derivative: integrand does not decay (divergent integral)");
            const double tail = cur * std::pow(x1, -1.0 / alpha) / decay_rate;
            if (horizon > 0.0 && x1 >= horizon) {
                if (tail > tolerance)
                    throw Error("rl_fractional_derivative: horizon insufficient for the tolerance");
                break;
            }
            if (horizon <= 0.0 && tail < 0.1 * tolerance) break;
            x1 *= 2.0;
            prev = cur;
            cur = f(t + x1).norm();
        }
        X = (horizon > 0.0) ? horizon : x1;
        if (tail_bound)
            *tail_bound = cur * std::pow(x1, -1.0 / alpha) / std::max(decay_rate, 1e-300);
    }

    // inner integral G(s) = int_0^X f(s+x) x^{-1/alpha} dx
    const double sexp = alpha / (alpha - 1.0);
    auto G = [&](double s) -> Vector {
        // [0, 1]: x = y^{alpha/(alpha-1)} removes the singularity
        auto smooth = [&](double y) -> Vector { return (alpha / (alpha - 1.0)) * f(s + std::pow(y, sexp)); };
        AdaptiveResult head = integrate_adaptive(smooth, 0.0, 1.0, dim, tolerance);
        // [1, X]: geometric panels
        auto plain = [&](double x) -> Vector { return std::pow(x, -1.0 / alpha) * f(s + x); };
        std::vector<double> breaks;
        for (double b = 2.0; b < X; b *= 2.0) breaks.push_back(b);
        AdaptiveResult tail = integrate_adaptive(plain, 1.0, X, dim, tolerance, breaks);
        return head.value + tail.value;
    };

    // fourth-order central stencil on the smooth inner integral
    const double h = std::max(1e-4, 1e-3 * t);
    Vector d = (-G(t + 2.0 * h) + 8.0 * G(t + h) - 8.0 * G(t - h) + G(t - 2.0 * h)) / (12.0 * h);
    return -d / std::tgamma(1.0 - 1.0 / alpha);
}

GammaTailCheck gamma_tail_identity(Complex lambda, double alpha, double tolerance) {
    if (!(alpha > 1.0)) throw Error("gamma_tail_identity: alpha must exceed 1");
    const Complex lam_alpha = principal_pow(lambda, alpha);
    if (!(lam_alpha.real() > 0.0))
        throw Error("gamma_tail_identity: Re lambda^alpha must be positive");

    const double sexp = alpha / (alpha - 1.0);
    auto smooth = [&](double y) -> Vector {
        Vector v(1);
        v[0] = (alpha / (alpha - 1.0)) * std::exp(-lam_alpha * std::pow(y, sexp));
        return v;
    };
    AdaptiveResult head = integrate_adaptive(smooth, 0.0, 1.0, 1, tolerance);
    double X = 1.0;
    while (std::exp(-lam_alpha.real() * X) / lam_alpha.real() > 0.01 * tolerance && X < 1e6) X *= 2.0;
    auto plain = [&](double x) -> Vector {
        Vector v(1);
        v[0] = std::pow(x, -1.0 / alpha) * std::exp(-lam_alpha * x);
        return v;
    };
    std::vector<double> breaks;
    for (double b = 2.0; b < X; b *= 2.0) breaks.push_back(b);
    AdaptiveResult tail = integrate_adaptive(plain, 1.0, X, 1, tolerance, breaks);

    GammaTailCheck out;
    out.lhs = head.value[0] + tail.value[0];
    out.rhs = std::tgamma(1.0 - 1.0 / alpha) * principal_pow(lambda, 1.0 - alpha);
    out.rel_err = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
    return out;
}

SolutionReport verify_solution(const CauchyProblem& problem, const Trajectory& trajectory,
                               const SolutionChecks& checks) {
    SolutionReport rep;
    if (!trajectory.eval) throw Error("verify_solution: trajectory has no evaluator");

    if (checks.residual) {
        if (trajectory.t_grid.size() < 3) {
            rep.residual_note = "skipped: grid too coarse (need at least 3 points)";
        } else {
            rep.residual_checked = true;
            for (std::size_t i = 1; i + 1 < trajectory.t_grid.size(); ++i) {
                const double t = trajectory.t_grid[i];
                Vector du = rl_fractional_derivative(trajectory.eval, problem.alpha, t,
                                                     /*horizon=*/0.0, 1e-10);
                Vector wu = problem.W.dense * trajectory.eval(t);
                const double denom = std::max(wu.norm(), 1e-300);
                rep.max_residual = std::max(rep.max_residual, (du - wu).norm() / denom);
            }
        }
    }

    if (checks.initial) {
        rep.initial_checked = true;
        rep.initial_monotone = true;
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 6; ++k) {
            const double t = std::pow(10.0, -k);
            const double err = (trajectory.eval(t) - problem.h).norm();
            rep.initial_errors.push_back(err);
            if (err > prev * (1.0 + 1e-9)) rep.initial_monotone = false;
            prev = err;
        }
        rep.initial_final_error = rep.initial_errors.back();
    }

    if (checks.contraction) {
        // gated to spectra inside the decay sector |arg w| < pi/(2 alpha)
        Vector w = operator_eigenvalues(problem.W);
        bool in_sector = true;
        for (int i = 0; i < w.size(); ++i)
            if (std::abs(std::arg(w[i])) >= kPi / (2.0 * problem.alpha)) in_sector = false;
        if (!in_sector) {
            rep.contraction_note = "skipped: spectrum outside the decay sector (surrogate check)";
        } else {
            rep.contraction_checked = true;
            rep.contraction_ok = true;
            rep.contraction_note = "surrogate: decay-sector family";
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < trajectory.values.size(); ++i) {
                const double n = trajectory.values[i].norm();
                if (n > prev * (1.0 + 1e-10)) rep.contraction_ok = false;
                prev = n;
            }
        }
    }
    return rep;
}

}  // namespace lidskii
