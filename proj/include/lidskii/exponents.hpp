#pragma once

#include "lidskii/operator_core.hpp"

#include <optional>
#include <vector>

namespace lidskii {

/// A positive nondecreasing modulus sequence, optionally carrying the full
/// complex points and/or a generating model with an asymptotic counting
/// function for tail integrals.
struct ModulusSequence {
    enum class Model { none, e1, e2 };

    std::vector<double> moduli;
    std::optional<std::vector<Complex>> points;
    Model model = Model::none;
    double rho = 0.0;    // E1 parameter
    double kappa = 0.0;  // E2 parameters
    double q = 0.0;

    std::size_t size() const { return moduli.size(); }
    /// Asymptotic counting function of the generating model (model != none).
    double model_counting(double t) const;
};

ModulusSequence make_sequence(std::vector<double> moduli);
ModulusSequence make_sequence(std::vector<Complex> points);

/// n(r) = #{ n : |a_n| < r }, strict inequality.
long counting_function(const ModulusSequence& seq, double r);

struct ExponentReport {
    double rho_hat = 0.0;
    int genus = 0;
    double density_hat = 0.0;
    struct Diagnostics {
        double fit_r_lo = 0.0, fit_r_hi = 0.0;
        double fit_residual = 0.0;
        bool near_integer = false;  // |rho_hat - round(rho_hat)| < 0.05
    } diagnostics;
};

/// rho from a log-log slope fit over the last two decades of r, genus from a
/// dyadic increment-ratio convergence test, density from the tail supremum.
ExponentReport convergence_exponent(const ModulusSequence& seq, long horizon);

/// Tail supremum estimate of n(r)/r^rho over the last decade.
double upper_density(const ModulusSequence& seq, double rho, long horizon);

struct BetaProfile {
    std::vector<double> r;
    std::vector<double> beta;
    std::vector<double> beta_ln_r;
    int p = 0;
    double rho1 = 0.0;
    std::vector<double> truncation_bound;
};

/// beta(r) = r^{p-rho1} ( int_0^r n(t)/t^{p+1} dt + r int_r^infty n(t)/t^{p+2} dt ),
/// step integrals evaluated in closed form; the tail beyond the stored horizon
/// uses the model's asymptotic counting function when one is present.
BetaProfile beta_profile(const ModulusSequence& seq, int p, double rho1,
                         const std::vector<double>& r_grid);

/// Truncated canonical product Prod_{n<=terms} G(z/a_n, p),
/// G(w,p) = (1-w) exp(w + ... + w^p/p).
Complex canonical_product(const ModulusSequence& seq, int p, Complex z, long terms);

/// Example-1 model: a_n realized by inverting n(r) = r^rho / (ln r ln ln r).
ModulusSequence generate_model_sequence_e1(double rho, long count);

/// Example-2 model: lambda_i = i^kappa ln^kappa(i+q) lnln^kappa(i+q),
/// kappa in (0,1], q > e^e - 1.
ModulusSequence generate_model_sequence_e2(double kappa, double q, long count);

/// Certified divergence of sum lambda_i^{-1/kappa}: returns ln ln ln of an index
/// N with partial sum > M, from the term-vs-integral lower bound
/// S(N) >= lnlnln(N+1+q) - lnlnln(1+q).
double e2_divergence_certificate(double q, double M);

struct CircleBoundReport {
    double R_tilde = 0.0;
    double max_norm = 0.0;
    double bound = 0.0;
    bool satisfied = false;
};

/// Lemma-5 bound value e^{gamma |lambda|^varrho} |lambda|^m, m = floor(varrho).
double circle_bound_value(double gamma, double abs_lambda, double varrho);

/// Scans radii in ((1-delta) R, R), returns the circle minimizing the max
/// resolvent norm and whether the Lemma-5 bound (gamma built from the
/// beta-function of the B^{m+1} singular-value counting function) holds there.
CircleBoundReport lemma5_circle_bound(const OperatorSpec& op, double R, double delta,
                                      double varrho, int probes, int radii = 64);

}  // namespace lidskii
