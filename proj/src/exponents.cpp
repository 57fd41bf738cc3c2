#include "lidskii/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lidskii {

namespace {

double loglog(double x) { return std::log(std::log(x)); }
double logloglog(double x) { return std::log(std::log(std::log(x))); }

/// E1 counting function n(r) = r^rho / (ln r ln ln r), r > e.
double e1_counting(double r, double rho) {
    if (r <= std::exp(1.0) + 1e-9) return 0.0;
    return std::pow(r, rho) / (std::log(r) * loglog(r));
}

/// E2 index function lambda(x) = (x ln(x+q) lnln(x+q))^kappa, increasing in x.
double e2_value(double x, double kappa, double q) {
    return std::pow(x * std::log(x + q) * loglog(x + q), kappa);
}

void require_nondecreasing_positive(const std::vector<double>& m) {
    double prev = 0.0;
    for (double v : m) {
        if (!(v > 0.0)) throw Error("modulus sequence: moduli must be strictly positive");
        if (v < prev) throw Error("modulus sequence: moduli must be nondecreasing");
        prev = v;
    }
}

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y, double* resid) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    if (resid) {
        double r2 = 0;
        const double b = my - slope * mx;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = y[i] - slope * x[i] - b;
            r2 += e * e;
        }
        *resid = std::sqrt(r2 / n);
    }
    return slope;
}

/// Exact step-function integral int_0^r n(t)/t^{p+1} dt.
double step_head_integral(const std::vector<double>& a, double r, int p) {
    double acc = 0.0;
    for (double ai : a) {
        if (ai >= r) break;
        acc += (p == 0) ? std::log(r / ai) : (std::pow(ai, -p) - std::pow(r, -p)) / p;
    }
    return acc;
}

/// Exact step-function integral int_r^H n(t)/t^{p+2} dt for the stored points,
/// where beyond the last stored modulus n stays constant; H = infinity.
double step_tail_integral(const std::vector<double>& a, double r, int p) {
    double acc = 0.0;
    for (double ai : a) acc += std::pow(std::max(r, ai), -(p + 1));
    return acc / (p + 1);
}

/// Numeric tail integral int_H^infty n_model(t)/t^{p+2} dt minus the constant
/// continuation N/( (p+1) H^{p+1} ) that the step integral already counted.
double model_tail_correction(const ModulusSequence& seq, int p, double* bound) {
    // n_model(t) ~ t^rho up to log factors; the tail integrand t^{rho-p-2} is
    // integrable only for p > rho - 1 (the log damping alone still diverges).
    const double rho_model =
        seq.model == ModulusSequence::Model::e1 ? seq.rho : 1.0 / seq.kappa;
    if (rho_model - p - 1.0 >= -1e-12)
        throw Error("beta_profile: model tail integral diverges; need p > rho - 1");
    const double H = seq.moduli.back();
    const double N = static_cast<double>(seq.size());
    // substitute t = H e^u: integral = int_0^inf n(H e^u) (H e^u)^{-(p+1)} du
    double acc = 0.0;
    double u = 0.0;
    const double du = 0.25;
    double prev_piece = std::numeric_limits<double>::infinity();
    double piece = 0.0;
    for (int step = 0; step < 4000; ++step) {
        piece = 0.0;
        for (int j = 0; j < 8; ++j) {
            const double uu = u + du * (j + 0.5) / 8.0;
            const double t = H * std::exp(uu);
            piece += seq.model_counting(t) * std::pow(t, -(p + 1)) * (du / 8.0);
        }
        acc += piece;
        u += du;
        if (step > 8 && piece < 1e-16 * std::max(acc, 1e-300)) break;
        if (step > 20 && piece >= 0.999 * prev_piece)
            throw Error("beta_profile: model tail integral diverges; need p > rho - 1");
        prev_piece = piece;
    }
    if (bound) *bound = piece;  // remainder estimate
    const double constant_part = N * std::pow(H, -(p + 1)) / (p + 1);
    return acc - constant_part;
}

}  // namespace

double ModulusSequence::model_counting(double t) const {
    switch (model) {
        case Model::e1:
            return e1_counting(t, rho);
        case Model::e2: {
            // invert lambda(x) = t by bisection
            if (t <= e2_value(1.0, kappa, q)) return 0.0;
            double lo = 1.0, hi = 2.0;
            while (e2_value(hi, kappa, q) < t) hi *= 2.0;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (e2_value(mid, kappa, q) < t ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        case Model::none:
            throw Error("model_counting: sequence has no generating model");
    }
    throw Error("model_counting: unreachable");
}

ModulusSequence make_sequence(std::vector<double> moduli) {
    require_nondecreasing_positive(moduli);
    ModulusSequence s;
    s.moduli = std::move(moduli);
    return s;
}

ModulusSequence make_sequence(std::vector<Complex> pts) {
    ModulusSequence s;
    s.moduli.reserve(pts.size());
    std::sort(pts.begin(), pts.end(),
              [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
    for (auto z : pts) s.moduli.push_back(std::abs(z));
    require_nondecreasing_positive(s.moduli);
    s.points = std::move(pts);
    return s;
}

long counting_function(const ModulusSequence& seq, double r) {
    if (!(r > 0.0)) throw Error("counting_function: r must be positive");
    return std::lower_bound(seq.moduli.begin(), seq.moduli.end(), r) - seq.moduli.begin();
}

ExponentReport convergence_exponent(const ModulusSequence& seq, long horizon) {
    const long n = std::min<long>(horizon, static_cast<long>(seq.size()));
    if (n < 16) throw Error("convergence_exponent: horizon too small");
    const double r_hi = seq.moduli[n - 1];
    const double r_lo = r_hi / 100.0;

    long in_window = n - counting_function(seq, r_lo);
    if (in_window < 100)
        throw Error("convergence_exponent: fewer than 100 sequence points in the fit window");

    const int grid = 200;
    std::vector<double> xs, ys;
    for (int i = 0; i < grid; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, (i + 0.5) / grid);
        const long c = counting_function(seq, r);
        if (c < 1) continue;
        xs.push_back(std::log(r));
        ys.push_back(std::log(static_cast<double>(c)));
    }
    ExponentReport rep;
    rep.rho_hat = ls_slope(xs, ys, &rep.diagnostics.fit_residual);
    rep.diagnostics.fit_r_lo = r_lo;
    rep.diagnostics.fit_r_hi = r_hi;
    rep.diagnostics.near_integer = std::abs(rep.rho_hat - std::round(rep.rho_hat)) < 0.05;

    // genus: smallest p with the dyadic increment-ratio test reporting convergence
    int genus = -1;
    for (int p = 0; p <= 12 && genus < 0; ++p) {
        long n1 = n / 4, n2 = n / 2;
        double s2 = 0.0, s3 = 0.0;
        for (long i = n1; i < n2; ++i) s2 += std::pow(seq.moduli[i], -(p + 1.0));
        for (long i = n2; i < n; ++i) s3 += std::pow(seq.moduli[i], -(p + 1.0));
        if (s3 <= 0.9 * s2 || s3 < 1e-300) genus = p;
    }
    if (genus < 0) throw Error("convergence_exponent: genus not detected up to p = 12");
    rep.genus = genus;

    rep.density_hat = upper_density(seq, rep.rho_hat, n);
    return rep;
}

double upper_density(const ModulusSequence& seq, double rho, long horizon) {
    if (!(rho > 0.0)) throw Error("upper_density: rho must be positive");
    const long n = std::min<long>(horizon, static_cast<long>(seq.size()));
    if (n < 1) return 0.0;
    const double r_hi = seq.moduli[n - 1];
    const double r_lo = r_hi / 10.0;
    double sup = 0.0;
    const int grid = 128;
    for (int i = 0; i <= grid; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / grid);
        sup = std::max(sup, counting_function(seq, r) / std::pow(r, rho));
    }
    return sup;
}

BetaProfile beta_profile(const ModulusSequence& seq, int p, double rho1,
                         const std::vector<double>& r_grid) {
    if (p < 0) throw Error("beta_profile: p must be nonnegative");
    if (!(rho1 > 0.0)) throw Error("beta_profile: rho1 must be positive");
    if (seq.moduli.empty()) {
        BetaProfile prof;
        prof.p = p;
        prof.rho1 = rho1;
        prof.r = r_grid;
        prof.beta.assign(r_grid.size(), 0.0);
        prof.beta_ln_r.assign(r_grid.size(), 0.0);
        prof.truncation_bound.assign(r_grid.size(), 0.0);
        return prof;
    }

    double model_corr = 0.0, model_bound = 0.0;
    if (seq.model != ModulusSequence::Model::none)
        model_corr = model_tail_correction(seq, p, &model_bound);

    BetaProfile prof;
    prof.p = p;
    prof.rho1 = rho1;
    for (double r : r_grid) {
        if (!(r > 0.0)) throw Error("beta_profile: grid values must be positive");
        if (seq.model != ModulusSequence::Model::none && r > seq.moduli.back())
            throw Error("beta_profile: grid exceeds the materialized horizon of the model");
        const double head = step_head_integral(seq.moduli, r, p);
        const double tail = step_tail_integral(seq.moduli, r, p) + model_corr;
        const double beta = std::pow(r, p - rho1) * (head + r * tail);
        prof.r.push_back(r);
        prof.beta.push_back(beta);
        prof.beta_ln_r.push_back(beta * std::log(r));
        prof.truncation_bound.push_back(std::pow(r, p - rho1) * r * model_bound);
    }
    return prof;
}

Complex canonical_product(const ModulusSequence& seq, int p, Complex z, long terms) {
    if (terms > static_cast<long>(seq.size()))
        throw Error("canonical_product: terms exceed the sequence length");
    double log_mag = 0.0;
    double phase = 0.0;
    for (long n = 0; n < terms; ++n) {
        Complex a = seq.points ? (*seq.points)[n] : Complex(seq.moduli[n], 0.0);
        if (a == Complex(0.0, 0.0)) throw Error("canonical_product: zero point a_n");
        const Complex w = z / a;
        const Complex one_minus = 1.0 - w;
        if (one_minus == Complex(0.0, 0.0)) return 0.0;
        log_mag += std::log(std::abs(one_minus));
        phase += std::arg(one_minus);
        Complex poly = 0.0;
        Complex wj = 1.0;
        for (int j = 1; j <= p; ++j) {
            wj *= w;
            poly += wj / static_cast<double>(j);
        }
        log_mag += poly.real();
        phase += poly.imag();
    }
    return std::polar(std::exp(log_mag), phase);
}

ModulusSequence generate_model_sequence_e1(double rho, long count) {
    if (!(rho > 0.0)) throw Error("generate_model_sequence_e1: rho must be positive");
    if (count < 1) throw Error("generate_model_sequence_e1: count must be positive");

    // locate the minimum of F on (e^{1.05}, inf)
    const double lo = std::exp(1.05);
    double rstar = lo, fmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 20000; ++i) {
        const double r = lo * std::pow(1e9 / lo, i / 20000.0);
        const double f = e1_counting(r, rho);
        if (f < fmin) {
            fmin = f;
            rstar = r;
        }
    }
    const long n_start = static_cast<long>(std::ceil(fmin)) + 1;

    ModulusSequence s;
    s.model = ModulusSequence::Model::e1;
    s.rho = rho;
    s.moduli.reserve(count);
    for (long n = 1; n < std::min(n_start, count + 1); ++n)
        s.moduli.push_back(rstar * static_cast<double>(n) / n_start);
    double hi_guess = 2.0 * rstar;
    for (long n = n_start; n <= count; ++n) {
        // solve F(r) = n on the increasing branch
        double a = rstar, b = hi_guess;
        while (e1_counting(b, rho) < n) b *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            (e1_counting(mid, rho) < n ? a : b) = mid;
        }
        s.moduli.push_back(0.5 * (a + b));
        hi_guess = b;
    }
    return s;
}

ModulusSequence generate_model_sequence_e2(double kappa, double q, long count) {
    if (!(kappa > 0.0) || kappa > 1.0)
        throw Error("generate_model_sequence_e2: kappa must lie in (0, 1]");
    if (!(q > std::exp(std::exp(1.0)) - 1.0))
        throw Error("generate_model_sequence_e2: q must exceed e^e - 1");
    if (count < 1) throw Error("generate_model_sequence_e2: count must be positive");
    ModulusSequence s;
    s.model = ModulusSequence::Model::e2;
    s.kappa = kappa;
    s.q = q;
    s.moduli.reserve(count);
    for (long i = 1; i <= count; ++i) s.moduli.push_back(e2_value(static_cast<double>(i), kappa, q));
    return s;
}

double e2_divergence_certificate(double q, double M) {
    if (!(q > std::exp(std::exp(1.0)) - 1.0))
        throw Error("e2_divergence_certificate: q must exceed e^e - 1");
    if (!(M > 0.0)) throw Error("e2_divergence_certificate: M must be positive");
    // S(N) >= lnlnln(N+1+q) - lnlnln(1+q), so lnlnln(N+1+q) = M + lnlnln(1+q) suffices.
    return M + logloglog(1.0 + q);
}

double circle_bound_value(double gamma, double abs_lambda, double varrho) {
    const int m = static_cast<int>(std::floor(varrho));
    return std::exp(gamma * std::pow(abs_lambda, varrho)) * std::pow(abs_lambda, m);
}

CircleBoundReport lemma5_circle_bound(const OperatorSpec& op, double R, double delta,
                                      double varrho, int probes, int radii) {
    if (!(R > 0.0)) throw Error("lemma5_circle_bound: R must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw Error("lemma5_circle_bound: delta must be in (0,1)");
    if (!(varrho > 0.0)) throw Error("lemma5_circle_bound: varrho must be positive");
    if (probes < 8) probes = 8;
    const int m = static_cast<int>(std::floor(varrho));

    // counting function points: reciprocals of the singular values of B^{m+1}
    Matrix Bp = op.dense;
    for (int j = 0; j < m; ++j) Bp = Bp * op.dense;
    RealVector sv = singular_values(Bp);
    std::vector<double> a;
    const double tiny = 1e-14 * std::max(1.0, sv.maxCoeff());
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tiny) a.push_back(1.0 / sv[i]);
    std::sort(a.begin(), a.end());

    auto beta = [&](double r) {
        double head = 0.0, tail = 0.0;
        for (double ai : a) {
            if (ai < r) head += std::log(r / ai);
            tail += 1.0 / std::max(r, ai);
        }
        return std::pow(r, -varrho / (m + 1)) * (head + r * tail);
    };
    auto gamma_fn = [&](double abs_lambda) {
        const double c1 = std::pow(abs_lambda, m + 1.0);
        const double c2 = std::pow(2.0 * std::exp(1.0) * abs_lambda, m + 1.0);
        return beta(c1) +
               (2.0 + std::log(12.0 * std::exp(1.0) / delta)) * std::pow(2.0 * std::exp(1.0), varrho) * beta(c2);
    };

    std::vector<double> char_moduli;
    {
        Vector mus = operator_eigenvalues(op);
        const double scale = std::max(op.dense.norm(), 1e-300);
        for (int i = 0; i < mus.size(); ++i)
            if (std::abs(mus[i]) > 1e-12 * scale) char_moduli.push_back(1.0 / std::abs(mus[i]));
    }

    CircleBoundReport best;
    best.max_norm = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < radii; ++j) {
        const double Rt = (1.0 - delta) * R + (R - (1.0 - delta) * R) * (j + 0.5) / radii;
        bool hits_pole = false;
        for (double cm : char_moduli)
            if (std::abs(cm - Rt) < 1e-9 * std::max(1.0, Rt)) hits_pole = true;
        if (hits_pole) continue;
        any = true;
        double max_norm = 0.0;
        for (int k = 0; k < probes; ++k) {
            const Complex lam = std::polar(Rt, 2.0 * kPi * (k + 0.5) / probes);
            max_norm = std::max(max_norm, resolvent_norm(op, lam));
        }
        if (max_norm < best.max_norm) {
            best.R_tilde = Rt;
            best.max_norm = max_norm;
        }
    }
    if (!any)
        throw Error("lemma5_circle_bound: every scanned circle passes through a characteristic number");

    best.bound = circle_bound_value(gamma_fn(best.R_tilde), best.R_tilde, varrho);
    best.satisfied = best.max_norm <= best.bound;
    return best;
}

}  // namespace lidskii
