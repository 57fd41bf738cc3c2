#include "lidskii/abel.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace lidskii {

namespace {
constexpr int kMaxDegree = 32;
}

Complex eval_abel_polynomial(int m, double alpha, Complex zeta, double t) {
    if (m < 0) throw Error("eval_abel_polynomial: negative degree");
    if (m > kMaxDegree) {
        std::ostringstream msg;
        msg << "eval_abel_polynomial: degree " << m << " exceeds cap " << kMaxDegree;
        throw Error(msg.str());
    }
    if (zeta == Complex(0.0, 0.0)) throw Error("eval_abel_polynomial: zeta must be nonzero");
    if (alpha <= 0.0) throw Error("eval_abel_polynomial: alpha must be positive");
    if (m == 0) return 1.0;

    // Terms keyed by (a, b): coefficient * t^a alpha^a * zeta^{-a(alpha+1)-b}.
    // The t^a alpha^a factor is folded into the coefficient.
    std::map<std::pair<int, int>, double> terms;
    terms[{0, 0}] = 1.0;
    for (int j = 0; j < m; ++j) {
        std::map<std::pair<int, int>, double> next;
        for (const auto& [key, v] : terms) {
            const auto [a, b] = key;
            const double expo = -a * (alpha + 1.0) - b;  // current zeta power
            if (expo != 0.0) next[{a, b + 1}] += v * expo;
            next[{a + 1, b}] += v * t * alpha;
        }
        terms = std::move(next);
    }
    Complex sum = 0.0;
    const Complex logz = std::log(zeta);
    for (const auto& [key, v] : terms) {
        const auto [a, b] = key;
        sum += v * std::exp((-a * (alpha + 1.0) - b) * logz);
    }
    double mfact = 1.0;
    for (int j = 2; j <= m; ++j) mfact *= j;
    return sum / mfact;
}

RegularizedCoefficients regularized_coefficients(const SpectralDecomposition& decomp,
                                                 const Vector& raw, double t, double alpha) {
    if (raw.size() != decomp.total_root_count())
        throw Error("regularized_coefficients: coefficient numbering misaligned with decomposition");
    if (t < 0.0) throw Error("regularized_coefficients: t must be nonnegative");

    RegularizedCoefficients out;
    out.t = t;
    out.alpha = alpha;
    out.values = Vector::Zero(raw.size());

    int base = 0;
    for (const auto& grp : decomp.groups) {
        const Complex lambda_q = grp.lambda();  // throws for a zero eigenvalue
        const Complex decay = std::exp(-principal_pow(lambda_q, alpha) * t);
        for (const auto& ch : grp.chains) {
            const int k = ch.length() - 1;
            for (int i = 0; i <= k; ++i) {
                Complex acc = 0.0;
                for (int m = 0; m <= k - i; ++m)
                    acc += eval_abel_polynomial(m, alpha, grp.mu, t) * raw[base + i + m];
                out.values[base + i] = decay * acc;
            }
            base += k + 1;
        }
    }
    return out;
}

SummationSchedule group_schedule(const SpectralDecomposition& decomp, double tau, double K) {
    if (tau <= 0.0) throw Error("group_schedule: tau must be positive");
    if (K <= 0.0) throw Error("group_schedule: K must be positive");

    SummationSchedule s;
    s.tau = tau;
    s.K = K;
    s.boundaries.push_back(0);

    std::vector<double> moduli;
    for (const auto& g : decomp.groups) {
        if (!g.mu_invertible)
            throw Error("group_schedule: zero eigenvalue has no characteristic number");
        moduli.push_back(std::abs(g.lambda()));
    }
    const int Q = static_cast<int>(moduli.size());
    if (Q == 0) return s;  // boundaries = (0)

    const double q_exp = 1.0 - 1.0 / tau;
    for (int j = 1; j < Q; ++j) {
        const double gap = moduli[j] - moduli[j - 1];
        const double threshold = K * std::pow(moduli[j], q_exp);
        if (gap >= threshold) {
            s.boundaries.push_back(j);
            s.diagnostics.push_back({j, gap, threshold});
        } else {
            s.in_group_max_ratio =
                std::max(s.in_group_max_ratio, gap / std::pow(moduli[j], q_exp));
        }
    }
    s.boundaries.push_back(Q);
    s.single_group_fallback = s.boundaries.size() == 2 && Q > 1;
    return s;
}

GroupedSums grouped_partial_sums(const SpectralDecomposition& decomp,
                                 const RegularizedCoefficients& coeffs,
                                 const SummationSchedule& schedule) {
    if (coeffs.values.size() != decomp.total_root_count())
        throw Error("grouped_partial_sums: coefficients do not match the decomposition");
    const int Q = static_cast<int>(decomp.groups.size());
    if (schedule.boundaries.empty() || schedule.boundaries.back() > Q)
        throw Error("grouped_partial_sums: schedule exceeds the spectrum size");

    // flattened offset of each group
    std::vector<int> offset(Q + 1, 0);
    for (int q = 0; q < Q; ++q)
        offset[q + 1] = offset[q] + decomp.groups[q].algebraic_multiplicity();

    GroupedSums out;
    out.total = Vector::Zero(decomp.dimension);
    for (std::size_t nu = 0; nu + 1 < schedule.boundaries.size(); ++nu) {
        Vector v = Vector::Zero(decomp.dimension);
        for (int q = schedule.boundaries[nu]; q < schedule.boundaries[nu + 1]; ++q) {
            int n = offset[q];
            for (const auto& ch : decomp.groups[q].chains)
                for (const auto& e : ch.e) v += coeffs.values[n++] * e;
        }
        out.group_norms.push_back(v.norm());
        out.total += v;
        out.group_vectors.push_back(std::move(v));
    }
    return out;
}

}  // namespace lidskii
