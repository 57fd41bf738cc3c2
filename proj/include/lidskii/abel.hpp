#pragma once

#include "lidskii/spectral.hpp"

#include <vector>

namespace lidskii {

/// P^alpha_m at the point zeta: the exponential-free part of
/// (e^{t zeta^{-alpha}}/m!) d^m/d zeta^m e^{-t zeta^{-alpha}}, evaluated with
/// the recurrence Q_0 = 1, Q_{j+1} = Q_j' + t alpha zeta^{-alpha-1} Q_j,
/// P^alpha_m = Q_m / m!. No numerical differentiation. In the coefficient
/// formulas zeta is the eigenvalue mu_q = 1/lambda_q.
Complex eval_abel_polynomial(int m, double alpha, Complex zeta, double t);

struct RegularizedCoefficients {
    double t = 0.0;
    double alpha = 0.0;
    Vector values;  // c_n(t), flattened root-vector numbering
};

/// c_{q_xi+i}(t) = e^{-lambda_q^alpha t} sum_{m=0}^{k-i} P^alpha_m(mu_q, t) c_{q_xi+i+m}.
RegularizedCoefficients regularized_coefficients(const SpectralDecomposition& decomp,
                                                 const Vector& raw, double t, double alpha);

struct GapDiagnostic {
    int boundary = 0;      // group index N_nu (1-based position in the modulus order)
    double gap = 0.0;      // |lambda_{N+1}| - |lambda_N|
    double threshold = 0.0;  // K |lambda_{N+1}|^{1-1/tau}
};

struct SummationSchedule {
    std::vector<int> boundaries;  // N_0 = 0 < N_1 < ... <= group count
    double tau = 0.0;
    double K = 0.0;
    std::vector<GapDiagnostic> diagnostics;
    bool single_group_fallback = false;  // no interior gap satisfied the condition
    double in_group_max_ratio = 0.0;     // empirical Theorem 3 constant C
    int group_count() const { return static_cast<int>(boundaries.size()) - 1; }
};

/// Scans consecutive characteristic-number moduli and places a boundary
/// wherever |lambda_{j+1}| - |lambda_j| >= K |lambda_{j+1}|^{1-1/tau}.
SummationSchedule group_schedule(const SpectralDecomposition& decomp, double tau, double K);

struct GroupedSums {
    std::vector<Vector> group_vectors;
    std::vector<double> group_norms;
    Vector total;
};

GroupedSums grouped_partial_sums(const SpectralDecomposition& decomp,
                                 const RegularizedCoefficients& coeffs,
                                 const SummationSchedule& schedule);

}  // namespace lidskii
