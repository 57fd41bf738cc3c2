#pragma once

#include "lidskii/operator_core.hpp"

#include <vector>

namespace lidskii {

/// One Jordan chain: e[0] is the eigenvector, B e[j] = mu e[j] + e[j-1].
/// The adjoint chain g (same length) runs the other way:
/// B* g[k] = conj(mu) g[k], B* g[j-1] = conj(mu) g[j-1] + g[j].
struct JordanChain {
    Complex mu;
    std::vector<Vector> e;
    std::vector<Vector> g;  // empty until build_biorthogonal
    int chain_index = 0;
    int length() const { return static_cast<int>(e.size()); }
};

struct EigenGroup {
    Complex mu;
    bool mu_invertible = true;  // false for a zero eigenvalue (no characteristic number)
    std::vector<JordanChain> chains;

    Complex lambda() const {
        if (!mu_invertible) throw Error("eigen group: zero eigenvalue has no characteristic number");
        return 1.0 / mu;
    }
    int algebraic_multiplicity() const {
        int n = 0;
        for (const auto& c : chains) n += c.length();
        return n;
    }
};

/// Eigenvalue groups ordered by increasing characteristic-number modulus
/// (zero eigenvalues last), chains within a group by decreasing length.
struct SpectralDecomposition {
    int dimension = 0;
    std::vector<EigenGroup> groups;
    bool biorthogonal_built = false;

    int total_root_count() const {
        int n = 0;
        for (const auto& g : groups) n += g.algebraic_multiplicity();
        return n;
    }
    /// Columns are the flattened root system e_1..e_n (group, chain, position order).
    Matrix root_matrix() const;
    /// Columns are the flattened adjoint system g_1..g_n.
    Matrix adjoint_matrix() const;
};

/// Spectral decomposition of op. The structured path reproduces the declared
/// blocks; the dense path clusters eigenvalues and builds chains from the
/// Weyr staircase of the nilpotent part on each Riesz-projector range.
SpectralDecomposition decompose(const OperatorSpec& op, double rank_tolerance = 1e-9);

/// Fills the adjoint chains so that the flattened pairing is the identity:
/// (e_m, g_n) = delta_mn, every denominator exactly one.
SpectralDecomposition build_biorthogonal(SpectralDecomposition decomp, const OperatorSpec& op);

/// Riesz projector -(1/2 pi i) \oint (B - zI)^{-1} dz around mu_center,
/// computed by trapezoidal circle quadrature (`panels` nodes).
/// Throws if the circle intersects or encloses a foreign eigenvalue.
Matrix riesz_projector(const OperatorSpec& op, Complex mu_center, double radius, int panels);

/// Expansion coefficients c_n = (f, g_n) in the flattened numbering;
/// sum_n c_n e_n reconstructs f.
Vector raw_coefficients(const SpectralDecomposition& decomp, const Vector& f);

/// Worst residual of the forward chain relations Be_0 - mu e_0,
/// Be_j - mu e_j - e_{j-1} over the whole decomposition.
double chain_residual(const SpectralDecomposition& decomp, const OperatorSpec& op);

/// Worst residual of the adjoint chain relations (requires biorthogonal system).
double adjoint_chain_residual(const SpectralDecomposition& decomp, const OperatorSpec& op);

}  // namespace lidskii
