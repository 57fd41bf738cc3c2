#pragma once

#include "lidskii/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lidskii {

struct JordanBlock {
    Complex eigenvalue;
    int size = 1;
};

struct StructuredForm {
    std::vector<JordanBlock> blocks;
    Matrix basis;  // invertible P with dense = P * J * P^{-1}
};

/// A finite-dimensional complex operator: a dense matrix, optionally backed by
/// an exact Jordan description.
struct OperatorSpec {
    int dimension = 0;
    Matrix dense;
    std::optional<StructuredForm> structured;
    std::string label;
};

struct SectorEstimate {
    double vertex = 0.0;      // iota
    double semi_angle = 0.0;  // theta, in [0, pi)
    int samples = 0;
    bool half_plane_exceeded = false;  // best-effort theta = pi flag
};

/// Dense Jordan matrix assembled from the block list.
Matrix jordan_matrix(const std::vector<JordanBlock>& blocks);

OperatorSpec make_operator(Matrix dense, std::string label = "");

/// Builds dense = P*J*P^{-1}; throws on singular basis (condition number in the message).
OperatorSpec make_structured_operator(std::vector<JordanBlock> blocks, Matrix basis,
                                      std::string label = "");

/// Checks squareness, structured-reconstruction agreement (1e-12 relative
/// Frobenius) and basis invertibility. Throws Error on violation.
void validate_operator(const OperatorSpec& op);

/// Linear solve M x = f with one LU factorization plus iterative refinement.
/// Throws if the backward error cannot be brought near machine level.
Vector refined_solve(const Matrix& M, const Vector& f);

/// x = (I - lambda B)^{-1} f. On a singular solve the error names the nearest
/// characteristic number.
Vector resolvent_apply(const OperatorSpec& op, Complex lambda, const Vector& f);

/// ||(I - lambda B)^{-1}||_2, computed from the smallest singular value
/// (no solve; usable arbitrarily close to poles).
double resolvent_norm(const OperatorSpec& op, Complex lambda);

/// B* f.
Vector adjoint_apply(const OperatorSpec& op, const Vector& f);

/// Decreasing singular values.
RealVector singular_values(const OperatorSpec& op);
RealVector singular_values(const Matrix& m);

/// Smallest semi-angle theta such that all sampled Rayleigh quotients lie in
/// the closed sector with the given vertex. Eigenvector directions are always
/// probed; the remaining samples come from a seeded generator.
SectorEstimate estimate_sector(const OperatorSpec& op, int samples,
                               std::optional<double> vertex_hint = std::nullopt,
                               std::uint64_t seed = 0x11d511ULL);

/// det(I - lambda B).
Complex fredholm_determinant(const OperatorSpec& op, Complex lambda);

/// Eigenvalues of the dense matrix (solver order).
Vector operator_eigenvalues(const OperatorSpec& op);

}  // namespace lidskii
