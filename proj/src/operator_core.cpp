#include "lidskii/operator_core.hpp"

#include "lidskii/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace lidskii {

Matrix jordan_matrix(const std::vector<JordanBlock>& blocks) {
    int n = 0;
    for (const auto& b : blocks) {
        if (b.size < 1) throw Error("jordan_matrix: block size must be positive");
        n += b.size;
    }
    Matrix J = Matrix::Zero(n, n);
    int at = 0;
    for (const auto& b : blocks) {
        for (int i = 0; i < b.size; ++i) {
            J(at + i, at + i) = b.eigenvalue;
            if (i + 1 < b.size) J(at + i, at + i + 1) = 1.0;
        }
        at += b.size;
    }
    return J;
}

OperatorSpec make_operator(Matrix dense, std::string label) {
    OperatorSpec op;
    if (dense.rows() != dense.cols() || dense.rows() < 1)
        throw Error("make_operator: matrix must be square and nonempty");
    op.dimension = static_cast<int>(dense.rows());
    op.dense = std::move(dense);
    op.label = std::move(label);
    return op;
}

OperatorSpec make_structured_operator(std::vector<JordanBlock> blocks, Matrix basis,
                                      std::string label) {
    Matrix J = jordan_matrix(blocks);
    if (basis.rows() != J.rows() || basis.cols() != J.cols())
        throw Error("make_structured_operator: basis shape does not match block sizes");

    Eigen::JacobiSVD<Matrix> svd(basis);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e14) {
        std::ostringstream msg;
        msg << "make_structured_operator: singular change-of-basis P, condition number "
            << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity());
        throw Error(msg.str());
    }

    OperatorSpec op;
    op.dimension = static_cast<int>(J.rows());
    op.dense = basis * J * basis.partialPivLu().solve(Matrix::Identity(op.dimension, op.dimension));
    op.structured = StructuredForm{std::move(blocks), std::move(basis)};
    op.label = std::move(label);
    return op;
}

void validate_operator(const OperatorSpec& op) {
    if (op.dimension < 1) throw Error("operator: dimension must be >= 1");
    if (op.dense.rows() != op.dimension || op.dense.cols() != op.dimension)
        throw Error("operator: dense matrix is not square of the declared dimension");
    if (op.structured) {
        const auto& s = *op.structured;
        Matrix J = jordan_matrix(s.blocks);
        if (J.rows() != op.dimension)
            throw Error("operator: structured block sizes do not sum to the dimension");
        Matrix recon =
            s.basis * J * s.basis.partialPivLu().solve(Matrix::Identity(op.dimension, op.dimension));
        const double denom = std::max(op.dense.norm(), 1e-300);
        const double rel = (recon - op.dense).norm() / denom;
        if (rel > 1e-12) {
            std::ostringstream msg;
            msg << "operator: structured reconstruction mismatch, relative Frobenius error " << rel;
            throw Error(msg.str());
        }
    }
}

Vector refined_solve(const Matrix& M, const Vector& f) {
    Eigen::PartialPivLU<Matrix> lu(M);
    Vector x = lu.solve(f);
    const double mnorm = M.norm();
    for (int iter = 0; iter < 4; ++iter) {
        Vector r = f - M * x;
        if (r.norm() <= 1e-15 * (f.norm() + mnorm * x.norm())) break;
        x += lu.solve(r);
    }
    Vector r = f - M * x;
    if (!(r.norm() <= 1e-10 * (f.norm() + mnorm * x.norm()) + 1e-300))
        throw Error("refined_solve: backward error stagnated (matrix numerically singular)");
    return x;
}

Vector resolvent_apply(const OperatorSpec& op, Complex lambda, const Vector& f) {
    if (f.size() != op.dimension) throw Error("resolvent_apply: vector size mismatch");
    Matrix M = Matrix::Identity(op.dimension, op.dimension) - lambda * op.dense;
    try {
        return refined_solve(M, f);
    } catch (const Error&) {
        // Diagnose which pole was hit.
        Vector mus = operator_eigenvalues(op);
        double best = std::numeric_limits<double>::infinity();
        Complex pole = 0.0;
        for (int i = 0; i < mus.size(); ++i) {
            if (std::abs(mus[i]) < 1e-300) continue;
            Complex lam_i = 1.0 / mus[i];
            if (std::abs(lambda - lam_i) < best) {
                best = std::abs(lambda - lam_i);
                pole = lam_i;
            }
        }
        std::ostringstream msg;
        msg << "resolvent_apply: lambda = (" << lambda.real() << "," << lambda.imag()
            << ") is singular; nearest characteristic number (" << pole.real() << ","
            << pole.imag() << "), distance " << best;
        throw Error(msg.str());
    }
}

double resolvent_norm(const OperatorSpec& op, Complex lambda) {
    Matrix M = Matrix::Identity(op.dimension, op.dimension) - lambda * op.dense;
    Eigen::JacobiSVD<Matrix> svd(M);
    const double smin = svd.singularValues().minCoeff();
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / smin;
}

Vector adjoint_apply(const OperatorSpec& op, const Vector& f) {
    if (f.size() != op.dimension) throw Error("adjoint_apply: vector size mismatch");
    return op.dense.adjoint() * f;
}

RealVector singular_values(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues();
}

RealVector singular_values(const OperatorSpec& op) { return singular_values(op.dense); }

Vector operator_eigenvalues(const OperatorSpec& op) {
    Eigen::ComplexEigenSolver<Matrix> es(op.dense, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw Error("operator_eigenvalues: eigensolver failed");
    return es.eigenvalues();
}

SectorEstimate estimate_sector(const OperatorSpec& op, int samples,
                               std::optional<double> vertex_hint, std::uint64_t seed) {
    if (samples < op.dimension) throw Error("estimate_sector: samples must be >= dimension");
    const double iota = vertex_hint.value_or(0.0);

    std::vector<Vector> probes;
    probes.reserve(static_cast<std::size_t>(samples));
    // Eigenvector directions witness extremal Rayleigh quotients in the normal case.
    Eigen::ComplexEigenSolver<Matrix> es(op.dense, /*computeEigenvectors=*/true);
    if (es.info() == Eigen::Success) {
        for (int i = 0; i < op.dimension && static_cast<int>(probes.size()) < samples; ++i) {
            Vector v = es.eigenvectors().col(i);
            double n = v.norm();
            if (n > 0) probes.push_back(v / n);
        }
    }
    Rng rng(seed);
    while (static_cast<int>(probes.size()) < samples) probes.push_back(rng.unit_vector(op.dimension));

    double theta = 0.0;
    for (const auto& f : probes) {
        Complex z = f.dot(op.dense * f);  // (Bf, f) for a unit f
        Complex w = z - iota;
        if (std::abs(w) < 1e-15) continue;  // at the vertex, inside any sector
        theta = std::max(theta, std::abs(std::arg(w)));
    }

    SectorEstimate out;
    out.vertex = iota;
    out.semi_angle = theta;
    out.samples = samples;
    out.half_plane_exceeded = theta >= kPi * (1.0 - 1e-12);
    return out;
}

Complex fredholm_determinant(const OperatorSpec& op, Complex lambda) {
    Matrix M = Matrix::Identity(op.dimension, op.dimension) - lambda * op.dense;
    return M.partialPivLu().determinant();
}

}  // namespace lidskii
