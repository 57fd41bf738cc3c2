#include "lidskii/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lidskii {

namespace {

Matrix flatten(const SpectralDecomposition& d, bool adjoint) {
    Matrix out(d.dimension, d.total_root_count());
    int col = 0;
    for (const auto& grp : d.groups)
        for (const auto& ch : grp.chains) {
            const auto& vecs = adjoint ? ch.g : ch.e;
            if (static_cast<int>(vecs.size()) != ch.length())
                throw Error("spectral: adjoint chains not built");
            for (const auto& v : vecs) out.col(col++) = v;
        }
    return out;
}

/// Orthonormal basis of the null space of M (right singular vectors with
/// sigma <= tol). Returns dim x nullity.
Matrix nullspace(const Matrix& M, double tol) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > tol) ++rank;
    return svd.matrixV().rightCols(M.cols() - rank);
}

/// Orthonormal basis of the part of col(W) independent of col(S).
Matrix complement_in(const Matrix& W, const Matrix& S, double tol) {
    Matrix R = W;
    if (S.cols() > 0) {
        // Orthonormalize S, then project W off it.
        Eigen::HouseholderQR<Matrix> qr(S);
        Matrix Q = qr.householderQ() * Matrix::Identity(S.rows(), S.cols());
        R -= Q * (Q.adjoint() * W);
    }
    Eigen::JacobiSVD<Matrix> svd(R, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > tol) ++rank;
    return svd.matrixU().leftCols(rank);
}

struct Cluster {
    Complex center;
    std::vector<int> members;  // eigenvalue indices
};

std::vector<Cluster> cluster_eigenvalues(const Vector& mus, double tol) {
    const int n = static_cast<int>(mus.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (mus[a].real() != mus[b].real()) return mus[a].real() < mus[b].real();
        return mus[a].imag() < mus[b].imag();
    });
    std::vector<Cluster> clusters;
    std::vector<bool> used(n, false);
    for (int oi = 0; oi < n; ++oi) {
        int i = order[oi];
        if (used[i]) continue;
        Cluster c;
        c.members.push_back(i);
        used[i] = true;
        // grow until no close eigenvalue remains
        bool grew = true;
        while (grew) {
            grew = false;
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                for (int m : c.members)
                    if (std::abs(mus[j] - mus[m]) <= tol) {
                        c.members.push_back(j);
                        used[j] = true;
                        grew = true;
                        break;
                    }
            }
        }
        Complex sum = 0.0;
        for (int m : c.members) sum += mus[m];
        c.center = sum / static_cast<double>(c.members.size());
        clusters.push_back(std::move(c));
    }
    return clusters;
}

/// Chains of the nilpotent matrix N (columns of each chain in C^k):
/// for a top vector v of height h the chain is (N^{h-1}v, ..., Nv, v).
std::vector<std::vector<Eigen::VectorXcd>> nilpotent_chains(const Matrix& N, double tol) {
    const int k = static_cast<int>(N.rows());
    if (k == 1) return {{Eigen::VectorXcd::Ones(1)}};
    const double scale = std::max(1.0, N.norm());
    const double eff = tol * scale;

    // kernels of N^j
    std::vector<Matrix> kernels;  // kernels[j] = ker N^{j+1}
    Matrix P = Matrix::Identity(k, k);
    int s = 0;
    for (int j = 1; j <= k; ++j) {
        P = N * P;
        kernels.push_back(nullspace(P, eff));
        s = j;
        if (kernels.back().cols() == k) break;
    }
    if (kernels.back().cols() != k)
        throw Error("spectral: restriction is not nilpotent at the given rank tolerance");

    std::vector<std::vector<Eigen::VectorXcd>> chains;
    Matrix carried(k, 0);
    for (int h = s; h >= 1; --h) {
        const Matrix& ker_h = kernels[h - 1];
        Matrix S(k, 0);
        if (h >= 2) S = kernels[h - 2];
        if (carried.cols() > 0) {
            Matrix S2(k, S.cols() + carried.cols());
            S2 << S, carried;
            S = S2;
        }
        Matrix tops = complement_in(ker_h, S, 1e-7);
        for (int c = 0; c < tops.cols(); ++c) {
            Eigen::VectorXcd v = tops.col(c);
            std::vector<Eigen::VectorXcd> chain(h);
            chain[h - 1] = v;
            for (int j = h - 2; j >= 0; --j) chain[j] = N * chain[j + 1];
            // scale so the eigenvector has unit norm
            double en = chain[0].norm();
            if (en < 1e-300) throw Error("spectral: degenerate chain (zero eigenvector)");
            for (auto& x : chain) x /= en;
            chains.push_back(std::move(chain));
        }
        Matrix next(k, carried.cols() + tops.cols());
        if (next.cols() > 0) {
            if (carried.cols() > 0) next.leftCols(carried.cols()) = N * carried;
            if (tops.cols() > 0) next.rightCols(tops.cols()) = N * tops;
        }
        carried = next;
    }
    int covered = 0;
    for (const auto& c : chains) covered += static_cast<int>(c.size());
    if (covered != k) {
        std::ostringstream msg;
        msg << "spectral: staircase produced " << covered << " vectors for a " << k
            << "-dimensional root subspace; supply a structured form";
        throw Error(msg.str());
    }
    return chains;
}

void order_groups(std::vector<EigenGroup>& groups) {
    std::stable_sort(groups.begin(), groups.end(), [](const EigenGroup& a, const EigenGroup& b) {
        if (a.mu_invertible != b.mu_invertible) return a.mu_invertible;  // zero eigenvalues last
        if (!a.mu_invertible) return false;
        double la = std::abs(a.lambda()), lb = std::abs(b.lambda());
        if (std::abs(la - lb) > 1e-14 * std::max(la, lb)) return la < lb;
        return std::arg(a.lambda()) < std::arg(b.lambda());
    });
    for (auto& g : groups)
        std::stable_sort(g.chains.begin(), g.chains.end(),
                         [](const JordanChain& a, const JordanChain& b) { return a.length() > b.length(); });
    int idx = 0;
    for (auto& g : groups)
        for (auto& c : g.chains) c.chain_index = idx++;
}

SpectralDecomposition decompose_structured(const OperatorSpec& op) {
    const auto& s = *op.structured;
    SpectralDecomposition d;
    d.dimension = op.dimension;

    // group blocks by exact eigenvalue
    std::vector<EigenGroup> groups;
    int offset = 0;
    for (const auto& b : s.blocks) {
        EigenGroup* grp = nullptr;
        for (auto& g : groups)
            if (g.mu == b.eigenvalue) grp = &g;
        if (!grp) {
            groups.push_back({});
            grp = &groups.back();
            grp->mu = b.eigenvalue;
            grp->mu_invertible = std::abs(b.eigenvalue) > 0.0;
        }
        JordanChain ch;
        ch.mu = b.eigenvalue;
        for (int i = 0; i < b.size; ++i) ch.e.push_back(s.basis.col(offset + i));
        grp->chains.push_back(std::move(ch));
        offset += b.size;
    }
    d.groups = std::move(groups);
    order_groups(d.groups);
    return d;
}

SpectralDecomposition decompose_dense(const OperatorSpec& op, double rank_tolerance) {
    SpectralDecomposition d;
    d.dimension = op.dimension;
    const double scale = std::max(op.dense.norm(), 1e-300);

    Vector mus = operator_eigenvalues(op);
    auto clusters = cluster_eigenvalues(mus, 1e-8 * scale);

    for (const auto& cl : clusters) {
        const int multiplicity = static_cast<int>(cl.members.size());
        Matrix P;
        Matrix V;
        if (multiplicity == op.dimension) {
            V = Matrix::Identity(op.dimension, op.dimension);
        } else {
            double foreign = std::numeric_limits<double>::infinity();
            for (int j = 0; j < mus.size(); ++j) {
                bool member = false;
                for (int m : cl.members) member = member || (m == j);
                if (!member) foreign = std::min(foreign, std::abs(mus[j] - cl.center));
            }
            double spread = 0.0;
            for (int m : cl.members) spread = std::max(spread, std::abs(mus[m] - cl.center));
            const double radius = 0.5 * (spread + foreign);
            P = riesz_projector(op, cl.center, radius, 256);
            Eigen::JacobiSVD<Matrix> svd(P, Eigen::ComputeFullU);
            int rank = 0;
            for (int i = 0; i < svd.singularValues().size(); ++i)
                if (svd.singularValues()[i] > 0.5) ++rank;
            if (rank != multiplicity) {
                std::ostringstream msg;
                msg << "decompose: projector rank " << rank << " disagrees with multiplicity "
                    << multiplicity << " near eigenvalue (" << cl.center.real() << ","
                    << cl.center.imag() << "); supply a structured form";
                throw Error(msg.str());
            }
            V = svd.matrixU().leftCols(rank);
        }

        Matrix C = V.adjoint() * (op.dense * V);
        const Complex mu_hat = C.trace() / static_cast<double>(C.rows());
        Matrix N = C - mu_hat * Matrix::Identity(C.rows(), C.cols());
        auto small_chains = nilpotent_chains(N, rank_tolerance);

        EigenGroup grp;
        grp.mu = mu_hat;
        grp.mu_invertible = std::abs(mu_hat) > 1e-12 * scale;
        for (auto& sc : small_chains) {
            JordanChain ch;
            ch.mu = mu_hat;
            for (auto& x : sc) ch.e.push_back(V * x);
            grp.chains.push_back(std::move(ch));
        }
        d.groups.push_back(std::move(grp));
    }
    order_groups(d.groups);

    const double resid = chain_residual(d, op);
    const double bound = 1e-7 * std::max(1.0, scale);
    if (resid > bound) {
        std::ostringstream msg;
        msg << "decompose: chain relation residual " << resid << " exceeds " << bound
            << "; supply a structured form";
        throw Error(msg.str());
    }
    return d;
}

}  // namespace

Matrix SpectralDecomposition::root_matrix() const { return flatten(*this, false); }
Matrix SpectralDecomposition::adjoint_matrix() const { return flatten(*this, true); }

SpectralDecomposition decompose(const OperatorSpec& op, double rank_tolerance) {
    validate_operator(op);
    SpectralDecomposition d =
        op.structured ? decompose_structured(op) : decompose_dense(op, rank_tolerance);
    if (d.total_root_count() != op.dimension)
        throw Error("decompose: root vectors do not span the space");
    return d;
}

SpectralDecomposition build_biorthogonal(SpectralDecomposition decomp, const OperatorSpec& op) {
    Matrix E = decomp.root_matrix();
    Eigen::JacobiSVD<Matrix> svd(E);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e12) {
        std::ostringstream msg;
        msg << "build_biorthogonal: root system condition number "
            << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity())
            << " exceeds 1e12";
        throw Error(msg.str());
    }
    // (e_m, g_n) = delta_mn  <=>  G = E^{-H}
    Matrix X = E.partialPivLu().solve(Matrix::Identity(decomp.dimension, decomp.dimension));
    // one refinement pass on the inverse
    X += E.partialPivLu().solve(Matrix::Identity(decomp.dimension, decomp.dimension) - E * X);
    Matrix G = X.adjoint();

    int col = 0;
    for (auto& grp : decomp.groups)
        for (auto& ch : grp.chains) {
            ch.g.clear();
            for (int i = 0; i < ch.length(); ++i) ch.g.push_back(G.col(col++));
        }
    decomp.biorthogonal_built = true;
    (void)op;
    return decomp;
}

Matrix riesz_projector(const OperatorSpec& op, Complex mu_center, double radius, int panels) {
    if (radius <= 0.0) throw Error("riesz_projector: radius must be positive");
    if (panels < 8) panels = 8;
    Vector mus = operator_eigenvalues(op);
    const double scale = std::max(op.dense.norm(), 1e-300);
    const double margin = std::max(1e-10 * scale, 1e-8 * radius);
    const double cluster_tol = 1e-7 * scale;
    for (int i = 0; i < mus.size(); ++i) {
        const double dist = std::abs(mus[i] - mu_center);
        if (std::abs(dist - radius) <= margin) {
            std::ostringstream msg;
            msg << "riesz_projector: circle of radius " << radius << " passes through eigenvalue ("
                << mus[i].real() << "," << mus[i].imag() << ")";
            throw Error(msg.str());
        }
        if (dist < radius && dist > cluster_tol) {
            std::ostringstream msg;
            msg << "riesz_projector: circle encloses foreign eigenvalue (" << mus[i].real() << ","
                << mus[i].imag() << ")";
            throw Error(msg.str());
        }
    }

    const Matrix I = Matrix::Identity(op.dimension, op.dimension);
    auto quadrature = [&](int M) {
        Matrix acc = Matrix::Zero(op.dimension, op.dimension);
        for (int j = 0; j < M; ++j) {
            const double th = 2.0 * kPi * (j + 0.5) / M;
            const Complex z = mu_center + radius * std::polar(1.0, th);
            // (1/2 pi i) \oint (zI - B)^{-1} dz, trapezoid on the circle
            Matrix R = (z * I - op.dense).partialPivLu().solve(I);
            acc += std::polar(radius / M, th) * R;
        }
        return acc;
    };
    Matrix P = quadrature(panels);
    Matrix P2 = quadrature(2 * panels);
    int M = 2 * panels;
    while ((P2 - P).norm() > 1e-12 * std::max(1.0, P2.norm()) && M < 16384) {
        P = P2;
        M *= 2;
        P2 = quadrature(M);
    }
    return P2;
}

Vector raw_coefficients(const SpectralDecomposition& decomp, const Vector& f) {
    if (!decomp.biorthogonal_built)
        throw Error("raw_coefficients: biorthogonal system not built");
    if (f.size() != decomp.dimension) throw Error("raw_coefficients: vector size mismatch");
    Matrix G = decomp.adjoint_matrix();
    return G.adjoint() * f;  // c_n = (f, g_n)
}

double chain_residual(const SpectralDecomposition& decomp, const OperatorSpec& op) {
    double worst = 0.0;
    for (const auto& grp : decomp.groups)
        for (const auto& ch : grp.chains)
            for (int j = 0; j < ch.length(); ++j) {
                Vector want = grp.mu * ch.e[j];
                if (j > 0) want += ch.e[j - 1];
                worst = std::max(worst, (op.dense * ch.e[j] - want).norm() / std::max(1.0, ch.e[j].norm()));
            }
    return worst;
}

double adjoint_chain_residual(const SpectralDecomposition& decomp, const OperatorSpec& op) {
    double worst = 0.0;
    const Matrix Bh = op.dense.adjoint();
    for (const auto& grp : decomp.groups)
        for (const auto& ch : grp.chains) {
            const int k = ch.length() - 1;
            for (int j = 0; j <= k; ++j) {
                Vector want = std::conj(grp.mu) * ch.g[j];
                if (j < k) want += ch.g[j + 1];
                worst = std::max(worst, (Bh * ch.g[j] - want).norm() / std::max(1.0, ch.g[j].norm()));
            }
        }
    return worst;
}

}  // namespace lidskii
