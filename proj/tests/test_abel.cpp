#include "lidskii/abel.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace lidskii;

namespace {

SpectralDecomposition full(const OperatorSpec& op) {
    return build_biorthogonal(decompose(op), op);
}

OperatorSpec diag_op(std::vector<Complex> entries) {
    Matrix m = Matrix::Zero(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return make_operator(std::move(m));
}

/// Decomposition stub carrying prescribed characteristic-number moduli, for
/// schedule arithmetic tests.
SpectralDecomposition moduli_decomp(const std::vector<double>& lambda_moduli) {
    std::vector<Complex> mus;
    for (double l : lambda_moduli) mus.push_back(1.0 / l);
    std::sort(mus.begin(), mus.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
    OperatorSpec op = diag_op(mus);
    return decompose(op);
}

}  // namespace

TEST_CASE("abel polynomial: degree zero and the t = 0 collapse") {
    CHECK(eval_abel_polynomial(0, 1.7, Complex(0.3, 0.4), 2.0) == Complex(1.0, 0.0));
    for (int m = 1; m <= 5; ++m)
        CHECK(std::abs(eval_abel_polynomial(m, 1.3, Complex(0.5, -0.2), 0.0)) == 0.0);
}

TEST_CASE("abel polynomial degree one is t alpha zeta^{-alpha-1}") {
    const double alpha = 1.6, t = 0.8;
    const Complex zeta(0.7, 0.3);
    const Complex want = t * alpha * principal_pow(zeta, -alpha - 1.0);
    CHECK(std::abs(eval_abel_polynomial(1, alpha, zeta, t) - want) < 1e-14 * std::abs(want));
}

TEST_CASE("abel polynomial matches the finite-difference oracle for m <= 5") {
    Rng rng(211);
    for (int rep = 0; rep < 20; ++rep) {
        const double alpha = 1.0 + 1.5 * rng.uniform();
        const double t = 0.2 + rng.uniform();
        const Complex zeta = std::polar(0.7 + rng.uniform(), (rng.uniform() - 0.5) * 1.0);
        for (int m = 1; m <= 5; ++m) {
            const Complex got = eval_abel_polynomial(m, alpha, zeta, t);
            const Complex want = oracles::abel_polynomial_fd(m, alpha, zeta, t, 1e-2 * std::abs(zeta));
            CHECK(std::abs(got - want) < 1e-6 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("abel polynomial rejects zeta = 0 and degrees beyond the cap") {
    CHECK_THROWS_AS(eval_abel_polynomial(1, 1.5, Complex(0.0, 0.0), 1.0), Error);
    CHECK_THROWS_AS(eval_abel_polynomial(33, 1.5, Complex(1.0, 0.0), 1.0), Error);
}

TEST_CASE("regularized coefficients: diagonal operator decays coefficientwise") {
    OperatorSpec op = diag_op({Complex(0.5, 0.0), Complex(0.25, 0.0)});
    SpectralDecomposition d = full(op);
    Vector raw(2);
    raw << Complex(1.0, 0.5), Complex(-0.5, 0.25);
    const double t = 0.7, alpha = 1.5;
    RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
    int base = 0;
    for (const auto& grp : d.groups) {
        const Complex want = std::exp(-principal_pow(grp.lambda(), alpha) * t) * raw[base];
        CHECK(std::abs(ct.values[base] - want) < 1e-14 * std::abs(want));
        ++base;
    }
}

TEST_CASE("regularized coefficients on a 2-chain substitute the m = 1 polynomial") {
    Matrix jb(2, 2);
    jb << 0.5, 1.0, 0.0, 0.5;
    OperatorSpec op = make_operator(jb);
    SpectralDecomposition d = full(op);
    Vector raw(2);
    raw << Complex(0.8, -0.1), Complex(0.3, 0.6);
    const double t = 0.9, alpha = 1.7;
    const Complex mu(0.5, 0.0), lambda = 1.0 / mu;
    RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
    // c_0(t) = e^{-lambda^alpha t}(c_0 + P_1(mu) c_1); the polynomial argument is
    // the eigenvalue, so P_1 = t alpha mu^{-alpha-1} = t alpha lambda^{alpha+1}
    const Complex p1 = t * alpha * principal_pow(mu, -alpha - 1.0);
    const Complex decay = std::exp(-principal_pow(lambda, alpha) * t);
    CHECK(std::abs(ct.values[0] - decay * (raw[0] + p1 * raw[1])) < 1e-13);
    CHECK(std::abs(ct.values[1] - decay * raw[1]) < 1e-13);
}

TEST_CASE("c_n(t) -> c_n as t -> 0, with a stable linear rate") {
    Rng rng(223);
    OperatorSpec op = oracles::random_structured(rng, 6, 3);
    SpectralDecomposition d = full(op);
    Vector f = rng.normal_vector(6);
    Vector raw = raw_coefficients(d, f);
    const double alpha = 1.5;

    RegularizedCoefficients tiny = regularized_coefficients(d, raw, 1e-8, alpha);
    const double gap = (tiny.values - raw).cwiseAbs().maxCoeff();
    CHECK(gap <= 1e-6 * (1.0 + raw.cwiseAbs().maxCoeff()));

    // ratio |c_n(t) - c_n| / t bounded and stable within a factor 2
    for (int n = 0; n < raw.size(); ++n) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double t : {1e-2, 1e-3, 1e-4}) {
            RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
            const double ratio = std::abs(ct.values[n] - raw[n]) / t;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        CHECK(hi <= 2.0 * lo + 1e-9);
    }
}

TEST_CASE("group schedule: empty spectrum, all-boundaries, and gap grouping") {
    SpectralDecomposition empty;
    empty.dimension = 0;
    SummationSchedule s0 = group_schedule(empty, 0.5, 0.1);
    CHECK(s0.boundaries == std::vector<int>{0});

    SummationSchedule s1 = group_schedule(moduli_decomp({1.0, 2.0, 4.0, 8.0}), 0.5, 0.1);
    CHECK(s1.boundaries == std::vector<int>{0, 1, 2, 3, 4});
    CHECK_FALSE(s1.single_group_fallback);

    SummationSchedule s2 = group_schedule(moduli_decomp({1.0, 1.01, 5.0}), 0.5, 0.5);
    CHECK(s2.boundaries == std::vector<int>{0, 2, 3});
    CHECK(s2.in_group_max_ratio > 0.0);
}

TEST_CASE("schedule boundaries satisfy the stored gap inequality") {
    Rng rng(227);
    OperatorSpec op = oracles::random_structured(rng, 7, 2);
    SpectralDecomposition d = decompose(op);
    SummationSchedule s = group_schedule(d, 0.4, 0.3);
    for (const auto& diag : s.diagnostics) CHECK(diag.gap >= diag.threshold);
}

TEST_CASE("no admissible gap flags the one-group fallback") {
    SummationSchedule s = group_schedule(moduli_decomp({1.0, 1.0001, 1.0002}), 0.5, 10.0);
    CHECK(s.single_group_fallback);
    CHECK(s.boundaries == std::vector<int>{0, 3});
}

TEST_CASE("grouped sums: singleton schedule on a diagonal operator unwinds the definition") {
    OperatorSpec op = diag_op({Complex(0.5, 0.0), Complex(0.2, 0.0)});
    SpectralDecomposition d = full(op);
    Rng rng(229);
    Vector f = rng.normal_vector(2);
    Vector raw = raw_coefficients(d, f);
    const double t = 0.6, alpha = 2.0;
    RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
    SummationSchedule s = group_schedule(d, 0.25, 1e-6);  // every gap is a boundary
    REQUIRE(s.group_count() == 2);
    GroupedSums sums = grouped_partial_sums(d, ct, s);
    int base = 0;
    for (int nu = 0; nu < 2; ++nu) {
        const auto& grp = d.groups[nu];
        Vector want = Vector(std::exp(-principal_pow(grp.lambda(), alpha) * t) * raw[base] *
                             grp.chains[0].e[0]);
        CHECK((sums.group_vectors[nu] - want).norm() < 1e-13);
        ++base;
    }
}

TEST_CASE("group norms vanish for large t inside the decay sector") {
    Rng rng(233);
    OperatorSpec op = oracles::random_structured(rng, 5, 2, 0.2);
    SpectralDecomposition d = full(op);
    Vector f = rng.normal_vector(5);
    Vector raw = raw_coefficients(d, f);
    const double alpha = 1.5;
    SummationSchedule s = group_schedule(d, 1.0 / (2.0 * alpha), 0.5);
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1.0, 4.0, 16.0}) {
        RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
        GroupedSums sums = grouped_partial_sums(d, ct, s);
        double total = 0.0;
        for (double n : sums.group_norms) total += n;
        CHECK(total < prev);
        prev = total;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("group norms are nonincreasing in t for normal sectorial spectra") {
    // orthonormal eigenvectors, spectrum inside |arg| < pi/(2 alpha)
    Rng rng(239);
    Matrix X = rng.normal_matrix(5, 5);
    Eigen::HouseholderQR<Matrix> qr(X);
    Matrix Q = qr.householderQ();
    Vector mus(5);
    for (int i = 0; i < 5; ++i) mus[i] = std::polar(0.2 + 0.15 * i, (rng.uniform() - 0.5) * 0.3);
    OperatorSpec op = make_operator(Matrix(Q * mus.asDiagonal() * Q.adjoint()));
    SpectralDecomposition d = full(op);
    Vector f = rng.normal_vector(5);
    Vector raw = raw_coefficients(d, f);
    const double alpha = 2.0;
    SummationSchedule s = group_schedule(d, 1.0 / (2.0 * alpha), 1e-6);

    std::vector<double> prev(d.groups.size(), std::numeric_limits<double>::infinity());
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
        GroupedSums sums = grouped_partial_sums(d, ct, s);
        for (std::size_t nu = 0; nu < sums.group_norms.size(); ++nu) {
            CHECK(sums.group_norms[nu] <= prev[nu] * (1.0 + 1e-12));
            prev[nu] = sums.group_norms[nu];
        }
    }
}

TEST_CASE("grouped sums are invariant under a Jordan basis change within blocks") {
    Rng rng(241);
    std::vector<JordanBlock> blocks = {{Complex(0.5, 0.05), 3}, {Complex(0.21, -0.02), 2}};
    Matrix P = Matrix::Identity(5, 5) + 0.2 * rng.normal_matrix(5, 5);
    OperatorSpec op1 = make_structured_operator(blocks, P);

    // commutant transform: upper-triangular Toeplitz per block keeps P J P^{-1}
    Matrix T = Matrix::Identity(5, 5);
    T(0, 1) = Complex(0.4, -0.3);
    T(0, 2) = Complex(-0.2, 0.1);
    T(1, 2) = T(0, 1);
    T(3, 4) = Complex(0.7, 0.2);
    OperatorSpec op2 = make_structured_operator(blocks, Matrix(P * T));
    REQUIRE((op1.dense - op2.dense).norm() < 1e-12 * op1.dense.norm());

    Vector f = rng.normal_vector(5);
    const double t = 0.8, alpha = 1.5;
    auto sums_for = [&](const OperatorSpec& op) {
        SpectralDecomposition d = full(op);
        Vector raw = raw_coefficients(d, f);
        RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
        SummationSchedule s = group_schedule(d, 1.0 / (2.0 * alpha), 1e-6);
        return grouped_partial_sums(d, ct, s);
    };
    GroupedSums a = sums_for(op1), b = sums_for(op2);
    REQUIRE(a.group_vectors.size() == b.group_vectors.size());
    for (std::size_t nu = 0; nu < a.group_vectors.size(); ++nu)
        CHECK((a.group_vectors[nu] - b.group_vectors[nu]).norm() < 1e-8);
}

TEST_CASE("schedules beyond the spectrum are rejected") {
    OperatorSpec op = diag_op({Complex(0.5, 0.0)});
    SpectralDecomposition d = full(op);
    Vector raw = raw_coefficients(d, Vector::Ones(1));
    RegularizedCoefficients ct = regularized_coefficients(d, raw, 0.5, 2.0);
    SummationSchedule bad;
    bad.boundaries = {0, 2};
    CHECK_THROWS_AS(grouped_partial_sums(d, ct, bad), Error);
}
