#include "lidskii/contour.hpp"

#include "lidskii/abel.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace lidskii;

namespace {

GroupedSums all_group_sums(const OperatorSpec& op, const Vector& f, double t, double alpha) {
    SpectralDecomposition d = build_biorthogonal(decompose(op), op);
    Vector raw = raw_coefficients(d, f);
    RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
    SummationSchedule s = group_schedule(d, 1.0 / (2.0 * alpha), 1e-9);
    return grouped_partial_sums(d, ct, s);
}

}  // namespace

TEST_CASE("build_contour: scalar admissibility and ray-decay truncation") {
    OperatorSpec op = make_operator(Matrix::Constant(1, 1, 0.5));
    SectorEstimate sector = estimate_sector(op, 8);
    ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, 1.0, 2.0, 1e-12);
    CHECK(c.r < 2.0);
    CHECK(c.r > 0.0);
    CHECK(c.R_max > 2.0);
    // the decay inequality actually holds at R_max
    const double decay = std::cos(2.0 * c.far_angle());
    CHECK(std::exp(-std::pow(c.R_max, 2.0) * decay) < 1e-12);

    CHECK(c.segments().size() == 3);
}

TEST_CASE("build_contour rejects sectors too wide for alpha") {
    Matrix d2 = Matrix::Zero(2, 2);
    d2(0, 0) = Complex(1.0, 1.0);
    d2(1, 1) = Complex(1.0, -1.0);
    OperatorSpec op = make_operator(d2);  // theta = pi/4
    SectorEstimate sector = estimate_sector(op, 16);
    CHECK_THROWS_WITH_AS(build_contour(ContourKind::gamma_B, op, sector, 1.0, 2.0, 1e-10),
                         doctest::Contains("pi/(2 alpha)"), Error);
}

TEST_CASE("Gamma_A contour passes left of the origin at the vertex") {
    Rng rng(401);
    OperatorSpec op = make_operator(oracles::sectorial_matrix(rng, 4, 0.2) +
                                    0.5 * Matrix::Identity(4, 4));
    // measured shifted sector for W-like operator: vertex -1
    SectorEstimate shifted = estimate_sector(op, 64, -1.0);
    shifted.vertex = -1.0;
    ContourSpec c = build_contour(ContourKind::Gamma_A, op, shifted, 0.5, 2.0, 1e-10);
    auto segs = c.segments();
    CHECK(segs.size() >= 3);
    CHECK(c.iota == -1.0);
    // frontier of L_iota passes left of zero: the vertex is strictly negative
    CHECK(c.iota < 0.0);
}

TEST_CASE("integral equals the residue calculus on a scalar") {
    OperatorSpec op = make_operator(Matrix::Constant(1, 1, 0.5));
    SectorEstimate sector = estimate_sector(op, 8);
    Vector f = Vector::Ones(1);
    ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, 1.0, 1.0, 1e-12);
    QuadratureResult qr = integrate_resolvent_functional(op, f, 1.0, 1.0, c);
    CHECK(std::abs(qr.value[0] - std::exp(-2.0)) < 1e-9);
    CHECK(qr.panel_error_estimate < 1e-8);
    CHECK(qr.truncation_bound < 1e-9);
}

TEST_CASE("integral matches the eigendecomposition oracle on a diagonalizable matrix") {
    Rng rng(409);
    Matrix X = rng.normal_matrix(4, 4);
    Eigen::HouseholderQR<Matrix> qr(X);
    Matrix Q = qr.householderQ();
    Vector mus(4);
    for (int i = 0; i < 4; ++i) mus[i] = std::polar(0.25 + 0.2 * i, (rng.uniform() - 0.5) * 0.4);
    OperatorSpec op = make_operator(Matrix(Q * mus.asDiagonal() * Q.adjoint()));
    Vector f = rng.normal_vector(4);
    const double t = 0.7, alpha = 1.5;

    SectorEstimate sector = estimate_sector(op, 64);
    ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, t, alpha, 1e-12);
    QuadratureResult qres = integrate_resolvent_functional(op, f, t, alpha, c);

    Vector want = Vector::Zero(4);
    for (int i = 0; i < 4; ++i) {
        Vector ui = Q.col(i);
        want += std::exp(-principal_pow(1.0 / mus[i], alpha) * t) * ui.dot(f) * ui;
    }
    CHECK((qres.value - want).norm() < 1e-8 * want.norm());
}

TEST_CASE("doubling panels does not worsen the oracle discrepancy") {
    Rng rng(419);
    Matrix X = rng.normal_matrix(3, 3);
    Eigen::HouseholderQR<Matrix> qr(X);
    Matrix Q = qr.householderQ();
    Vector mus(3);
    mus << 0.5, 0.3, 0.2;
    OperatorSpec op = make_operator(Matrix(Q * mus.asDiagonal() * Q.adjoint()));
    Vector f = rng.normal_vector(3);
    const double t = 0.5, alpha = 2.0;
    Vector want = Vector::Zero(3);
    for (int i = 0; i < 3; ++i)
        want += std::exp(-principal_pow(1.0 / mus[i], alpha) * t) * Q.col(i).dot(f) * Q.col(i);

    SectorEstimate sector = estimate_sector(op, 32);
    ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, t, alpha, 1e-12);
    const double coarse =
        (integrate_resolvent_functional(op, f, t, alpha, c, 1e-6).value - want).norm();
    const double fine =
        (integrate_resolvent_functional(op, f, t, alpha, c, 1e-12).value - want).norm();
    CHECK(fine <= coarse * (1.0 + 1e-9));
}

TEST_CASE("t -> 0 limit recovers f (Lemma 7 on the closed contour)") {
    Rng rng(421);
    OperatorSpec op = oracles::random_structured(rng, 4, 2, 0.2);
    Vector f = rng.normal_vector(4);
    const double alpha = 2.0;
    SectorEstimate sector = estimate_sector(op, 64);
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1e-1, 1e-2, 1e-3}) {
        ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, t, alpha, 1e-12);
        QuadratureResult qr = integrate_resolvent_functional(op, f, t, alpha, c);
        const double err = (qr.value - f).norm();
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-2 * f.norm());
}

TEST_CASE("residue at a scalar pole matches the closed form") {
    OperatorSpec op = make_operator(Matrix::Constant(1, 1, 0.5));
    Vector f = Vector::Ones(1);
    for (double alpha : {1.0, 1.5, 2.0}) {
        Vector res = residue_at_pole(op, f, 1.0, alpha, 2.0, 0.5);
        const Complex want = -std::exp(-principal_pow(Complex(2.0, 0.0), alpha) * 1.0);
        CHECK(std::abs(res[0] - want) < 1e-10);
    }
}

TEST_CASE("residue on a diagonal operator unwinds to the singleton chain formula") {
    Matrix dm = Matrix::Zero(2, 2);
    dm(0, 0) = 0.5;
    dm(1, 1) = 0.25;
    OperatorSpec op = make_operator(dm);
    SpectralDecomposition d = build_biorthogonal(decompose(op), op);
    Rng rng(431);
    Vector f = rng.normal_vector(2);
    const double t = 0.8, alpha = 1.5;
    for (const auto& grp : d.groups) {
        Vector res = residue_at_pole(op, f, t, alpha, grp.lambda(), 0.4 * std::abs(grp.lambda()));
        const auto& ch = grp.chains[0];
        Vector want = Vector(-std::exp(-principal_pow(grp.lambda(), alpha) * t) * ch.g[0].dot(f) *
                             ch.e[0]);
        CHECK((res - want).norm() < 1e-10);
    }
}

TEST_CASE("residue on a 2-chain matches the regularized-coefficient formula") {
    Matrix jb(2, 2);
    jb << 0.5, 1.0, 0.0, 0.5;
    OperatorSpec op = make_operator(jb);
    SpectralDecomposition d = build_biorthogonal(decompose(op), op);
    Rng rng(433);
    Vector f = rng.normal_vector(2);
    const double t = 0.6, alpha = 1.5;
    Vector raw = raw_coefficients(d, f);
    RegularizedCoefficients ct = regularized_coefficients(d, raw, t, alpha);
    Vector formula = Vector::Zero(2);
    int n = 0;
    for (const auto& ch : d.groups[0].chains)
        for (const auto& e : ch.e) formula += ct.values[n++] * e;
    Vector res = residue_at_pole(op, f, t, alpha, 2.0, 0.7);
    CHECK((res + formula).norm() < 1e-9 * formula.norm());
}

TEST_CASE("residue rejects circles containing foreign poles") {
    Matrix dm = Matrix::Zero(2, 2);
    dm(0, 0) = 0.5;   // lambda = 2
    dm(1, 1) = 0.45;  // lambda = 2.22
    OperatorSpec op = make_operator(dm);
    CHECK_THROWS_WITH_AS(residue_at_pole(op, Vector::Ones(2), 1.0, 2.0, 2.0, 0.5),
                         doctest::Contains("foreign"), Error);
}

TEST_CASE("integral equals the sum over all groups of minus the residues") {
    Rng rng(439);
    OperatorSpec op = oracles::random_structured(rng, 5, 3, 0.2);
    Vector f = rng.normal_vector(5);
    const double t = 0.6, alpha = 2.0;
    SectorEstimate sector = estimate_sector(op, 64);
    ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, t, alpha, 1e-12);
    QuadratureResult qr = integrate_resolvent_functional(op, f, t, alpha, c);

    SpectralDecomposition d = decompose(op);
    Vector residue_sum = Vector::Zero(5);
    for (const auto& grp : d.groups) {
        double radius = 0.4 * std::abs(grp.lambda());
        for (const auto& other : d.groups)
            if (&other != &grp)
                radius = std::min(radius, 0.45 * std::abs(other.lambda() - grp.lambda()));
        residue_sum += residue_at_pole(op, f, t, alpha, grp.lambda(), radius);
    }
    CHECK((qr.value + residue_sum).norm() <=
          std::max(1e-8 * residue_sum.norm(),
                   10.0 * (qr.panel_error_estimate + qr.truncation_bound)));
}

TEST_CASE("Theorem 2 identity: contour integral equals the grouped series total") {
    Rng rng(443);
    OperatorSpec op = oracles::random_structured(rng, 6, 3, 0.2);
    Vector f = rng.normal_vector(6);
    for (double alpha : {1.5, 2.0}) {
        for (double t : {0.1, 1.0}) {
            SectorEstimate sector = estimate_sector(op, 64);
            ContourSpec c = build_contour(ContourKind::gamma_B, op, sector, t, alpha, 1e-12);
            QuadratureResult qr = integrate_resolvent_functional(op, f, t, alpha, c);
            GroupedSums sums = all_group_sums(op, f, t, alpha);
            CHECK(relative_error(qr.value, sums.total) < 1e-6);
        }
    }
}

TEST_CASE("Lemma 6 bound: scalar ray, diagonal ray, negative real axis") {
    OperatorSpec one = make_operator(Matrix::Constant(1, 1, 1.0));
    RayL6Params p1{kPi / 2.0, 0.0, 1e-3, 1e3};
    BoundCheck b1 = verify_ray_bound(one, p1, 128);
    CHECK(b1.satisfied);
    CHECK(b1.worst_bound == doctest::Approx(1.0));

    Matrix dm = Matrix::Zero(2, 2);
    dm(0, 0) = 1.0;
    dm(1, 1) = 2.0;
    OperatorSpec diag = make_operator(dm);
    RayL6Params p2{3.0 * kPi / 4.0, 0.0, 1e-3, 1e3};
    BoundCheck b2 = verify_ray_bound(diag, p2, 256);
    CHECK(b2.satisfied);
    CHECK(b2.worst_bound == doctest::Approx(std::sqrt(2.0)));

    // lambda on the negative real axis, positive diagonal B: norm <= 1
    for (double s : {0.1, 1.0, 10.0}) {
        CHECK(resolvent_norm(diag, Complex(-s, 0.0)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("Lemma 6 holds on seeded sectorial matrices") {
    Rng rng(449);
    for (int rep = 0; rep < 20; ++rep) {
        const double s = 0.2 + 0.6 * rng.uniform();
        OperatorSpec op = make_operator(oracles::sectorial_matrix(rng, 4, s));
        const double theta = std::atan(s);
        RayL6Params p{theta + (kPi - theta) * (0.3 + 0.4 * rng.uniform()), theta, 1e-2, 1e2};
        BoundCheck bc = verify_ray_bound(op, p, 256);
        CHECK(bc.max_violation <= 1e-12);
    }
}

TEST_CASE("Lemma 9 bound holds on the intersection frontier") {
    Rng rng(457);
    // strictly accretive W with small imaginary part; A = W^{-1}
    Matrix W = oracles::sectorial_matrix(rng, 4, 0.3) + 2.0 * Matrix::Identity(4, 4);
    Matrix A = W.partialPivLu().solve(Matrix::Identity(4, 4));
    OperatorSpec opA = make_operator(A);

    SectorL9Params p;
    // sampled sector estimates are padded so the certified sectors really
    // contain the numerical ranges
    p.theta0 = estimate_sector(opA, 400).semi_angle + 0.02;
    OperatorSpec opW = make_operator(W);
    SectorEstimate shifted = estimate_sector(opW, 400, -1.0);
    p.iota = -1.0;
    p.theta_iota = shifted.semi_angle + 0.02;
    p.eps = 0.05;
    p.s_max = 50.0;
    BoundCheck bc = verify_sector_bound(opA, p, 256);
    CHECK(bc.satisfied);
}
