#include "lidskii/operator_core.hpp"
#include "lidskii/serialize.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace lidskii;

namespace {
Matrix jordan2(Complex mu) {
    Matrix m(2, 2);
    m << mu, 1.0, 0.0, mu;
    return m;
}
}  // namespace

TEST_CASE("load_operator round-trips a 1x1 matrix") {
    Json j;
    j["dimension"] = 1;
    j["entries"] = Json::array({Json::array({Json::array({2.0, 0.0})})});
    OperatorSpec op = operator_from_json(j);
    CHECK(op.dimension == 1);
    CHECK(op.dense(0, 0) == Complex(2.0, 0.0));
}

TEST_CASE("structured input with identity basis is the Jordan matrix itself") {
    OperatorSpec op = make_structured_operator({{Complex(0.5, 0.0), 2}}, Matrix::Identity(2, 2));
    CHECK((op.dense - jordan2(0.5)).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("structured reconstruction matches the multiply-out oracle") {
    Rng rng(11);
    Matrix P = Matrix::Identity(3, 3) + 0.3 * rng.normal_matrix(3, 3);
    OperatorSpec op = make_structured_operator({{Complex(0.4, 0.1), 3}}, P);
    Matrix J = jordan_matrix({{Complex(0.4, 0.1), 3}});
    Matrix oracle = P * J * P.inverse();
    CHECK((op.dense - oracle).norm() / oracle.norm() < 1e-12);
    validate_operator(op);
}

TEST_CASE("singular change-of-basis is rejected with a condition report") {
    Matrix P(2, 2);
    P << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_WITH_AS(make_structured_operator({{Complex(1.0, 0.0), 2}}, P),
                         doctest::Contains("condition"), Error);
}

TEST_CASE("resolvent_apply: scalar, identity and 2x2 inverse oracle") {
    OperatorSpec scalar = make_operator(Matrix::Constant(1, 1, 0.5));
    Vector one = Vector::Ones(1);
    CHECK(std::abs(resolvent_apply(scalar, 1.0, one)[0] - 2.0) < 1e-12);

    Rng rng(3);
    OperatorSpec any = make_operator(rng.normal_matrix(4, 4));
    Vector f = rng.normal_vector(4);
    CHECK((resolvent_apply(any, 0.0, f) - f).norm() < 1e-14);

    OperatorSpec jb = make_operator(jordan2(0.5));
    Vector f2(2);
    f2 << 0.0, 1.0;
    // (I - B)^{-1} = [[2,4],[0,2]] for the 0.5-Jordan block
    Vector x = resolvent_apply(jb, 1.0, f2);
    CHECK(std::abs(x[0] - 4.0) < 1e-12);
    CHECK(std::abs(x[1] - 2.0) < 1e-12);
}

TEST_CASE("resolvent_apply names the offending pole") {
    OperatorSpec jb = make_operator(jordan2(0.5));
    Vector f = Vector::Ones(2);
    CHECK_THROWS_WITH_AS(resolvent_apply(jb, 2.0, f), doctest::Contains("characteristic number"),
                         Error);
}

TEST_CASE("resolvent backward error stays at 1e-12 off the poles") {
    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        OperatorSpec op = make_operator(0.5 * rng.normal_matrix(5, 5));
        Vector f = rng.normal_vector(5);
        Complex lam(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
        Vector x = resolvent_apply(op, lam, f);
        Matrix M = Matrix::Identity(5, 5) - lam * op.dense;
        CHECK((M * x - f).norm() / f.norm() < 1e-12);
    }
}

TEST_CASE("singular values: diagonal, nilpotent shift, Gram oracle") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    RealVector s = singular_values(make_operator(d));
    CHECK(s[0] == doctest::Approx(3.0));
    CHECK(s[1] == doctest::Approx(1.0));

    Matrix shift = Matrix::Zero(2, 2);
    shift(0, 1) = 1.0;
    s = singular_values(make_operator(shift));
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(0.0));

    Rng rng(5);
    Matrix B = rng.normal_matrix(4, 4);
    RealVector got = singular_values(make_operator(B));
    RealVector want = oracles::gram_sqrt_singular_values(B);
    CHECK((got - want).norm() < 1e-10 * want.norm());
}

TEST_CASE("singular values of a normal matrix are the sorted eigenvalue moduli") {
    Rng rng(7);
    Matrix X = rng.normal_matrix(5, 5);
    Eigen::HouseholderQR<Matrix> qr(X);
    Matrix Q = qr.householderQ();
    Vector evs = rng.normal_vector(5);
    Matrix B = Q * evs.asDiagonal() * Q.adjoint();
    RealVector s = singular_values(make_operator(B));
    std::vector<double> mods;
    for (int i = 0; i < 5; ++i) mods.push_back(std::abs(evs[i]));
    std::sort(mods.begin(), mods.end(), std::greater<>());
    for (int i = 0; i < 5; ++i) CHECK(s[i] == doctest::Approx(mods[i]).epsilon(1e-10));
}

TEST_CASE("sector estimate: positive diagonal, two rays, sectorial construction") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 2.0;
    SectorEstimate se = estimate_sector(make_operator(d), 16);
    CHECK(se.vertex == 0.0);
    CHECK(se.semi_angle < 1e-12);

    Matrix d2 = Matrix::Zero(2, 2);
    d2(0, 0) = Complex(1.0, 1.0);
    d2(1, 1) = Complex(1.0, -1.0);
    se = estimate_sector(make_operator(d2), 64);
    CHECK(se.semi_angle == doctest::Approx(kPi / 4).epsilon(1e-9));

    Rng rng(23);
    for (double s : {0.3, 0.8}) {
        OperatorSpec op = make_operator(oracles::sectorial_matrix(rng, 5, s));
        SectorEstimate est = estimate_sector(op, 400);
        CHECK(est.semi_angle <= std::atan(s) + 1e-9);
    }
}

TEST_CASE("sector estimate is monotone in the sample count") {
    Rng rng(29);
    OperatorSpec op = make_operator(rng.normal_matrix(4, 4));
    double prev = 0.0;
    for (int samples : {8, 32, 128, 512}) {
        SectorEstimate se = estimate_sector(op, samples);
        CHECK(se.semi_angle >= prev - 1e-12);
        prev = se.semi_angle;
    }
}

TEST_CASE("fredholm determinant: identity, diagonal product, singular-value bound") {
    Rng rng(31);
    OperatorSpec any = make_operator(rng.normal_matrix(3, 3));
    CHECK(std::abs(fredholm_determinant(any, 0.0) - 1.0) < 1e-14);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.5;
    d(1, 1) = 1.0 / 3.0;
    CHECK(std::abs(fredholm_determinant(make_operator(d), 1.0) - 1.0 / 3.0) < 1e-14);

    for (int rep = 0; rep < 50; ++rep) {
        Matrix B = rng.normal_matrix(4, 4);
        OperatorSpec op = make_operator(B);
        Complex lam = rng.normal_complex();
        RealVector s = singular_values(op);
        double bound = 1.0;
        for (int i = 0; i < s.size(); ++i) bound *= 1.0 + std::abs(lam) * s[i];
        CHECK(std::abs(fredholm_determinant(op, lam)) <= bound * (1.0 + 1e-12));
    }
}

TEST_CASE("fredholm determinant equals the eigenvalue product") {
    Rng rng(37);
    Matrix B = rng.normal_matrix(5, 5);
    OperatorSpec op = make_operator(B);
    Vector mus = operator_eigenvalues(op);
    Complex lam(0.3, -0.2);
    Complex prod = 1.0;
    for (int i = 0; i < mus.size(); ++i) prod *= 1.0 - lam * mus[i];
    CHECK(std::abs(fredholm_determinant(op, lam) - prod) < 1e-10 * std::abs(prod));
}

TEST_CASE("adjoint_apply: selfadjoint case, shifted transpose, inner-product identity") {
    Matrix sym(2, 2);
    sym << 1.0, 2.0, 2.0, -1.0;
    OperatorSpec op = make_operator(sym);
    Rng rng(41);
    Vector f = rng.normal_vector(2);
    CHECK((adjoint_apply(op, f) - sym * f).norm() < 1e-14);

    Matrix shift = Matrix::Zero(2, 2);
    shift(0, 1) = 1.0;
    Vector e0(2);
    e0 << 1.0, 0.0;
    Vector g = adjoint_apply(make_operator(shift), e0);
    CHECK(std::abs(g[0]) < 1e-15);
    CHECK(std::abs(g[1] - 1.0) < 1e-15);

    for (int rep = 0; rep < 20; ++rep) {
        Matrix B = rng.normal_matrix(4, 4);
        OperatorSpec bop = make_operator(B);
        Vector x = rng.normal_vector(4), y = rng.normal_vector(4);
        // (Bx, y) = (x, B*y)
        Complex lhs = y.dot(B * x);
        Complex rhs = adjoint_apply(bop, y).dot(x);
        CHECK(std::abs(lhs - rhs) < 1e-13 * std::abs(lhs));
    }
}

TEST_CASE("operator json round trip preserves entries and structure") {
    Rng rng(43);
    OperatorSpec op = oracles::random_structured(rng, 4, 2);
    Json j = to_json(op);
    OperatorSpec back = operator_from_json(j);
    CHECK((back.dense - op.dense).norm() < 1e-12 * op.dense.norm());
    REQUIRE(back.structured.has_value());
    CHECK(back.structured->blocks.size() == op.structured->blocks.size());
}

TEST_CASE("malformed operator json is rejected") {
    Json j;
    j["dimension"] = 2;
    j["entries"] = Json::array({Json::array({Json::array({1.0, 0.0})})});  // ragged
    CHECK_THROWS_AS(operator_from_json(j), Error);

    Json j2;
    j2["dimension"] = 2;
    CHECK_THROWS_AS(operator_from_json(j2), Error);
}
