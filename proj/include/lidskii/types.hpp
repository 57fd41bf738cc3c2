#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace lidskii {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

/// Error type for all contract violations in this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Principal-branch power z^a, arg z in (-pi, pi].
inline Complex principal_pow(Complex z, double a) {
    if (z == Complex(0.0, 0.0)) throw Error("principal_pow: zero base");
    return std::exp(a * std::log(z));
}

inline double relative_error(const Vector& got, const Vector& want) {
    double scale = want.norm();
    if (scale == 0.0) return got.norm();
    return (got - want).norm() / scale;
}

inline double relative_error(Complex got, Complex want) {
    double scale = std::abs(want);
    if (scale == 0.0) return std::abs(got);
    return std::abs(got - want) / scale;
}

}  // namespace lidskii
