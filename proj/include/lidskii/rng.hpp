#pragma once

#include "lidskii/types.hpp"

#include <cmath>
#include <cstdint>

namespace lidskii {

/// Deterministic generator (splitmix64). Distributions are implemented here
/// rather than taken from <random> so streams are identical across standard
/// library implementations, which the byte-determinism contract requires.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    Complex normal_complex() { return {normal(), normal()}; }

    Vector normal_vector(int n) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = normal_complex();
        return v;
    }

    /// Uniformly distributed unit vector.
    Vector unit_vector(int n) {
        Vector v = normal_vector(n);
        double norm = v.norm();
        while (norm < 1e-30) {
            v = normal_vector(n);
            norm = v.norm();
        }
        return v / norm;
    }

    Matrix normal_matrix(int rows, int cols) {
        Matrix m(rows, cols);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < rows; ++i) m(i, j) = normal_complex();
        return m;
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lidskii
