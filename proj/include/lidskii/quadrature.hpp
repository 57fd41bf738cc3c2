#pragma once

#include "lidskii/types.hpp"

#include <functional>
#include <vector>

namespace lidskii {

/// Vector-valued integrand over a real parameter.
using VectorIntegrand = std::function<Vector(double)>;

struct PanelEstimate {
    Vector value;
    double error;  // |K15 - G7| in the vector norm
};

/// Gauss7/Kronrod15 pair on [a, b].
PanelEstimate gauss_kronrod_15(const VectorIntegrand& f, double a, double b, int dim);

struct AdaptiveResult {
    Vector value;
    double error;
    int panels;
};

/// Adaptive bisection until every panel satisfies err <= tol * max(1, panel length / total length).
/// Panel endpoints given in `breakpoints` are never crossed (corner points stay
/// panel boundaries).
AdaptiveResult integrate_adaptive(const VectorIntegrand& f, double a, double b, int dim,
                                  double tol, const std::vector<double>& breakpoints = {},
                                  int max_depth = 24);

}  // namespace lidskii
