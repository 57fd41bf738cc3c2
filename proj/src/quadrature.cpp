#include "lidskii/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace lidskii {

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
// Rows: {node, gauss weight, kronrod weight}; nodes != 0 are used at +/-x.
constexpr double kNodes[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

}  // namespace

PanelEstimate gauss_kronrod_15(const VectorIntegrand& f, double a, double b, int dim) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Vector g7 = Vector::Zero(dim);
    Vector k15 = Vector::Zero(dim);
    for (const auto& row : kNodes) {
        const double x = row[0];
        if (x == 0.0) {
            Vector y = f(mid);
            g7 += row[1] * y;
            k15 += row[2] * y;
        } else {
            Vector yp = f(mid + half * x);
            Vector ym = f(mid - half * x);
            g7 += row[1] * (yp + ym);
            k15 += row[2] * (yp + ym);
        }
    }
    g7 *= half;
    k15 *= half;
    return {k15, (k15 - g7).norm()};
}

AdaptiveResult integrate_adaptive(const VectorIntegrand& f, double a, double b, int dim,
                                  double tol, const std::vector<double>& breakpoints,
                                  int max_depth) {
    std::vector<double> pts;
    pts.push_back(a);
    for (double p : breakpoints)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    struct Piece {
        double a, b;
        int depth;
    };
    std::deque<Piece> work;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) work.push_back({pts[i], pts[i + 1], 0});

    const double total_len = b - a;
    Vector value = Vector::Zero(dim);
    double error = 0.0;
    int panels = 0;
    while (!work.empty()) {
        Piece p = work.front();
        work.pop_front();
        PanelEstimate est = gauss_kronrod_15(f, p.a, p.b, dim);
        const double budget = tol * std::max(1e-3, (p.b - p.a) / total_len);
        if (est.error > budget && p.depth < max_depth) {
            const double m = 0.5 * (p.a + p.b);
            work.push_back({p.a, m, p.depth + 1});
            work.push_back({m, p.b, p.depth + 1});
            continue;
        }
        value += est.value;
        error += est.error;
        ++panels;
    }
    return {value, error, panels};
}

}  // namespace lidskii
