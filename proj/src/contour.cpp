#include "lidskii/contour.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lidskii {

namespace {

std::vector<double> characteristic_moduli(const OperatorSpec& op) {
    Vector mus = operator_eigenvalues(op);
    const double scale = std::max(op.dense.norm(), 1e-300);
    std::vector<double> out;
    for (int i = 0; i < mus.size(); ++i)
        if (std::abs(mus[i]) > 1e-12 * scale) out.push_back(1.0 / std::abs(mus[i]));
    std::sort(out.begin(), out.end());
    return out;
}

Complex on_lower_far_ray(double iota, double phi, double u) {
    return iota + u * std::polar(1.0, -phi);
}
Complex on_upper_far_ray(double iota, double phi, double u) {
    return iota + u * std::polar(1.0, phi);
}

}  // namespace

double ContourSpec::far_angle() const {
    return kind == ContourKind::gamma_B ? theta + eps : theta_iota + eps;
}

std::vector<ContourSegment> ContourSpec::segments() const {
    std::vector<ContourSegment> segs;
    const double phi0 = theta + eps;
    auto line = [](Complex a, Complex b) {
        ContourSegment s;
        s.z0 = a;
        s.z1 = b;
        return s;
    };
    auto arc = [&](double a0, double a1) {
        ContourSegment s;
        s.is_arc = true;
        s.radius = r;
        s.a0 = a0;
        s.a1 = a1;
        return s;
    };

    if (kind == ContourKind::gamma_B) {
        segs.push_back(line(std::polar(R_max, -phi0), std::polar(r, -phi0)));
        segs.push_back(arc(-phi0, phi0));
        segs.push_back(line(std::polar(r, phi0), std::polar(R_max, phi0)));
        return segs;
    }

    // Gamma_A: origin-sector rays up to the crossing with the shifted sector,
    // then along the shifted-sector frontier.
    const double phi_i = theta_iota + eps;
    double s_cross = std::numeric_limits<double>::infinity();
    if (phi_i < phi0 && iota < 0.0) {
        const double denom = std::sin(phi_i - phi0);
        if (denom < 0.0) s_cross = iota * std::sin(phi_i) / denom;
    }
    const double u_max =
        -iota * std::cos(phi_i) + std::sqrt(std::max(R_max * R_max - iota * iota * std::sin(phi_i) * std::sin(phi_i), 0.0));
    if (!(s_cross < R_max)) {
        // no crossing inside the truncation radius: behaves like gamma_B
        segs.push_back(line(std::polar(R_max, -phi0), std::polar(r, -phi0)));
        segs.push_back(arc(-phi0, phi0));
        segs.push_back(line(std::polar(r, phi0), std::polar(R_max, phi0)));
        return segs;
    }
    const double u_cross = s_cross * std::sin(phi0) / std::sin(phi_i);
    const Complex x_minus = std::polar(s_cross, -phi0);
    const Complex x_plus = std::polar(s_cross, phi0);
    segs.push_back(line(on_lower_far_ray(iota, phi_i, u_max), on_lower_far_ray(iota, phi_i, u_cross)));
    segs.push_back(line(x_minus, std::polar(r, -phi0)));
    segs.push_back(arc(-phi0, phi0));
    segs.push_back(line(std::polar(r, phi0), x_plus));
    segs.push_back(line(on_upper_far_ray(iota, phi_i, u_cross), on_upper_far_ray(iota, phi_i, u_max)));
    return segs;
}

ContourSpec build_contour(ContourKind kind, const OperatorSpec& op, const SectorEstimate& sector,
                          double t, double alpha, double tolerance) {
    if (alpha <= 0.0) throw Error("build_contour: alpha must be positive");
    if (t <= 0.0) throw Error("build_contour: t must be positive");

    auto moduli = characteristic_moduli(op);
    if (moduli.empty()) throw Error("build_contour: operator has no characteristic numbers");
    const double scale = std::max(op.dense.norm(), 1e-300);
    if (moduli.front() < 1e-8 / scale)
        throw Error("build_contour: eigenvalue too large, no admissible inner radius");

    ContourSpec c;
    c.kind = kind;
    c.r = 0.5 * moduli.front();
    c.theta = sector.semi_angle;
    if (kind == ContourKind::gamma_B) {
        const double limit = kPi / (2.0 * alpha);
        if (c.theta >= limit) {
            std::ostringstream msg;
            msg << "build_contour: sector semi-angle " << c.theta << " >= pi/(2 alpha) = " << limit;
            throw Error(msg.str());
        }
        c.eps = std::min(0.5 * (limit - c.theta), 0.1);
    } else {
        if (sector.vertex >= 0.0)
            throw Error("build_contour: Gamma_A requires a negative vertex sector estimate");
        c.iota = sector.vertex;
        c.theta_iota = sector.semi_angle;
        // theta0 of the origin sector: measured on the spot
        c.theta = estimate_sector(op, std::max(64, 8 * op.dimension)).semi_angle;
        const double limit = kPi / (2.0 * alpha);
        if (c.theta_iota >= limit) {
            std::ostringstream msg;
            msg << "build_contour: far-field semi-angle " << c.theta_iota
                << " >= pi/(2 alpha) = " << limit;
            throw Error(msg.str());
        }
        c.eps = std::min(0.25 * (limit - c.theta_iota), 0.05);
    }

    // grow R_max until the estimated neglected tail is below tolerance
    const double phi_far = c.far_angle();
    const double decay = std::cos(alpha * phi_far);
    if (decay <= 0.0) throw Error("build_contour: rays do not decay for this alpha");
    double R = std::max(2.0 * moduli.back(), 2.0 * c.r);
    const Matrix& B = op.dense;
    const double bnorm = B.norm();
    for (int iter = 0; iter < 200; ++iter) {
        const double ray_g = bnorm * resolvent_norm(op, std::polar(R, phi_far));
        const double ray_tail = 2.0 * ray_g * std::exp(-t * std::pow(R, alpha) * decay) /
                                std::max(t * decay * alpha * std::pow(R, alpha - 1.0), 1e-300);
        double arc_g = 0.0;
        for (int j = 0; j <= 4; ++j) {
            const double ang = phi_far * (2.0 * j / 4.0 - 1.0);
            arc_g = std::max(arc_g, bnorm * resolvent_norm(op, std::polar(R, ang)) *
                                        std::exp(-t * std::pow(R, alpha) * std::cos(alpha * std::abs(ang))));
        }
        const double arc_tail = 2.0 * phi_far * R * arc_g;
        if (ray_tail + arc_tail < tolerance) {
            c.R_max = R;
            break;
        }
        R *= 1.5;
    }
    if (c.R_max == 0.0) throw Error("build_contour: could not satisfy the tail tolerance");
    return c;
}

QuadratureResult integrate_resolvent_functional(const OperatorSpec& op, const Vector& f, double t,
                                                double alpha, const ContourSpec& contour,
                                                double panel_tolerance) {
    if (t <= 0.0) throw Error("integrate_resolvent_functional: t must be positive");
    const int dim = op.dimension;
    auto integrand_at = [&](Complex lam, Complex dlam) -> Vector {
        Vector y = resolvent_apply(op, lam, f);
        return std::exp(-principal_pow(lam, alpha) * t) * dlam * (op.dense * y);
    };

    QuadratureResult out;
    out.value = Vector::Zero(dim);
    for (const auto& seg : contour.segments()) {
        AdaptiveResult res;
        if (seg.is_arc) {
            auto g = [&](double ang) {
                const Complex lam = std::polar(seg.radius, ang);
                const Complex dlam = Complex(0.0, 1.0) * lam;
                return integrand_at(lam, dlam);
            };
            res = integrate_adaptive(g, seg.a0, seg.a1, dim, panel_tolerance);
        } else {
            const Complex dz = seg.z1 - seg.z0;
            auto g = [&](double s) { return integrand_at(seg.z0 + s * dz, dz); };
            // geometric breakpoints: halve the panel where |lambda| doubles
            std::vector<double> breaks;
            const double m0 = std::min(std::abs(seg.z0), std::abs(seg.z1));
            const double m1 = std::max(std::abs(seg.z0), std::abs(seg.z1));
            for (double m = 2.0 * m0; m < m1; m *= 2.0) {
                const double s = (m - std::abs(seg.z0)) / (std::abs(seg.z1) - std::abs(seg.z0));
                if (s > 0.0 && s < 1.0) breaks.push_back(s);
            }
            res = integrate_adaptive(g, 0.0, 1.0, dim, panel_tolerance, breaks);
        }
        out.value += res.value;
        out.panel_error_estimate += res.error;
        out.panels_used += res.panels;
    }
    out.value /= Complex(0.0, 2.0 * kPi);
    out.panel_error_estimate /= 2.0 * kPi;

    // neglected tail beyond R_max (two rays + the closing outer arc)
    const double phi_far = contour.far_angle();
    const double decay = std::cos(alpha * phi_far);
    const double R = contour.R_max;
    const double g_end =
        (op.dense * resolvent_apply(op, std::polar(R, phi_far), f)).norm();
    double tail = 0.0;
    if (decay > 0.0)
        tail = 2.0 * g_end * std::exp(-t * std::pow(R, alpha) * decay) /
               std::max(t * decay * alpha * std::pow(R, alpha - 1.0), 1e-300);
    double arc_g = 0.0;
    for (int j = 0; j <= 4; ++j) {
        const double ang = phi_far * (2.0 * j / 4.0 - 1.0);
        const Complex lam = std::polar(R, ang);
        arc_g = std::max(arc_g, std::exp(-t * std::pow(R, alpha) * std::cos(alpha * std::abs(ang))) *
                                    (op.dense * resolvent_apply(op, lam, f)).norm());
    }
    out.truncation_bound = (tail + 2.0 * phi_far * R * arc_g) / (2.0 * kPi);
    return out;
}

Vector residue_at_pole(const OperatorSpec& op, const Vector& f, double t, double alpha,
                       Complex lambda_pole, double radius, double tolerance) {
    if (radius <= 0.0) throw Error("residue_at_pole: radius must be positive");
    Vector mus = operator_eigenvalues(op);
    const double scale = std::max(op.dense.norm(), 1e-300);
    for (int i = 0; i < mus.size(); ++i) {
        if (std::abs(mus[i]) < 1e-12 * scale) continue;
        const Complex lam_i = 1.0 / mus[i];
        const double d = std::abs(lam_i - lambda_pole);
        if (d > 1e-6 * std::abs(lambda_pole) && d < radius * (1.0 + 1e-9)) {
            std::ostringstream msg;
            msg << "residue_at_pole: foreign characteristic number (" << lam_i.real() << ","
                << lam_i.imag() << ") inside the circle";
            throw Error(msg.str());
        }
    }

    auto quadrature = [&](int M) {
        Vector acc = Vector::Zero(op.dimension);
        for (int j = 0; j < M; ++j) {
            const double th = 2.0 * kPi * (j + 0.5) / M;
            const Complex lam = lambda_pole + radius * std::polar(1.0, th);
            Vector y = op.dense * resolvent_apply(op, lam, f);
            acc += std::polar(radius / M, th) * (std::exp(-principal_pow(lam, alpha) * t) * y);
        }
        return acc;  // already the 1/(2 pi i) normalized trapezoid value
    };
    int M = 64;
    Vector prev = quadrature(M);
    for (; M <= 8192; M *= 2) {
        Vector next = quadrature(2 * M);
        if ((next - prev).norm() <= tolerance * std::max(1.0, next.norm())) return next;
        prev = next;
    }
    return prev;
}

BoundCheck verify_ray_bound(const OperatorSpec& op, const RayL6Params& p, int probes) {
    if (probes < 2) throw Error("verify_ray_bound: need at least two probes");
    const double phi = std::min(std::abs(p.psi - p.theta), std::abs(p.psi + p.theta));
    if (phi <= 0.0) throw Error("verify_ray_bound: ray lies in the sector");
    const double bound = 1.0 / std::sin(std::min(phi, kPi / 2.0));

    BoundCheck out;
    out.worst_bound = bound;
    for (int j = 0; j < probes; ++j) {
        const double s =
            p.s_min * std::pow(p.s_max / p.s_min, static_cast<double>(j) / (probes - 1));
        const Complex lam = std::polar(s, p.psi);
        const double nrm = resolvent_norm(op, lam);
        const double viol = nrm - bound;
        if (viol > out.max_violation) {
            out.max_violation = viol;
            out.witness = lam;
            out.worst_norm = nrm;
        }
    }
    out.max_violation = std::max(out.max_violation, 0.0);
    out.satisfied = out.max_violation <= 1e-12 * bound;
    return out;
}

BoundCheck verify_sector_bound(const OperatorSpec& op, const SectorL9Params& p, int probes) {
    if (p.iota >= 0.0) throw Error("verify_sector_bound: iota must be negative");
    if (p.eps <= 0.0) throw Error("verify_sector_bound: eps must be positive");
    const double phi0 = p.theta0 + p.eps;
    const double phi_i = p.theta_iota + p.eps;

    // crossing modulus of the two frontiers (as in Gamma_A)
    double s_cross = p.s_max;
    if (phi_i < phi0) {
        const double denom = std::sin(phi_i - phi0);
        if (denom < 0.0) s_cross = std::min(p.s_max, p.iota * std::sin(phi_i) / denom);
    }

    BoundCheck out;
    out.satisfied = true;
    auto probe = [&](Complex lam, double bound) {
        const double nrm = resolvent_norm(op, lam);
        const double viol = nrm - bound;
        if (viol > out.max_violation) {
            out.max_violation = viol;
            out.witness = lam;
            out.worst_norm = nrm;
            out.worst_bound = bound;
        }
    };
    const int half = probes / 2;
    for (int j = 0; j < half; ++j) {
        // origin-sector frontier piece: |arg| = phi0, 0 < |lambda| <= s_cross
        const double s = 1e-3 + (s_cross - 1e-3) * (j + 0.5) / half;
        probe(std::polar(s, phi0), 1.0 / std::sin(p.eps));
        probe(std::polar(s, -phi0), 1.0 / std::sin(p.eps));
        // shifted-sector frontier piece beyond the crossing
        const double u0 = s_cross * std::sin(phi0) / std::sin(phi_i);
        const double u_max =
            -p.iota * std::cos(phi_i) +
            std::sqrt(std::max(p.s_max * p.s_max - p.iota * p.iota * std::sin(phi_i) * std::sin(phi_i), 0.0));
        if (u_max > u0) {
            const double u = u0 + (u_max - u0) * (j + 0.5) / half;
            for (double sgn : {-1.0, 1.0}) {
                const Complex lam = p.iota + u * std::polar(1.0, sgn * phi_i);
                probe(lam, 1.0 + std::abs(lam) / (std::abs(lam - p.iota) * std::sin(p.eps)));
            }
        }
    }
    out.max_violation = std::max(out.max_violation, 0.0);
    out.satisfied = out.max_violation <= 1e-10 * std::max(1.0, out.worst_bound);
    return out;
}

}  // namespace lidskii
