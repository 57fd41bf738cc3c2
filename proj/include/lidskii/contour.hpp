#pragma once

#include "lidskii/operator_core.hpp"
#include "lidskii/quadrature.hpp"

#include <vector>

namespace lidskii {

enum class ContourKind { gamma_B, Gamma_A };

/// One traversal piece; corner points are always segment boundaries.
struct ContourSegment {
    bool is_arc = false;
    // arc: center 0, radius, from angle a0 to a1 (counterclockwise when a1 > a0)
    double radius = 0.0, a0 = 0.0, a1 = 0.0;
    // line: z0 -> z1
    Complex z0, z1;
};

/// Integration path of Eq.-(11f) type (gamma_B) or the vertex-shifted
/// power-type intersection (Gamma_A). Traversal is fixed so that
/// (1/2 pi i) times the integral equals +sum of the enclosed group sums;
/// a counterclockwise small circle around a pole therefore returns the
/// negative of a group sum.
struct ContourSpec {
    ContourKind kind = ContourKind::gamma_B;
    double r = 0.0;            // inner arc radius
    double theta = 0.0;        // sector semi-angle (theta_0 for Gamma_A)
    double eps = 0.0;          // ray opening increment
    double iota = 0.0;         // Gamma_A vertex (< 0)
    double theta_iota = 0.0;   // Gamma_A far-field semi-angle
    double R_max = 0.0;        // truncation radius
    int orientation = +1;      // Theorem-2 sign convention
    int panels = 0;            // quadrature panels used on the last integration

    std::vector<ContourSegment> segments() const;
    /// Largest |arg lambda| attained far out on the rays.
    double far_angle() const;
};

struct QuadratureResult {
    Vector value;
    double panel_error_estimate = 0.0;
    int panels_used = 0;
    double truncation_bound = 0.0;
};

/// Chooses r below the smallest characteristic-number modulus, the ray opening
/// and R_max so that the estimated neglected tail of e^{-lambda^alpha t} beyond
/// R_max is below `tolerance`.
ContourSpec build_contour(ContourKind kind, const OperatorSpec& op, const SectorEstimate& sector,
                          double t, double alpha, double tolerance);

/// (1/2 pi i) \oint e^{-lambda^alpha t} B (I - lambda B)^{-1} f dlambda along the contour.
QuadratureResult integrate_resolvent_functional(const OperatorSpec& op, const Vector& f, double t,
                                                double alpha, const ContourSpec& contour,
                                                double panel_tolerance = 1e-11);

/// Residue of the same integrand on a counterclockwise circle around
/// lambda_pole; equals the negative of the Lemma-8 group sum.
Vector residue_at_pole(const OperatorSpec& op, const Vector& f, double t, double alpha,
                       Complex lambda_pole, double radius, double tolerance = 1e-11);

struct BoundCheck {
    double max_violation = 0.0;
    bool satisfied = false;
    Complex witness;      // worst probe point
    double worst_norm = 0.0;
    double worst_bound = 0.0;
};

struct RayL6Params {
    double psi = 0.0;    // ray angle, outside the sector and off the real axis
    double theta = 0.0;  // certified sector semi-angle of B
    double s_min = 1e-3, s_max = 1e3;
};

/// Lemma 6: ||(I - lambda B)^{-1}|| <= 1/sin(phi) on the ray arg = psi,
/// phi = min(|psi - theta|, |psi + theta|), slack 1e-12.
BoundCheck verify_ray_bound(const OperatorSpec& op, const RayL6Params& p, int probes);

struct SectorL9Params {
    double theta0 = 0.0;      // sector semi-angle of A at vertex 0
    double iota = 0.0;        // negative vertex (sector of A^{-1})
    double theta_iota = 0.0;  // semi-angle at iota
    double eps = 0.0;
    double s_max = 1e3;
};

/// Lemma 9: bounded resolvent on Fr{L_0(theta0+eps) cap L_iota(theta_iota+eps)};
/// the checked bound is 1/sin(eps) on the origin-sector frontier and
/// 1 + |lambda|/(|lambda - iota| sin eps) on the shifted-sector frontier.
BoundCheck verify_sector_bound(const OperatorSpec& op, const SectorL9Params& p, int probes);

}  // namespace lidskii
