#pragma once

// Detection and timing surfaces for the two-site layout: constant-SNR
// detection contours (ovals of Cassini revolved about the baseline), the
// blanking ellipsoid inside which reception overlaps transmission, and the
// pulse-rate bounds derived from both.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "core_geometry.hpp"

namespace bistatic {

// Below this baseline the layout is treated as single-site and the
// constant-SNR contour as a sphere; the general formulas divide by L.
inline constexpr double kMonostaticBaselineKm = 1e-9;

// Boltzmann constant, J/K (exact).
inline constexpr double kBoltzmann = 1.380649e-23;

// Surface of constant R_T * R_R (product of the ranges from the two sites),
// centred on the baseline midpoint. Connected only while L <= 2*sqrt(product).
struct CassiniSurface {
    double range_product = 0.0;  // km^2
    double baseline = 0.0;       // km
};

inline void validate(const CassiniSurface& surf) {
    if (!(surf.range_product > 0.0))
        throw std::domain_error("CassiniSurface: range_product must be positive");
    if (surf.baseline < 0.0)
        throw std::domain_error("CassiniSurface: baseline must be nonnegative");
    if (surf.baseline > 2.0 * std::sqrt(surf.range_product))
        throw std::domain_error("CassiniSurface: surface splits into two lobes");
}

// Shape factor C(theta) of the oval: the radial distance from the baseline
// midpoint at polar angle theta (measured from +x) is (L/2)*sqrt(C(theta)).
// Singular at L = 0; callers take the sphere branch below the threshold.
inline double cassini_c(double theta, const CassiniSurface& surf) {
    validate(surf);
    if (surf.baseline < kMonostaticBaselineKm)
        throw std::domain_error("cassini_c: singular at zero baseline, use the sphere branch");
    const double l2 = surf.baseline * surf.baseline;
    const double q = 16.0 * surf.range_product * surf.range_product / (l2 * l2);
    const double s = std::sin(2.0 * theta);
    const double under = q - s * s;
    // q >= 1 is guaranteed by the connectedness invariant, so under >= 0 up
    // to rounding; clamp the last ulp.
    return std::cos(2.0 * theta) + std::sqrt(under < 0.0 ? 0.0 : under);
}

// Distance from the baseline midpoint to the surface at polar angle theta.
inline double cassini_radial(double theta, const CassiniSurface& surf) {
    validate(surf);
    if (surf.baseline < kMonostaticBaselineKm)
        return std::sqrt(surf.range_product);
    return 0.5 * surf.baseline * std::sqrt(cassini_c(theta, surf));
}

// Point on the revolved surface. theta is the polar angle from +x, varpi the
// roll about the baseline; varpi in [0, pi) with theta in [0, 2pi) covers the
// surface once, and varpi in [0, pi/2) keeps z <= 0 (at or above ground).
inline Vec3 cassini_point(double theta, double varpi, const CassiniSurface& surf) {
    const double rho = cassini_radial(theta, surf);
    const double st = std::sin(theta);
    return {rho * std::cos(theta),
            rho * std::cos(varpi) * st,
            -rho * std::sin(varpi) * st};
}

// How far past the receiver (along +x) the detection contour reaches.
inline double delta_r_bi(const CassiniSurface& surf) {
    validate(surf);
    if (surf.baseline < kMonostaticBaselineKm)
        return std::sqrt(surf.range_product);
    return 0.5 * surf.baseline * (std::sqrt(cassini_c(0.0, surf)) - 1.0);
}

// Inputs of the range-independent factor of the detection budget.
struct RadarConstantParams {
    double power_tx = 0.0;      // W
    double gain_tx = 0.0;       // dimensionless
    double gain_rx = 0.0;       // dimensionless
    double wavelength = 0.0;    // m
    double rcs = 0.0;           // m^2, bistatic radar cross-section
    double pattern_tx = 1.0;    // dimensionless one-way propagation factor
    double pattern_rx = 1.0;    // dimensionless one-way propagation factor
    double temperature = 0.0;   // K, system noise temperature
    double bandwidth = 0.0;     // Hz, noise bandwidth
    double loss_tx = 1.0;       // dimensionless, >= 1
    double loss_rx = 1.0;       // dimensionless, >= 1
};

// k = P G_T G_R lambda^2 sigma F_T^2 F_R^2 / ((4 pi)^3 K T B L_T L_R).
// SNR at ranges (R_T, R_R) is then k / (R_T^2 R_R^2) in matching length units.
inline double radar_constant(const RadarConstantParams& p) {
    const double positives[] = {p.power_tx, p.gain_tx,      p.gain_rx,
                                p.wavelength, p.rcs,        p.pattern_tx,
                                p.pattern_rx, p.temperature, p.bandwidth};
    for (double v : positives)
        if (!(v > 0.0)) throw std::domain_error("radar_constant: parameters must be positive");
    if (p.loss_tx < 1.0 || p.loss_rx < 1.0)
        throw std::domain_error("radar_constant: losses must be at least unity");
    const double four_pi = 4.0 * pi();
    const double numer = p.power_tx * p.gain_tx * p.gain_rx * p.wavelength * p.wavelength *
                         p.rcs * p.pattern_tx * p.pattern_tx * p.pattern_rx * p.pattern_rx;
    const double denom = four_pi * four_pi * four_pi * kBoltzmann * p.temperature *
                         p.bandwidth * p.loss_tx * p.loss_rx;
    return numer / denom;
}

// Linear signal-to-noise ratio; k and the ranges must use the same length
// unit (k carries that unit to the fourth power).
inline double snr(double k, double r_t, double r_r) {
    if (!(r_t > 0.0) || !(r_r > 0.0))
        throw std::domain_error("snr: ranges must be positive");
    return k / (r_t * r_t * r_r * r_r);
}

// Surface of constant R_T + R_R with foci at the two sites (baseline
// midpoint at the origin).
struct ProlateEllipsoid {
    double focus_separation = 0.0;  // km
    double range_sum = 0.0;         // km, must exceed focus_separation

    double semi_major() const { return 0.5 * range_sum; }
    double semi_minor() const {
        const double a = semi_major();
        const double f = 0.5 * focus_separation;
        return std::sqrt(a * a - f * f);
    }
    // Closed-surface membership with an absolute tolerance in km.
    bool contains(const Vec3& p, double tol_km = 0.0) const {
        const Vec3 f1{-0.5 * focus_separation, 0.0, 0.0};
        const Vec3 f2{+0.5 * focus_separation, 0.0, 0.0};
        return norm(p - f1) + norm(p - f2) <= range_sum + tol_km;
    }
};

inline void validate(const ProlateEllipsoid& e) {
    if (!(e.range_sum > e.focus_separation) || e.focus_separation < 0.0)
        throw std::domain_error("ProlateEllipsoid: range_sum must exceed focus_separation");
}

// Region where an echo would arrive while the receiver is still blanked by
// the direct transmission: R_T + R_R <= L + c*tau_p (boundary included).
inline ProlateEllipsoid eclipse_ellipsoid(const BistaticGeometry& geom, double tau_p) {
    return {geom.baseline, geom.baseline + kSpeedOfLight * tau_p};
}

inline bool is_eclipsed(const Vec3& p, const BistaticGeometry& geom, double tau_p) {
    return eclipse_ellipsoid(geom, tau_p).contains(p);
}

// Highest pulse rate for which the next pulse's leading edge cannot reach
// the receiver before the farthest detectable echo of the previous pulse.
inline double prf_bi_max(const CassiniSurface& surf, double tau_p) {
    validate(surf);
    const double l = surf.baseline;
    const double reach = std::sqrt(l * l + 4.0 * surf.range_product);
    return kSpeedOfLight / (reach - l + kSpeedOfLight * tau_p);
}

// Single-site counterpart for a maximum detection range r_max.
inline double prf_mono_max(double r_max, double tau_p) {
    if (!(r_max > 0.0))
        throw std::domain_error("prf_mono_max: r_max must be positive");
    return kSpeedOfLight / (2.0 * r_max + kSpeedOfLight * tau_p);
}

struct PrfEllipses {
    ProlateEllipsoid leading;   // range sum L + c/prf
    ProlateEllipsoid trailing;  // range sum L + c*(1/prf - tau_p)
};

// Unambiguous-range surfaces at a given pulse rate: echoes from between the
// two ellipsoids arrive inside the current inter-pulse listening window.
inline PrfEllipses prf_ellipses(double prf, const BistaticGeometry& geom, double tau_p) {
    if (!(prf > 0.0))
        throw std::domain_error("prf_ellipses: prf must be positive");
    const double period = 1.0 / prf;
    if (period <= tau_p)
        throw std::domain_error("prf_ellipses: pulse longer than the pulse interval");
    const double l = geom.baseline;
    return {{l, l + kSpeedOfLight * period},
            {l, l + kSpeedOfLight * (period - tau_p)}};
}

// True when every sampled point of the detection contour lies inside the
// trailing unambiguous-range ellipsoid, i.e. the whole detectable region is
// free of second-time-around ambiguity at this pulse rate. The range sum is
// invariant under roll about the baseline, so it is evaluated once per polar
// angle and reused across the samples^2 grid.
inline bool containment_check(double prf, const CassiniSurface& surf, double tau_p,
                              int samples = 200) {
    validate(surf);
    if (samples < 1)
        throw std::domain_error("containment_check: samples must be positive");
    const double limit =
        prf_ellipses(prf, BistaticGeometry{surf.baseline}, tau_p).trailing.range_sum;
    const double tol = 1e-6;  // km, admits boundary-touching rates
    const double half_l = 0.5 * surf.baseline;
    for (int i = 0; i < samples; ++i) {
        const double theta = 2.0 * pi() * i / samples;
        const double rho = cassini_radial(theta, surf);
        const double x = rho * std::cos(theta);
        const double yz2 = rho * rho - x * x;
        const double r_t = std::sqrt((x + half_l) * (x + half_l) + yz2);
        const double r_r = std::sqrt((x - half_l) * (x - half_l) + yz2);
        if (r_t + r_r > limit + tol) return false;
    }
    return true;
}

}  // namespace bistatic
