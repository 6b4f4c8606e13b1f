#pragma once

// Primitive geometry for a two-site transmit/receive radar layout.
//
// Frame conventions used throughout the library:
//   - Right-handed north-east-down axes: +x north, +y east, +z down.
//   - The transmitter sits at [-L/2, 0, 0], the receiver at [+L/2, 0, 0].
//   - Angles are radians unless a name says otherwise, distances are
//     kilometres, times are seconds.
//   - Elevation is positive above the horizontal plane, so an elevated
//     point has negative z.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace bistatic {

// Propagation speed in km/s (exact).
inline constexpr double kSpeedOfLight = 299792.458;

constexpr double pi() { return 3.141592653589793238462643383279502884; }

constexpr double deg_to_rad(double deg) { return deg * (pi() / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / pi()); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline Vec3 operator*(const Vec3& v, double s) { return s * v; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double squared_norm(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(squared_norm(v)); }

// Range/azimuth/elevation triple relative to some site.
struct SphericalDirection {
    double range = 0.0;      // km, >= 0
    double azimuth = 0.0;    // rad, in (-pi, pi], measured from +x toward +y
    double elevation = 0.0;  // rad, in [-pi/2, pi/2], positive above horizon
};

// P = r * [cos(az) cos(el), sin(az) cos(el), -sin(el)].
inline Vec3 spherical_to_cartesian(const SphericalDirection& s) {
    const double ce = std::cos(s.elevation);
    return {s.range * std::cos(s.azimuth) * ce,
            s.range * std::sin(s.azimuth) * ce,
            -s.range * std::sin(s.elevation)};
}

// Inverse of spherical_to_cartesian. At the zenith/nadir (x = y = 0) the
// azimuth is conventionally 0, which atan2(0, 0) already yields.
inline SphericalDirection cartesian_to_spherical(const Vec3& p) {
    SphericalDirection s;
    s.range = norm(p);
    s.azimuth = std::atan2(p.y, p.x);
    const double rho = std::hypot(p.x, p.y);
    s.elevation = std::atan2(-p.z, rho);
    return s;
}

// Rotate about +z by quarter_turns * 90 degrees (counterclockwise seen from
// -z, i.e. x -> y). Exact sign swaps, no trigonometry.
inline Vec3 rotate_about_z(const Vec3& p, int quarter_turns) {
    int q = quarter_turns % 4;
    if (q < 0) q += 4;
    switch (q) {
        case 1: return {-p.y, p.x, p.z};
        case 2: return {-p.x, -p.y, p.z};
        case 3: return {p.y, -p.x, p.z};
        default: return p;
    }
}

// Direction cosines of a point as seen from a planar array whose boresight
// looks along +x: u spans the array's horizontal axis, v its vertical axis,
// w is positive in front of the face.
struct UvwPoint {
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;
};

// p is the target position in the array's body frame (array at the origin).
inline UvwPoint to_uvw(const Vec3& p) {
    const double r = norm(p);
    if (r <= 0.0)
        throw std::domain_error("to_uvw: zero-length vector has no direction");
    return {-p.y / r, -p.z / r, p.x / r};
}

// Transmitter/receiver placement, fully determined by the baseline length.
struct BistaticGeometry {
    double baseline = 0.0;  // km, >= 0

    Vec3 tx_position() const { return {-0.5 * baseline, 0.0, 0.0}; }
    Vec3 rx_position() const { return {+0.5 * baseline, 0.0, 0.0}; }
};

// Transmit/receive beam widths and pulse timing.
struct BeamSpec {
    double bw_t_az = 0.0;   // rad, transmit beamwidth, azimuth
    double bw_t_el = 0.0;   // rad, transmit beamwidth, elevation
    double bw_r_az = 0.0;   // rad, receive beamwidth, azimuth
    double bw_r_el = 0.0;   // rad, receive beamwidth, elevation
    double dpsi_az = 0.0;   // rad, pointing-error allowance, azimuth
    double dpsi_el = 0.0;   // rad, pointing-error allowance, elevation
    double dt = 0.0;        // s, timing-error allowance
    double tau_p = 0.0;     // s, pulse length
};

// Eight corners of the volume that can contain the pulse at one instant.
// Vertices 0..3 form the trailing face (smaller radius from the
// transmitter), 4..7 the leading face; corner k and corner k+4 share the
// same angular offsets. Per face the azimuth/elevation offset signs run
// (-,-), (+,-), (+,+), (-,+).
struct PulseBox {
    std::array<Vec3, 8> vertices{};
};

namespace detail {

// Angular offset signs for corner index i in 0..7 (same cycle on both faces).
inline int az_sign(int i) { return (i % 4 == 1 || i % 4 == 2) ? +1 : -1; }
inline int el_sign(int i) { return (i % 4 >= 2) ? +1 : -1; }

}  // namespace detail

// Corner radii of the pulse volume at emission-referenced time t: the
// trailing face sits at c*(t - tau_p - dt), the leading face at c*(t + dt).
inline double pulse_radius_trailing(const BeamSpec& b, double t) {
    return kSpeedOfLight * (t - b.tau_p - b.dt);
}
inline double pulse_radius_leading(const BeamSpec& b, double t) {
    return kSpeedOfLight * (t + b.dt);
}

// Pulse-box corners for a transmit beam pointed at (azimuth, elevation),
// t seconds after the pulse left the transmitter. Requires the trailing
// radius to be positive, i.e. t > tau_p + dt.
inline PulseBox pulse_box(const BistaticGeometry& geom, const BeamSpec& beams,
                          double azimuth, double elevation, double t) {
    const double r_trail = pulse_radius_trailing(beams, t);
    if (r_trail <= 0.0)
        throw std::domain_error("pulse_box: pulse has not fully left the transmitter");
    const double r_lead = pulse_radius_leading(beams, t);
    const double half_az = 0.5 * beams.bw_t_az + beams.dpsi_az;
    const double half_el = 0.5 * beams.bw_t_el + beams.dpsi_el;

    PulseBox box;
    const Vec3 tx = geom.tx_position();
    for (int i = 0; i < 8; ++i) {
        SphericalDirection s;
        s.range = (i < 4) ? r_trail : r_lead;
        s.azimuth = azimuth + detail::az_sign(i) * half_az;
        s.elevation = elevation + detail::el_sign(i) * half_el;
        box.vertices[static_cast<std::size_t>(i)] = tx + spherical_to_cartesian(s);
    }
    return box;
}

// Where to place the single point that stands in for the whole pulse.
//   kNominal:  r = c * (t + dt/2), just behind the leading face.
//   kMidpoint: r = c * (t - tau_p/2), the radial middle of the pulse.
enum class CenterConvention { kNominal, kMidpoint };

inline double pulse_center_radius(const BeamSpec& b, double t,
                                  CenterConvention conv = CenterConvention::kNominal) {
    const double t_eff = (conv == CenterConvention::kNominal) ? t + 0.5 * b.dt
                                                              : t - 0.5 * b.tau_p;
    return kSpeedOfLight * t_eff;
}

inline Vec3 pulse_center(const BistaticGeometry& geom, const BeamSpec& beams,
                         double azimuth, double elevation, double t,
                         CenterConvention conv = CenterConvention::kNominal) {
    SphericalDirection s;
    s.range = pulse_center_radius(beams, t, conv);
    if (s.range < 0.0)
        throw std::domain_error("pulse_center: negative range");
    s.azimuth = azimuth;
    s.elevation = elevation;
    return geom.tx_position() + spherical_to_cartesian(s);
}

}  // namespace bistatic
