#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bistatic/core_geometry.hpp"

using namespace bistatic;
using Catch::Approx;

namespace {

BeamSpec default_beams() {
    BeamSpec b;
    b.bw_t_az = deg_to_rad(2.0);
    b.bw_t_el = deg_to_rad(2.0);
    b.bw_r_az = deg_to_rad(2.0);
    b.bw_r_el = deg_to_rad(2.0);
    b.dpsi_az = deg_to_rad(1.0);
    b.dpsi_el = deg_to_rad(1.0);
    b.dt = 0.5e-6;
    b.tau_p = 10.0e-6;
    return b;
}

}  // namespace

TEST_CASE("spherical round trip recovers range and angles") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> range(0.1, 500.0);
    std::uniform_real_distribution<double> az(-pi() + 1e-6, pi() - 1e-6);
    std::uniform_real_distribution<double> el(-0.5 * pi() + 1e-3, 0.5 * pi() - 1e-3);
    for (int i = 0; i < 1000; ++i) {
        SphericalDirection s{range(rng), az(rng), el(rng)};
        const SphericalDirection back = cartesian_to_spherical(spherical_to_cartesian(s));
        REQUIRE(back.range == Approx(s.range).epsilon(1e-9));
        REQUIRE(back.azimuth == Approx(s.azimuth).margin(1e-9));
        REQUIRE(back.elevation == Approx(s.elevation).margin(1e-9));
    }
}

TEST_CASE("zenith direction has azimuth zero") {
    const SphericalDirection s = cartesian_to_spherical({0.0, 0.0, -5.0});
    REQUIRE(s.azimuth == 0.0);
    REQUIRE(s.range == 5.0);
    REQUIRE(s.elevation == Approx(0.5 * pi()).margin(1e-12));
}

TEST_CASE("axis conventions of spherical_to_cartesian") {
    const Vec3 north = spherical_to_cartesian({1.0, 0.0, 0.0});
    REQUIRE(north.x == 1.0);
    REQUIRE(north.y == 0.0);
    REQUIRE(north.z == 0.0);
    const Vec3 up = spherical_to_cartesian({2.0, 0.3, 0.5 * pi()});
    REQUIRE(up.x == Approx(0.0).margin(1e-12));
    REQUIRE(up.y == Approx(0.0).margin(1e-12));
    REQUIRE(up.z == Approx(-2.0).margin(1e-12));
}

TEST_CASE("rotate_about_z uses exact sign swaps") {
    const Vec3 v{1.5, -2.25, 0.5};
    const Vec3 q1 = rotate_about_z(v, 1);
    REQUIRE(q1.x == 2.25);
    REQUIRE(q1.y == 1.5);
    REQUIRE(q1.z == 0.5);
    const Vec3 q2 = rotate_about_z(v, 2);
    REQUIRE(q2.x == -1.5);
    REQUIRE(q2.y == 2.25);
    const Vec3 q3 = rotate_about_z(v, 3);
    REQUIRE(q3.x == -2.25);
    REQUIRE(q3.y == -1.5);
    const Vec3 q4 = rotate_about_z(v, 4);
    REQUIRE(q4.x == v.x);
    REQUIRE(q4.y == v.y);
    const Vec3 qm1 = rotate_about_z(v, -1);
    REQUIRE(qm1.x == q3.x);
    REQUIRE(qm1.y == q3.y);
}

TEST_CASE("to_uvw direction cosines") {
    const UvwPoint q = to_uvw({3.0, -4.0, 12.0});
    REQUIRE(q.u == 4.0 / 13.0);
    REQUIRE(q.v == -12.0 / 13.0);
    REQUIRE(q.w == 3.0 / 13.0);
    REQUIRE_THROWS_AS(to_uvw({0.0, 0.0, 0.0}), std::domain_error);
}

TEST_CASE("site placement is symmetric about the origin") {
    const BistaticGeometry geom{141.4213562373095};
    REQUIRE(geom.tx_position().x == -70.71067811865475);
    REQUIRE(geom.rx_position().x == +70.71067811865475);
    REQUIRE(geom.tx_position().y == 0.0);
    REQUIRE(geom.rx_position().z == 0.0);
}

TEST_CASE("pulse box corner radii") {
    const BeamSpec b = default_beams();
    const double t = 100.0e-6;
    REQUIRE(pulse_radius_trailing(b, t) == Approx(26.831424991).margin(1e-9));
    REQUIRE(pulse_radius_leading(b, t) == Approx(30.129142029).margin(1e-9));
    const double gap = pulse_radius_leading(b, t) - pulse_radius_trailing(b, t);
    REQUIRE(gap == Approx(3.297717038).margin(1e-9));
}

TEST_CASE("pulse box corner layout") {
    const BistaticGeometry geom{141.4213562373095};
    const BeamSpec b = default_beams();
    const double az = 0.3;
    const double el = 0.2;
    const double t = 100.0e-6;
    const PulseBox box = pulse_box(geom, b, az, el, t);

    const double half = deg_to_rad(2.0);  // bw/2 + pointing allowance
    const int az_signs[4] = {-1, +1, +1, -1};
    const int el_signs[4] = {-1, -1, +1, +1};
    for (int i = 0; i < 8; ++i) {
        const SphericalDirection s =
            cartesian_to_spherical(box.vertices[static_cast<std::size_t>(i)] - geom.tx_position());
        const double want_r = (i < 4) ? 26.831424991 : 30.129142029;
        REQUIRE(s.range == Approx(want_r).margin(1e-9));
        REQUIRE(s.azimuth == Approx(az + az_signs[i % 4] * half).margin(1e-12));
        REQUIRE(s.elevation == Approx(el + el_signs[i % 4] * half).margin(1e-12));
    }
}

TEST_CASE("pulse box requires the pulse to have left the transmitter") {
    const BistaticGeometry geom{141.4213562373095};
    const BeamSpec b = default_beams();
    REQUIRE_THROWS_AS(pulse_box(geom, b, 0.0, 0.0, 10.5e-6), std::domain_error);
    REQUIRE_THROWS_AS(pulse_box(geom, b, 0.0, 0.0, 0.0), std::domain_error);
    REQUIRE_NOTHROW(pulse_box(geom, b, 0.0, 0.0, 10.6e-6));
}

TEST_CASE("pulse centre conventions") {
    const BeamSpec b = default_beams();
    const double t = 100.0e-6;
    REQUIRE(pulse_center_radius(b, t, CenterConvention::kNominal) ==
            Approx(30.0541939145).margin(1e-9));
    REQUIRE(pulse_center_radius(b, t, CenterConvention::kMidpoint) ==
            Approx(28.48028351).margin(1e-9));

    const BistaticGeometry geom{141.4213562373095};
    const Vec3 c = pulse_center(geom, b, 0.0, 0.0, t);
    REQUIRE(c.x == Approx(-70.71067811865475 + 30.0541939145).margin(1e-9));
    REQUIRE(c.y == Approx(0.0).margin(1e-12));
    REQUIRE_THROWS_AS(pulse_center(geom, b, 0.0, 0.0, 2.0e-6, CenterConvention::kMidpoint),
                      std::domain_error);
}
