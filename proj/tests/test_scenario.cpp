#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bistatic/scenario.hpp"

using namespace bistatic;
using Catch::Approx;

namespace {

ScenarioConfig tiny_config() {
    ScenarioConfig cfg;
    cfg.n_azi = 5;
    cfg.n_elev = 3;
    cfg.time_step_s = 20.0e-6;
    cfg.n_cassini = 16;
    cfg.n_azi_switching = 16;
    return cfg;
}

bool same_counters(const SweepCounters& a, const SweepCounters& b) {
    return a.total == b.total && a.excluded == b.excluded &&
           a.invalid_time == b.invalid_time && a.split_skipped == b.split_skipped &&
           a.split_summed == b.split_summed && a.relocation_failed == b.relocation_failed;
}

}  // namespace

TEST_CASE("centre exclusion rules fire in order") {
    const ScenarioConfig cfg;
    const BistaticGeometry geom = cfg.geometry();

    REQUIRE(exclude_point({0.0, 0.0, 0.0}, cfg, geom) == ExcludeReason::kEclipsing);
    REQUIRE(exclude_point({150.0, 0.0, 0.0}, cfg, geom) == ExcludeReason::kOutOfRange);
    // 90 km above the transmitter: clear of the blanking surface but inside
    // the single-site radius.
    REQUIRE(exclude_point({-70.71067811865475, 0.0, -90.0}, cfg, geom) ==
            ExcludeReason::kMonostatic);
    REQUIRE(exclude_point(geom.rx_position() + Vec3{0.1, 0.0, -50.0}, cfg, geom) ==
            ExcludeReason::kElevation);
    REQUIRE(exclude_point({100.0, 30.0, -10.0}, cfg, geom) == ExcludeReason::kNone);

    // Widening the blanking margin swallows points that default rules keep.
    const Vec3 near_rx{73.21, 0.0, 0.0};
    REQUIRE(exclude_point(near_rx, cfg, geom) == ExcludeReason::kNone);
    ScenarioConfig wide = cfg;
    wide.eclipse_margin_km = 10.0;
    REQUIRE(exclude_point(near_rx, wide, geom) == ExcludeReason::kEclipsing);
}

TEST_CASE("elevation as seen from a site") {
    REQUIRE(detail::elevation_from({0.0, 0.0, 0.0}, {0.0, 0.0, -10.0}) ==
            Approx(0.5 * pi()).margin(1e-12));
    REQUIRE(detail::elevation_from({0.0, 0.0, 0.0}, {10.0, 0.0, -10.0}) ==
            Approx(0.25 * pi()).margin(1e-12));
    REQUIRE(detail::elevation_from({5.0, 0.0, 0.0}, {15.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("uniform grids hit both endpoints exactly") {
    const auto az = detail::linspace(-pi(), pi(), 201);
    REQUIRE(az.front() == -pi());
    REQUIRE(az.back() == pi());
    REQUIRE(std::fabs(az[100]) < 1e-12);
    const auto el = detail::linspace(0.0, 0.5 * pi(), 50);
    REQUIRE(el.front() == 0.0);
    REQUIRE(el.back() == 0.5 * pi());
}

TEST_CASE("chase clock covers the full outward trip") {
    REQUIRE(detail::time_step_count(ScenarioConfig{}) == 1289);
}

TEST_CASE("resolution-cell cube corner layout") {
    const PulseBox b = detail::cube_box({10.0, 20.0, -5.0}, 0.4);
    REQUIRE(b.vertices[0].x == 9.8);
    REQUIRE(b.vertices[0].y == 19.8);
    REQUIRE(b.vertices[0].z == -4.8);  // elevation bit down means +z half
    REQUIRE(b.vertices[6].x == 10.2);
    REQUIRE(b.vertices[6].y == 20.2);
    REQUIRE(b.vertices[6].z == -5.2);
    REQUIRE(b.vertices[4].x == 10.2);
    REQUIRE(b.vertices[4].y == 19.8);
    REQUIRE(b.vertices[4].z == -4.8);
}

TEST_CASE("configuration validation") {
    ScenarioConfig cfg;
    REQUIRE_NOTHROW(validate(cfg));
    cfg.r_bi_km = 0.0;
    REQUIRE_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = ScenarioConfig{};
    cfg.n_azi = 1;
    REQUIRE_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = ScenarioConfig{};
    cfg.elevation_cutoff_deg = 0.0;
    REQUIRE_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = ScenarioConfig{};
    cfg.eclipse_margin_km = -1.0;
    REQUIRE_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = ScenarioConfig{};
    cfg.bw_r_az_deg = 180.0;
    REQUIRE_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = ScenarioConfig{};
    cfg.baseline_km = 300.0;  // detection surface would split in two
    REQUIRE_THROWS_AS(validate(cfg), std::domain_error);
}

TEST_CASE("full-volume chase smoke run") {
    const ScenarioConfig cfg = tiny_config();
    const SweepResult res = run_case1(cfg);
    REQUIRE(res.azimuth_deg.size() == 5);
    REQUIRE(res.max_beams.size() == 5);
    REQUIRE(res.global_max ==
            *std::max_element(res.max_beams.begin(), res.max_beams.end()));
    REQUIRE(res.excluded_fraction >= 0.0);
    REQUIRE(res.excluded_fraction <= 1.0);
    const std::uint64_t n_time = static_cast<std::uint64_t>(detail::time_step_count(cfg));
    REQUIRE(res.counters.total == 5ull * 3ull * n_time);
}

TEST_CASE("surface sweep smoke run") {
    const ScenarioConfig cfg = tiny_config();
    const SweepResult res = run_case2(cfg);
    REQUIRE(res.azimuth_deg.size() == 32);
    REQUIRE(res.azimuth_deg.front() == -180.0);
    REQUIRE(res.azimuth_deg.back() == 180.0);
    REQUIRE(res.counters.total == 16ull * 16ull);
    REQUIRE(res.global_max ==
            *std::max_element(res.max_beams.begin(), res.max_beams.end()));
}

TEST_CASE("results are identical for any worker count") {
    const ScenarioConfig cfg = tiny_config();

    const SweepResult a1 = run_case1(cfg, SweepMode::kPc, 1);
    const SweepResult a3 = run_case1(cfg, SweepMode::kPc, 3);
    const SweepResult a4 = run_case1(cfg, SweepMode::kPc, 4);
    REQUIRE(a1.max_beams == a3.max_beams);
    REQUIRE(a1.max_beams == a4.max_beams);
    REQUIRE(a1.azimuth_deg == a3.azimuth_deg);
    REQUIRE(same_counters(a1.counters, a3.counters));
    REQUIRE(same_counters(a1.counters, a4.counters));

    const SweepResult b1 = run_case2(cfg, 1);
    const SweepResult b3 = run_case2(cfg, 3);
    REQUIRE(b1.max_beams == b3.max_beams);
    REQUIRE(same_counters(b1.counters, b3.counters));

    const SwitchingResult s1 = switching_sweep(cfg, 1);
    const SwitchingResult s3 = switching_sweep(cfg, 3);
    REQUIRE(s1.max_rate == s3.max_rate);
    REQUIRE(s1.samples.size() == s3.samples.size());
    for (std::size_t i = 0; i < s1.samples.size(); ++i) {
        REQUIRE(s1.samples[i].azimuth_deg == s3.samples[i].azimuth_deg);
        REQUIRE(s1.samples[i].time_us == s3.samples[i].time_us);
        REQUIRE(s1.samples[i].rate == s3.samples[i].rate);
    }
}

TEST_CASE("covering the whole trajectory never takes fewer beams") {
    ScenarioConfig cfg;
    cfg.n_azi = 9;
    cfg.n_elev = 5;
    cfg.time_step_s = 5.0e-6;
    const SweepResult pc = run_case1(cfg, SweepMode::kPc);
    const SweepResult wpc = run_case1(cfg, SweepMode::kWpc);
    for (std::size_t i = 0; i < pc.max_beams.size(); ++i)
        REQUIRE(pc.max_beams[i] <= wpc.max_beams[i]);
}

TEST_CASE("switching sweep on the default grid") {
    const ScenarioConfig cfg;
    const SwitchingResult res = switching_sweep(cfg);
    REQUIRE(res.max_rate == Approx(3.439932003766655).epsilon(1e-9));
    REQUIRE(res.max_rate > 3.395 * 0.95);
    REQUIRE(res.max_rate < 3.395 * 1.05);
    REQUIRE(res.samples.size() ==
            res.counters.total - res.counters.excluded - res.counters.invalid_time);

    // All reported rates are magnitudes.
    for (const SwitchingSample& s : res.samples) REQUIRE(s.rate >= 0.0);
}

TEST_CASE("switching sweep needs two separated sites") {
    ScenarioConfig cfg;
    cfg.baseline_km = 0.0;
    REQUIRE_THROWS_AS(switching_sweep(cfg), std::domain_error);
}

TEST_CASE("switching grid density controls the peak seen") {
    // An odd grid has no row adjacent to the baseline axis, so the sampled
    // peak drops well below the even-grid one.
    ScenarioConfig cfg;
    cfg.n_azi_switching = 201;
    const SwitchingResult res = switching_sweep(cfg);
    REQUIRE(res.max_rate < 3.0);
    REQUIRE(res.max_rate > 0.0);
}
