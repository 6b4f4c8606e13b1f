#pragma once

// Simulation drivers: sweep the transmit pointing grid (or the detection
// surface itself), apply the exclusion rules, and aggregate receive-beam
// counts per transmitter azimuth.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "core_geometry.hpp"
#include "parallel.hpp"
#include "pulse_chasing.hpp"
#include "surfaces.hpp"

namespace bistatic {

enum class SweepMode { kPc, kWpc };

// What to do with pulses no single array face can hold: drop the grid point
// (they sit exactly in the wrap-around blind spot of a face-tracking
// receiver) or keep the per-face summed count.
enum class SplitPolicy { kSkip, kSum };

struct ScenarioConfig {
    double r_bi_km = 100.0;                  // detection range scale, sqrt(R_T*R_R)
    double baseline_km = 141.4213562373095;  // transmitter-receiver separation
    double tau_p_s = 10.0e-6;                // pulse length
    double bw_t_az_deg = 2.0;                // transmit beamwidth, azimuth
    double bw_t_el_deg = 2.0;                // transmit beamwidth, elevation
    double bw_r_az_deg = 2.0;                // receive beamwidth, azimuth
    double bw_r_el_deg = 2.0;                // receive beamwidth, elevation
    double dpsi_az_deg = 1.0;                // pointing allowance, azimuth
    double dpsi_el_deg = 1.0;                // pointing allowance, elevation
    double dt_s = 0.5e-6;                    // timing allowance
    int n_azi = 201;                         // transmit azimuth grid points
    int n_elev = 50;                         // transmit elevation grid points
    double time_step_s = 0.5e-6;             // chase time step
    double elevation_cutoff_deg = 70.0;      // receiver-side elevation limit
    double eclipse_margin_km = 0.0;          // widened blanking exclusion (see below)
    double r_mono_exclusion_km = 100.0;      // single-site coverage radius around tx
    double case3_cube_edge_km = 0.4;         // resolution-cell cube edge
    int n_cassini = 200;                     // detection-surface grid points per angle
    int n_azi_switching = 200;               // azimuth grid of the switching-rate sweep
    CenterConvention center_convention = CenterConvention::kNominal;
    SplitPolicy split_policy = SplitPolicy::kSkip;

    BistaticGeometry geometry() const { return {baseline_km}; }
    CassiniSurface surface() const { return {r_bi_km * r_bi_km, baseline_km}; }
    BeamSpec beams() const {
        BeamSpec b;
        b.bw_t_az = deg_to_rad(bw_t_az_deg);
        b.bw_t_el = deg_to_rad(bw_t_el_deg);
        b.bw_r_az = deg_to_rad(bw_r_az_deg);
        b.bw_r_el = deg_to_rad(bw_r_el_deg);
        b.dpsi_az = deg_to_rad(dpsi_az_deg);
        b.dpsi_el = deg_to_rad(dpsi_el_deg);
        b.dt = dt_s;
        b.tau_p = tau_p_s;
        return b;
    }
};

// Field errors throw invalid_argument; an impossible transmitter-receiver
// separation (detection surface splits) throws domain_error.
inline void validate(const ScenarioConfig& cfg) {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(cfg.r_bi_km, "r_bi_km");
    if (cfg.baseline_km < 0.0) throw std::invalid_argument("baseline_km must be nonnegative");
    positive(cfg.tau_p_s, "tau_p_s");
    positive(cfg.bw_t_az_deg, "bw_t_az_deg");
    positive(cfg.bw_t_el_deg, "bw_t_el_deg");
    positive(cfg.bw_r_az_deg, "bw_r_az_deg");
    positive(cfg.bw_r_el_deg, "bw_r_el_deg");
    if (cfg.bw_r_az_deg >= 180.0 || cfg.bw_r_el_deg >= 180.0)
        throw std::invalid_argument("receive beamwidths must be below 180 degrees");
    if (cfg.dpsi_az_deg < 0.0 || cfg.dpsi_el_deg < 0.0)
        throw std::invalid_argument("pointing allowances must be nonnegative");
    if (cfg.dt_s < 0.0) throw std::invalid_argument("dt_s must be nonnegative");
    if (cfg.n_azi < 2) throw std::invalid_argument("n_azi must be at least 2");
    if (cfg.n_elev < 2) throw std::invalid_argument("n_elev must be at least 2");
    if (cfg.n_cassini < 2) throw std::invalid_argument("n_cassini must be at least 2");
    if (cfg.n_azi_switching < 2) throw std::invalid_argument("n_azi_switching must be at least 2");
    positive(cfg.time_step_s, "time_step_s");
    if (cfg.elevation_cutoff_deg <= 0.0 || cfg.elevation_cutoff_deg > 90.0)
        throw std::invalid_argument("elevation_cutoff_deg must be in (0, 90]");
    if (cfg.eclipse_margin_km < 0.0)
        throw std::invalid_argument("eclipse_margin_km must be nonnegative");
    positive(cfg.r_mono_exclusion_km, "r_mono_exclusion_km");
    positive(cfg.case3_cube_edge_km, "case3_cube_edge_km");
    validate(cfg.surface());  // throws domain_error when the surface splits
}

enum class ExcludeReason { kNone, kEclipsing, kMonostatic, kOutOfRange, kElevation };

namespace detail {

inline double elevation_from(const Vec3& site, const Vec3& p) {
    const Vec3 d = p - site;
    return std::atan2(-d.z, std::hypot(d.x, d.y));
}

}  // namespace detail

// Centre-level exclusion rules, checked in a fixed order:
//   1. blanked: R_T + R_R within L + max(c*tau_p, eclipse_margin_km);
//   2. single-site regime: closer than r_mono_exclusion_km to the transmitter;
//   3. beyond the detection surface: R_T * R_R above the constant product
//      (with a hair of slack so points on the surface itself stay in);
//   4. above the receiver-side elevation cutoff.
// Drivers additionally reject pulses whose corners cross rules 4 (and move
// corners violating rule 1 via relocation) before counting.
inline ExcludeReason exclude_point(const Vec3& center, const ScenarioConfig& cfg,
                                   const BistaticGeometry& geom) {
    const double r_t = norm(center - geom.tx_position());
    const double r_r = norm(center - geom.rx_position());
    const double blank = geom.baseline +
                         std::max(kSpeedOfLight * cfg.tau_p_s, cfg.eclipse_margin_km);
    if (r_t + r_r <= blank) return ExcludeReason::kEclipsing;
    if (r_t < cfg.r_mono_exclusion_km) return ExcludeReason::kMonostatic;
    const double product_limit = cfg.r_bi_km * cfg.r_bi_km * (1.0 + 1e-9);
    if (r_t * r_r > product_limit) return ExcludeReason::kOutOfRange;
    if (detail::elevation_from(geom.rx_position(), center) >
        deg_to_rad(cfg.elevation_cutoff_deg))
        return ExcludeReason::kElevation;
    return ExcludeReason::kNone;
}

struct SweepCounters {
    std::uint64_t total = 0;              // grid points visited
    std::uint64_t excluded = 0;           // failed an exclusion rule
    std::uint64_t invalid_time = 0;       // pulse not yet fully clear of the transmitter
    std::uint64_t split_skipped = 0;      // wrap-around pulses dropped by policy
    std::uint64_t split_summed = 0;       // wrap-around pulses counted per face
    std::uint64_t relocation_failed = 0;  // blanking pattern outside the handled cases

    SweepCounters& operator+=(const SweepCounters& o) {
        total += o.total;
        excluded += o.excluded;
        invalid_time += o.invalid_time;
        split_skipped += o.split_skipped;
        split_summed += o.split_summed;
        relocation_failed += o.relocation_failed;
        return *this;
    }
};

struct SweepResult {
    std::vector<double> azimuth_deg;
    std::vector<int> max_beams;  // per azimuth, maximised over elevation and time
    int global_max = 0;
    double excluded_fraction = 0.0;
    SweepCounters counters;
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            (i == n - 1) ? b : a + i * ((b - a) / (n - 1));
    return out;
}

inline int time_step_count(const ScenarioConfig& cfg) {
    const CassiniSurface surf = cfg.surface();
    const double t_max = (cfg.baseline_km + delta_r_bi(surf)) / kSpeedOfLight;
    return static_cast<int>(std::floor(t_max / cfg.time_step_s + 1e-9)) + 1;
}

inline bool box_above_cutoff(const PulseBox& box, const Vec3& rx, double cutoff_rad) {
    for (const Vec3& v : box.vertices)
        if (elevation_from(rx, v) > cutoff_rad) return true;
    return false;
}

// Axis-aligned cube with the same corner labelling as a pulse box: bit 0/1
// of the corner index maps to the -x/+x, -y/+y, +z/-z half (elevation bit
// up means negative z).
inline PulseBox cube_box(const Vec3& center, double edge) {
    const double h = 0.5 * edge;
    PulseBox b;
    for (int i = 0; i < 8; ++i) {
        b.vertices[static_cast<std::size_t>(i)] = {
            center.x + (radial_bit(i) ? h : -h),
            center.y + (azimuth_bit(i) ? h : -h),
            center.z - (elevation_bit(i) ? h : -h)};
    }
    return b;
}

inline std::uint64_t cell_key(int iu, int iv) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(iu)) << 32) |
           static_cast<std::uint32_t>(iv);
}

// Shared per-grid-point pipeline for the chase sweeps. Returns the counted
// beams, or nothing when the point was skipped (counters say why).
struct ChaseEvaluator {
    const ScenarioConfig& cfg;
    BistaticGeometry geom;
    BeamSpec beams;
    Vec3 rx;
    double cutoff_rad;
    bool cube;  // pulse volume stands in for a resolution cell

    std::optional<PulseBox> prepared_box(double az, double el, double t,
                                         SweepCounters& c) const {
        const double radius = pulse_center_radius(beams, t, cfg.center_convention);
        if (pulse_radius_trailing(beams, t) <= 0.0 || radius <= 0.0) {
            ++c.invalid_time;
            return std::nullopt;
        }
        const Vec3 center =
            geom.tx_position() + spherical_to_cartesian({radius, az, el});
        if (exclude_point(center, cfg, geom) != ExcludeReason::kNone) {
            ++c.excluded;
            return std::nullopt;
        }
        PulseBox box = cube ? cube_box(center, cfg.case3_cube_edge_km)
                            : pulse_box(geom, beams, az, el, t);
        if (box_above_cutoff(box, rx, cutoff_rad)) {
            ++c.excluded;
            return std::nullopt;
        }
        try {
            box = relocate_vertices(box, geom, cfg.tau_p_s, center).new_box;
        } catch (const std::domain_error&) {
            ++c.relocation_failed;
            return std::nullopt;
        }
        return box;
    }

    std::optional<std::size_t> count(double az, double el, double t,
                                     SweepCounters& c) const {
        const std::optional<PulseBox> box = prepared_box(az, el, t, c);
        if (!box) return std::nullopt;
        BeamCount bc;
        try {
            bc = count_active_beams(*box, geom, beams);
        } catch (const std::domain_error&) {
            ++c.relocation_failed;
            return std::nullopt;
        }
        if (bc.split) {
            if (cfg.split_policy == SplitPolicy::kSkip) {
                ++c.split_skipped;
                return std::nullopt;
            }
            ++c.split_summed;
        }
        return bc.count;
    }
};

// Union-of-cells accumulator for one (azimuth, elevation) ray: projections
// from all time steps are quantised on one grid per face, anchored at the
// global minimum over the ray.
struct RayUnion {
    struct FaceData {
        std::vector<std::array<Uv, 8>> fixed;  // whole pulse on this face
        std::vector<std::vector<Uv>> partial;  // split-pulse corner subsets
        double umin = std::numeric_limits<double>::infinity();
        double vmin = std::numeric_limits<double>::infinity();
        void track(const Uv* pts, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) {
                umin = std::min(umin, pts[i].u);
                vmin = std::min(vmin, pts[i].v);
            }
        }
    };
    std::array<FaceData, 4> faces;

    std::size_t count(double du, double dv) const {
        std::size_t total = 0;
        std::unordered_set<std::uint64_t> cells;
        for (const FaceData& f : faces) {
            if (f.fixed.empty() && f.partial.empty()) continue;
            cells.clear();
            const auto insert = [&cells](int iu, int iv) { cells.insert(cell_key(iu, iv)); };
            for (const auto& pts : f.fixed)
                for_each_active_cell(pts.data(), pts.size(), du, dv, f.umin, f.vmin, insert);
            for (const auto& pts : f.partial)
                for_each_active_cell(pts.data(), pts.size(), du, dv, f.umin, f.vmin, insert);
            total += cells.size();
        }
        return total;
    }
};

}  // namespace detail

namespace detail {

inline SweepResult run_chase_sweep(const ScenarioConfig& cfg, SweepMode mode, bool cube,
                                   int workers) {
    validate(cfg);
    const ChaseEvaluator eval{cfg,
                              cfg.geometry(),
                              cfg.beams(),
                              cfg.geometry().rx_position(),
                              deg_to_rad(cfg.elevation_cutoff_deg),
                              cube};
    const std::vector<double> az = linspace(-pi(), pi(), cfg.n_azi);
    const std::vector<double> el = linspace(0.0, 0.5 * pi(), cfg.n_elev);
    const int n_time = time_step_count(cfg);

    SweepResult res;
    res.azimuth_deg.resize(az.size());
    res.max_beams.assign(az.size(), 0);
    std::vector<SweepCounters> counters(az.size());

    parallel_for(
        az.size(),
        [&](std::size_t ia) {
            SweepCounters& c = counters[ia];
            int best = 0;
            for (double elevation : el) {
                if (mode == SweepMode::kPc) {
                    for (int it = 0; it < n_time; ++it) {
                        ++c.total;
                        const auto n =
                            eval.count(az[ia], elevation, it * cfg.time_step_s, c);
                        if (n) best = std::max(best, static_cast<int>(*n));
                    }
                } else {
                    RayUnion ray;
                    for (int it = 0; it < n_time; ++it) {
                        ++c.total;
                        const auto box =
                            eval.prepared_box(az[ia], elevation, it * cfg.time_step_s, c);
                        if (!box) continue;
                        try {
                            const PanelProjection proj = project_to_panel(*box, eval.geom);
                            auto& face = ray.faces[static_cast<std::size_t>(proj.panel)];
                            face.track(proj.uv.data(), proj.uv.size());
                            face.fixed.push_back(proj.uv);
                        } catch (const split_coverage_error&) {
                            if (cfg.split_policy == SplitPolicy::kSkip) {
                                ++c.split_skipped;
                                continue;
                            }
                            ++c.split_summed;
                            const auto subsets = project_panel_subsets(*box, eval.geom);
                            for (int p = 0; p < 4; ++p) {
                                const auto& pts = subsets[static_cast<std::size_t>(p)];
                                if (pts.empty()) continue;
                                auto& face = ray.faces[static_cast<std::size_t>(p)];
                                face.track(pts.data(), pts.size());
                                face.partial.push_back(pts);
                            }
                        } catch (const std::domain_error&) {
                            ++c.relocation_failed;
                        }
                    }
                    best = std::max(
                        best, static_cast<int>(ray.count(std::sin(eval.beams.bw_r_az),
                                                         std::sin(eval.beams.bw_r_el))));
                }
            }
            res.max_beams[ia] = best;
            res.azimuth_deg[ia] = rad_to_deg(az[ia]);
        },
        workers);

    for (const SweepCounters& c : counters) res.counters += c;
    res.global_max = *std::max_element(res.max_beams.begin(), res.max_beams.end());
    res.excluded_fraction =
        res.counters.total ? static_cast<double>(res.counters.excluded) /
                                 static_cast<double>(res.counters.total)
                           : 0.0;
    return res;
}

}  // namespace detail

// Chase of the transmitted pulse through the whole detection volume on the
// (azimuth, elevation, time) grid. kPc counts the instantaneous pulse
// volume; kWpc counts the union of cells the pulse touches over a whole
// transmission, per ray, before maximising.
inline SweepResult run_case1(const ScenarioConfig& cfg, SweepMode mode = SweepMode::kPc,
                             int workers = -1) {
    return detail::run_chase_sweep(cfg, mode, /*cube=*/false, workers);
}

// Same sweep with a fixed-size resolution-cell cube standing in for the
// pulse volume.
inline SweepResult run_case3(const ScenarioConfig& cfg, SweepMode mode = SweepMode::kPc,
                             int workers = -1) {
    return detail::run_chase_sweep(cfg, mode, /*cube=*/true, workers);
}

// Pulse placed on the detection surface itself: every surface grid point is
// chased at the moment the pulse reaches it, and counts are aggregated into
// uniform transmitter-azimuth bins (2*n_cassini bins over the full circle).
inline SweepResult run_case2(const ScenarioConfig& cfg, int workers = -1) {
    validate(cfg);
    const detail::ChaseEvaluator eval{cfg,
                              cfg.geometry(),
                              cfg.beams(),
                              cfg.geometry().rx_position(),
                              deg_to_rad(cfg.elevation_cutoff_deg),
                              /*cube=*/false};
    const CassiniSurface surf = cfg.surface();
    const std::vector<double> theta = detail::linspace(0.0, pi(), cfg.n_cassini);
    const std::vector<double> varpi = detail::linspace(0.0, pi(), cfg.n_cassini);
    const int n_bins = 2 * cfg.n_cassini;
    const double bin_step = 360.0 / (n_bins - 1);

    SweepResult res;
    res.azimuth_deg = detail::linspace(-180.0, 180.0, n_bins);
    res.max_beams.assign(static_cast<std::size_t>(n_bins), 0);
    std::vector<std::vector<int>> bins(theta.size(),
                                       std::vector<int>(static_cast<std::size_t>(n_bins), 0));
    std::vector<SweepCounters> counters(theta.size());

    parallel_for(
        theta.size(),
        [&](std::size_t ith) {
            SweepCounters& c = counters[ith];
            std::vector<int>& local = bins[ith];
            for (double roll : varpi) {
                ++c.total;
                const Vec3 p = cassini_point(theta[ith], roll, surf);
                const SphericalDirection from_tx =
                    cartesian_to_spherical(p - eval.geom.tx_position());
                // Invert the centre-radius convention for the arrival time.
                const double t = (cfg.center_convention == CenterConvention::kNominal)
                                     ? from_tx.range / kSpeedOfLight - 0.5 * cfg.dt_s
                                     : from_tx.range / kSpeedOfLight + 0.5 * cfg.tau_p_s;
                const auto n = eval.count(from_tx.azimuth, from_tx.elevation, t, c);
                if (!n) continue;
                const double az_deg = rad_to_deg(from_tx.azimuth);
                const int bin = std::clamp(
                    static_cast<int>(std::lround((az_deg + 180.0) / bin_step)), 0, n_bins - 1);
                local[static_cast<std::size_t>(bin)] =
                    std::max(local[static_cast<std::size_t>(bin)], static_cast<int>(*n));
            }
        },
        workers);

    for (std::size_t ith = 0; ith < theta.size(); ++ith) {
        res.counters += counters[ith];
        for (int b = 0; b < n_bins; ++b)
            res.max_beams[static_cast<std::size_t>(b)] =
                std::max(res.max_beams[static_cast<std::size_t>(b)],
                         bins[ith][static_cast<std::size_t>(b)]);
    }
    res.global_max = *std::max_element(res.max_beams.begin(), res.max_beams.end());
    res.excluded_fraction =
        res.counters.total ? static_cast<double>(res.counters.excluded) /
                                 static_cast<double>(res.counters.total)
                           : 0.0;
    return res;
}

struct SwitchingSample {
    double azimuth_deg = 0.0;
    double time_us = 0.0;
    double rate = 0.0;  // |beams per microsecond|
};

struct SwitchingResult {
    std::vector<SwitchingSample> samples;  // azimuth-major, excluded points dropped
    double max_rate = 0.0;
    SweepCounters counters;
};

// Beam switching rate over the horizontal-plane (azimuth, time) grid, with
// the same centre exclusions as the chase sweeps.
inline SwitchingResult switching_sweep(const ScenarioConfig& cfg, int workers = -1) {
    validate(cfg);
    if (cfg.baseline_km < kMonostaticBaselineKm)
        throw std::domain_error("switching_sweep: needs a nonzero transmitter-receiver separation");
    const BistaticGeometry geom = cfg.geometry();
    const BeamSpec beams = cfg.beams();
    const std::vector<double> az = detail::linspace(-pi(), pi(), cfg.n_azi_switching);
    const int n_time = detail::time_step_count(cfg);

    std::vector<std::vector<SwitchingSample>> rows(az.size());
    std::vector<double> row_max(az.size(), 0.0);
    std::vector<SweepCounters> counters(az.size());

    parallel_for(
        az.size(),
        [&](std::size_t ia) {
            SweepCounters& c = counters[ia];
            std::vector<SwitchingSample>& row = rows[ia];
            for (int it = 0; it < n_time; ++it) {
                ++c.total;
                const double t = it * cfg.time_step_s;
                const double r = pulse_center_radius(beams, t, cfg.center_convention);
                if (r <= 0.0) {
                    ++c.invalid_time;
                    continue;
                }
                const Vec3 center =
                    geom.tx_position() + spherical_to_cartesian({r, az[ia], 0.0});
                if (exclude_point(center, cfg, geom) != ExcludeReason::kNone) {
                    ++c.excluded;
                    continue;
                }
                const double rate =
                    std::fabs(beam_switch_rate(cfg.baseline_km, r, az[ia], cfg.bw_r_az_deg));
                row.push_back({rad_to_deg(az[ia]), t * 1e6, rate});
                row_max[ia] = std::max(row_max[ia], rate);
            }
        },
        workers);

    SwitchingResult res;
    for (std::size_t ia = 0; ia < az.size(); ++ia) {
        res.counters += counters[ia];
        res.max_rate = std::max(res.max_rate, row_max[ia]);
        res.samples.insert(res.samples.end(), rows[ia].begin(), rows[ia].end());
    }
    return res;
}

}  // namespace bistatic
