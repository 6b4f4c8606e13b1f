// Command-line front end: loads a JSON config, runs the requested sweep, and
// emits figure-ready CSV files plus a manifest.json describing the run.
//
// Exit codes: 0 success, 1 failed check, 2 configuration error, 3 geometry
// error, 130 interrupted (partially written files are removed).

#include <charconv>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "bistatic/bistatic.hpp"
#include "json.hpp"

using namespace bistatic;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

// Paths of files currently being written, removed if the run is interrupted.
constexpr int kMaxPartial = 8;
char g_partial[kMaxPartial][4096];
volatile std::sig_atomic_t g_partial_count = 0;

extern "C" void handle_interrupt(int) {
    for (int i = 0; i < g_partial_count && i < kMaxPartial; ++i) ::unlink(g_partial[i]);
    ::_exit(130);
}

// RAII stream that registers its path for interrupt cleanup while open.
class OutputFile {
  public:
    explicit OutputFile(const std::filesystem::path& path) : path_(path) {
        if (g_partial_count < kMaxPartial) {
            std::strncpy(g_partial[g_partial_count], path.c_str(),
                         sizeof g_partial[0] - 1);
            g_partial[g_partial_count][sizeof g_partial[0] - 1] = '\0';
            slot_ = g_partial_count;
            g_partial_count = g_partial_count + 1;
        }
        stream_.open(path, std::ios::binary | std::ios::trunc);
        if (!stream_)
            throw std::invalid_argument("cannot write " + path.string());
    }

    ~OutputFile() {
        stream_.close();
        if (slot_ >= 0 && g_partial_count == slot_ + 1)
            g_partial_count = slot_;
    }

    std::ofstream& stream() { return stream_; }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
    std::ofstream stream_;
    int slot_ = -1;
};

std::string fmt6(double x) {
    char buf[40];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::string convention_name(CenterConvention c) {
    return c == CenterConvention::kMidpoint ? "midpoint" : "nominal";
}

std::string policy_name(SplitPolicy p) {
    return p == SplitPolicy::kSum ? "sum" : "skip";
}

CenterConvention parse_convention(const std::string& s) {
    if (s == "nominal" || s == "paper") return CenterConvention::kNominal;
    if (s == "midpoint") return CenterConvention::kMidpoint;
    throw std::invalid_argument("center_convention must be nominal|midpoint, got " + s);
}

SplitPolicy parse_policy(const std::string& s) {
    if (s == "skip") return SplitPolicy::kSkip;
    if (s == "sum") return SplitPolicy::kSum;
    throw std::invalid_argument("split_policy must be skip|sum, got " + s);
}

ordered_json config_to_json(const ScenarioConfig& c) {
    ordered_json j;
    j["r_bi_km"] = c.r_bi_km;
    j["baseline_km"] = c.baseline_km;
    j["tau_p_s"] = c.tau_p_s;
    j["bw_t_az_deg"] = c.bw_t_az_deg;
    j["bw_t_el_deg"] = c.bw_t_el_deg;
    j["bw_r_az_deg"] = c.bw_r_az_deg;
    j["bw_r_el_deg"] = c.bw_r_el_deg;
    j["dpsi_az_deg"] = c.dpsi_az_deg;
    j["dpsi_el_deg"] = c.dpsi_el_deg;
    j["dt_s"] = c.dt_s;
    j["n_azi"] = c.n_azi;
    j["n_elev"] = c.n_elev;
    j["time_step_s"] = c.time_step_s;
    j["elevation_cutoff_deg"] = c.elevation_cutoff_deg;
    j["eclipse_margin_km"] = c.eclipse_margin_km;
    j["r_mono_exclusion_km"] = c.r_mono_exclusion_km;
    j["case3_cube_edge_km"] = c.case3_cube_edge_km;
    j["n_cassini"] = c.n_cassini;
    j["n_azi_switching"] = c.n_azi_switching;
    j["center_convention"] = convention_name(c.center_convention);
    j["split_policy"] = policy_name(c.split_policy);
    return j;
}

void apply_config_file(ScenarioConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config file " + path.string() + ": " + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "r_bi_km") cfg.r_bi_km = value.get<double>();
            else if (key == "baseline_km") cfg.baseline_km = value.get<double>();
            else if (key == "tau_p_s") cfg.tau_p_s = value.get<double>();
            else if (key == "bw_t_az_deg") cfg.bw_t_az_deg = value.get<double>();
            else if (key == "bw_t_el_deg") cfg.bw_t_el_deg = value.get<double>();
            else if (key == "bw_r_az_deg") cfg.bw_r_az_deg = value.get<double>();
            else if (key == "bw_r_el_deg") cfg.bw_r_el_deg = value.get<double>();
            else if (key == "dpsi_az_deg") cfg.dpsi_az_deg = value.get<double>();
            else if (key == "dpsi_el_deg") cfg.dpsi_el_deg = value.get<double>();
            else if (key == "dt_s") cfg.dt_s = value.get<double>();
            else if (key == "n_azi") cfg.n_azi = value.get<int>();
            else if (key == "n_elev") cfg.n_elev = value.get<int>();
            else if (key == "time_step_s") cfg.time_step_s = value.get<double>();
            else if (key == "elevation_cutoff_deg") cfg.elevation_cutoff_deg = value.get<double>();
            else if (key == "eclipse_margin_km") cfg.eclipse_margin_km = value.get<double>();
            else if (key == "r_mono_exclusion_km") cfg.r_mono_exclusion_km = value.get<double>();
            else if (key == "case3_cube_edge_km") cfg.case3_cube_edge_km = value.get<double>();
            else if (key == "n_cassini") cfg.n_cassini = value.get<int>();
            else if (key == "n_azi_switching") cfg.n_azi_switching = value.get<int>();
            else if (key == "center_convention")
                cfg.center_convention = parse_convention(value.get<std::string>());
            else if (key == "split_policy")
                cfg.split_policy = parse_policy(value.get<std::string>());
            else
                throw std::invalid_argument("unknown config key \"" + key + "\"");
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config key \"" + key + "\": " + e.what());
        }
    }
}

ordered_json counters_to_json(const SweepCounters& c) {
    ordered_json j;
    j["total"] = c.total;
    j["excluded"] = c.excluded;
    j["invalid_time"] = c.invalid_time;
    j["split_skipped"] = c.split_skipped;
    j["split_summed"] = c.split_summed;
    j["relocation_failed"] = c.relocation_failed;
    return j;
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const ScenarioConfig& cfg, const std::vector<std::string>& outputs,
                    const SweepCounters& counters, double duration_ms) {
    OutputFile f(out_dir / "manifest.json");
    ordered_json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["duration_ms"] = duration_ms;
    j["config"] = config_to_json(cfg);
    j["outputs"] = outputs;
    j["counters"] = counters_to_json(counters);
    f.stream() << j.dump(2) << '\n';
}

class Stopwatch {
  public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int cmd_prf(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    Stopwatch watch;
    const CassiniSurface surf = cfg.surface();
    const BistaticGeometry geom = cfg.geometry();
    const double prf_bi = prf_bi_max(surf, cfg.tau_p_s);
    const double prf_mono = prf_mono_max(cfg.r_mono_exclusion_km, cfg.tau_p_s);
    const double reach = delta_r_bi(surf);
    const PrfEllipses ell = prf_ellipses(prf_bi, geom, cfg.tau_p_s);

    {
        OutputFile f(out_dir / "prf.csv");
        f.stream() << "L_km,R_bi_km,tau_p_us,prf_bi_hz,prf_mono_hz,delta_r_bi_km,"
                      "leading_a_km,leading_b_km,trailing_a_km,trailing_b_km\n"
                   << fmt6(cfg.baseline_km) << ',' << fmt6(cfg.r_bi_km) << ','
                   << fmt6(cfg.tau_p_s * 1e6) << ',' << fmt6(prf_bi) << ','
                   << fmt6(prf_mono) << ',' << fmt6(reach) << ','
                   << fmt6(ell.leading.semi_major()) << ','
                   << fmt6(ell.leading.semi_minor()) << ','
                   << fmt6(ell.trailing.semi_major()) << ','
                   << fmt6(ell.trailing.semi_minor()) << '\n';
    }
    {
        OutputFile f(out_dir / "surfaces.csv");
        f.stream() << "curve,theta_deg,x_km,z_km\n";
        const ProlateEllipsoid blank = eclipse_ellipsoid(geom, cfg.tau_p_s);
        for (int i = 0; i <= 360; ++i) {
            const double deg = -180.0 + i;
            const double th = deg_to_rad(deg);
            const double rho = cassini_radial(th, surf);
            f.stream() << "cassini," << fmt6(deg) << ',' << fmt6(rho * std::cos(th))
                       << ',' << fmt6(-rho * std::sin(th)) << '\n';
        }
        for (int i = 0; i <= 360; ++i) {
            const double deg = -180.0 + i;
            const double th = deg_to_rad(deg);
            f.stream() << "eclipse," << fmt6(deg) << ','
                       << fmt6(blank.semi_major() * std::cos(th)) << ','
                       << fmt6(-blank.semi_minor() * std::sin(th)) << '\n';
        }
        for (int i = 0; i <= 360; ++i) {
            const double deg = -180.0 + i;
            const double th = deg_to_rad(deg);
            const Vec3 tx = geom.tx_position();
            f.stream() << "monostatic," << fmt6(deg) << ','
                       << fmt6(tx.x + cfg.r_mono_exclusion_km * std::cos(th)) << ','
                       << fmt6(-cfg.r_mono_exclusion_km * std::sin(th)) << '\n';
        }
    }
    write_manifest(out_dir, "prf", cfg, {"prf.csv", "surfaces.csv"}, SweepCounters{},
                   watch.ms());

    std::printf("two-site rate bound:  %.3g kHz (%s Hz)\n", prf_bi / 1000.0,
                fmt6(prf_bi).c_str());
    std::printf("one-site rate bound:  %s Hz at %s km\n", fmt6(prf_mono).c_str(),
                fmt6(cfg.r_mono_exclusion_km).c_str());
    std::printf("reach past receiver:  %s km\n", fmt6(reach).c_str());
    std::printf("wrote %s and %s\n", (out_dir / "prf.csv").c_str(),
                (out_dir / "surfaces.csv").c_str());
    return 0;
}

int cmd_switching(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    Stopwatch watch;
    const SwitchingResult res = switching_sweep(cfg);
    {
        OutputFile f(out_dir / "switching.csv");
        f.stream() << "azimuth_deg,time_us,rate_beams_per_us\n";
        for (const SwitchingSample& s : res.samples)
            f.stream() << fmt6(s.azimuth_deg) << ',' << fmt6(s.time_us) << ','
                       << fmt6(s.rate) << '\n';
    }
    write_manifest(out_dir, "switching", cfg, {"switching.csv"}, res.counters,
                   watch.ms());
    std::printf("peak switching rate: %s beams/us over %zu samples\n",
                fmt6(res.max_rate).c_str(), res.samples.size());
    std::printf("wrote %s\n", (out_dir / "switching.csv").c_str());
    return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
              int case_id, SweepMode mode) {
    Stopwatch watch;
    SweepResult res;
    switch (case_id) {
        case 1: res = run_case1(cfg, mode); break;
        case 2: res = run_case2(cfg); break;
        case 3: res = run_case3(cfg, mode); break;
        default: throw std::invalid_argument("--case must be 1, 2, or 3");
    }
    const std::string name = "case" + std::to_string(case_id) + ".csv";
    {
        OutputFile f(out_dir / name);
        f.stream() << "azimuth_deg,max_beams\n";
        for (std::size_t i = 0; i < res.azimuth_deg.size(); ++i)
            f.stream() << fmt6(res.azimuth_deg[i]) << ',' << res.max_beams[i] << '\n';
    }
    write_manifest(out_dir, "sweep --case " + std::to_string(case_id), cfg, {name},
                   res.counters, watch.ms());
    std::printf("global max: %d beams (%.1f%% of grid points excluded)\n",
                res.global_max, res.excluded_fraction * 100.0);
    std::printf("wrote %s\n", (out_dir / name).c_str());
    return 0;
}

int cmd_check_containment(const ScenarioConfig& cfg) {
    const CassiniSurface surf = cfg.surface();
    const double prf = prf_bi_max(surf, cfg.tau_p_s);
    const int samples = 256 * 256;
    const bool contained = containment_check(prf, surf, cfg.tau_p_s, samples);

    const double waist_rate =
        kSpeedOfLight / (2.0 * std::sqrt(surf.range_product) - surf.baseline +
                         kSpeedOfLight * cfg.tau_p_s);
    const double waist =
        prf_ellipses(waist_rate, cfg.geometry(), cfg.tau_p_s).trailing.semi_minor();
    const double want = cassini_radial(0.5 * pi(), surf);
    const bool waist_ok = std::fabs(waist - want) <= 1e-6 * want;

    std::printf("containment at the rate bound (%s Hz): %s\n", fmt6(prf).c_str(),
                contained ? "pass" : "FAIL");
    std::printf("waist equality at %s Hz: %s (%s vs %s km)\n", fmt6(waist_rate).c_str(),
                waist_ok ? "pass" : "FAIL", fmt6(waist).c_str(), fmt6(want).c_str());
    return contained && waist_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, handle_interrupt);

    CLI::App app{"Geometry toolkit for cooperative two-site pulse-chasing radar"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kToolVersion);

    std::string config_path;
    std::string out_dir_str = ".";
    std::optional<double> r_bi, baseline, tau_p_us;
    app.add_option("-c,--config", config_path, "JSON config file");
    app.add_option("--out-dir", out_dir_str, "output directory (default .)");
    app.add_option("--r-bi", r_bi, "detection range scale sqrt(R_T*R_R), km");
    app.add_option("--baseline", baseline, "transmitter-receiver separation, km");
    app.add_option("--tau-p-us", tau_p_us, "pulse length, microseconds");

    CLI::App* prf = app.add_subcommand("prf", "rate bounds and detection surfaces");
    prf->alias("surfaces");
    CLI::App* switching =
        app.add_subcommand("switching", "beam switching rate over the azimuth plane");
    CLI::App* sweep = app.add_subcommand("sweep", "beam-count sweep for one case");
    int case_id = 0;
    std::string mode_str = "pc";
    std::optional<int> n_azi;
    std::optional<double> eclipse_margin;
    sweep->add_option("--case", case_id, "1 full chase, 2 surveillance, 3 tracking")
        ->required();
    sweep->add_option("--mode", mode_str, "pc (chase) or wpc (full trajectory)");
    sweep->add_option("--n-azi", n_azi, "azimuth grid points");
    sweep->add_option("--eclipse-margin", eclipse_margin, "widened blanking margin, km");
    CLI::App* check = app.add_subcommand(
        "check-containment", "verify the detection surface sits inside one pulse interval");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        ScenarioConfig cfg;
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        if (r_bi) cfg.r_bi_km = *r_bi;
        if (baseline) cfg.baseline_km = *baseline;
        if (tau_p_us) cfg.tau_p_s = *tau_p_us * 1e-6;
        if (sweep->parsed()) {
            if (n_azi) cfg.n_azi = *n_azi;
            if (eclipse_margin) cfg.eclipse_margin_km = *eclipse_margin;
        }
        validate(cfg);

        const std::filesystem::path out_dir(out_dir_str);
        if (!out_dir_str.empty()) std::filesystem::create_directories(out_dir);

        if (prf->parsed()) return cmd_prf(cfg, out_dir);
        if (switching->parsed()) return cmd_switching(cfg, out_dir);
        if (sweep->parsed()) {
            SweepMode mode;
            if (mode_str == "pc") mode = SweepMode::kPc;
            else if (mode_str == "wpc") mode = SweepMode::kWpc;
            else throw std::invalid_argument("--mode must be pc or wpc");
            if (case_id == 2 && mode == SweepMode::kWpc)
                throw std::invalid_argument("--mode wpc applies to cases 1 and 3 only");
            return cmd_sweep(cfg, out_dir, case_id, mode);
        }
        if (check->parsed()) return cmd_check_containment(cfg);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
