// msnow: command-line front end for the PN, PHY and network experiments.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "msnow/config.hpp"
#include "msnow/metrics.hpp"
#include "msnow/netsim.hpp"
#include "msnow/pnseq.hpp"
#include "msnow/rng.hpp"

namespace fs = std::filesystem;
using namespace msnow;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

struct RunFlags {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::string noise;
    bool dump_events = false;
    std::string dump_signal;
    std::string grid;
};

// Files appear whole or not at all.
void write_atomic(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << text;
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string default_seed(int n) { return std::string(static_cast<std::size_t>(n - 1), '0') + "1"; }

ScenarioConfig load(const RunFlags& f) {
    ScenarioConfig cfg = f.config.empty() ? parse_config_text("") : parse_config_file(f.config);
    apply_env_overrides(cfg);
    if (f.seed) cfg.rng_seed = *f.seed;
    if (f.reps) apply_setting(cfg, "repetitions", std::to_string(*f.reps));
    if (!f.noise.empty()) apply_setting(cfg, "noise", f.noise);
    if (!f.grid.empty()) apply_setting(cfg, "sweep", f.grid);
    cfg.validate();
    return cfg;
}

std::string summary(const MetricsReport& r) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%s/%s sensors=%d per_subcarrier=%d cdr=%.2f%% throughput=%.4g bps latency=%s energy=%s",
                  r.system.c_str(), r.scenario.c_str(), r.sensors, r.sensors_per_subcarrier,
                  r.cdr.average.value_or(0.0), r.throughput.effective_bps,
                  r.latency_s ? (std::to_string(*r.latency_s * 1e3) + " ms").c_str() : "n/a",
                  r.energy_j ? (std::to_string(*r.energy_j * 1e3) + " mJ").c_str() : "n/a");
    std::string s = buf;
    if (r.e2e_mean_s) s += " e2e=" + std::to_string(*r.e2e_mean_s * 1e3) + " ms";
    return s;
}

// Runs one scenario, or every point of its sweep, and writes the reports.
int run_command(const RunFlags& f, std::optional<ScenarioKind> kind, bool baseline) {
    ScenarioConfig cfg = load(f);
    if (kind) cfg.kind = *kind;
    std::vector<std::pair<std::string, ScenarioConfig>> points;
    if (cfg.sweep.empty()) {
        points.push_back({"", cfg});
    } else {
        const auto axis = parse_sweep_axis(cfg.sweep);
        for (std::size_t i = 0; i < axis.values.size(); ++i) {
            ScenarioConfig c = cfg;
            apply_sweep_value(c, axis.key, axis.values[i]);
            c.rng_seed = derive_seed(cfg.rng_seed, {i});
            c.validate();
            points.push_back({axis.key + "=" + axis.values[i], c});
        }
    }
    const fs::path out(f.out);
    const std::string stem = std::string(baseline ? "snow_" : "msnow_") + to_string(cfg.kind);
    std::string csv = "point," + MetricsReport::csv_header() + "\n";
    std::string json = "[\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& [label, c] = points[i];
        RunOptions opt;
        if (i == 0) opt.dump_signal = f.dump_signal;
        const ScenarioResult res = baseline ? run_snow_baseline(c) : run_scenario(c, opt);
        std::cout << (label.empty() ? "" : label + " ") << summary(res.report) << "\n";
        csv += label + "," + res.report.to_csv_row() + "\n";
        json += (i ? ",\n" : "") + res.report.to_json();
        if (f.dump_events) {
            const std::string name = stem + (points.size() > 1 ? "_" + std::to_string(i) : "") + "_events.csv";
            write_atomic(out / name, res.log.to_csv());
        }
        if (points.size() > 1)
            write_atomic(out / (stem + "_" + std::to_string(i) + ".json"), res.report.to_json() + "\n");
    }
    json += "\n]\n";
    write_atomic(out / (stem + ".json"), points.size() > 1 ? json : json.substr(2, json.size() - 5) + "\n");
    write_atomic(out / (stem + ".csv"), csv);
    return kOk;
}

void add_run_flags(CLI::App* sub, RunFlags& f, bool grid) {
    sub->add_option("--config", f.config, "scenario file (key = value lines)");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "override rng_seed");
    sub->add_option("--reps", f.reps, "override repetitions");
    sub->add_option("--noise", f.noise, "on or off")->check(CLI::IsMember({"on", "off"}));
    sub->add_flag("--dump-events", f.dump_events, "write the event log as CSV");
    sub->add_option("--dump-signal", f.dump_signal, "write the first chunk of baseband samples here");
    if (grid) sub->add_option("--grid", f.grid, "sweep axis, key=from:to:step or key=a,b,c");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mSNOW Gold-code concurrent PHY and network simulator"};
    app.require_subcommand(1);

    int n = 3;
    std::string seed1, seed2, pn_out;
    auto* gen = app.add_subcommand("gen-pn", "print a Gold PN set");
    gen->add_option("--n", n, "register length")->check(CLI::Range(2, 16));
    gen->add_option("--seed1", seed1, "seed of the first register, as bits");
    gen->add_option("--seed2", seed2, "seed of the second register, as bits");
    gen->add_option("--out", pn_out, "also write the set to this file");

    auto* ver = app.add_subcommand("verify-pn", "check the correlation and m-sequence properties of a set");
    ver->add_option("--n", n, "register length")->check(CLI::Range(2, 16));
    ver->add_option("--seed1", seed1, "seed of the first register, as bits");
    ver->add_option("--seed2", seed2, "seed of the second register, as bits");

    RunFlags up, down, p2p, base, sweep;
    add_run_flags(app.add_subcommand("run-uplink", "uplink convergecast"), up, false);
    add_run_flags(app.add_subcommand("run-downlink", "concurrent downlink"), down, false);
    add_run_flags(app.add_subcommand("run-p2p", "peer to peer through the base station"), p2p, false);
    auto* base_cmd = app.add_subcommand("run-baseline", "existing SNOW for the configured scenario");
    add_run_flags(base_cmd, base, true);
    auto* sweep_cmd = app.add_subcommand("sweep", "one report per grid point");
    add_run_flags(sweep_cmd, sweep, true);
    bool sweep_baseline = false;
    sweep_cmd->add_flag("--baseline", sweep_baseline, "run existing SNOW instead of mSNOW");

    double bandwidth = 200e3, snr_ratio = 3.0;
    int chips = 7;
    ScalabilityInput sc;
    auto* est = app.add_subcommand("estimate", "bitrate and scalability arithmetic");
    est->add_option("--bandwidth", bandwidth, "Hz");
    est->add_option("--snr-ratio", snr_ratio, "linear SNR");
    est->add_option("--chips", chips, "spreading factor");
    est->add_option("--channels", sc.channels);
    est->add_option("--subcarriers", sc.subcarriers_per_channel);
    est->add_option("--per-subcarrier", sc.sensors_per_subcarrier);
    est->add_option("--airtime-us", sc.airtime_us);
    est->add_option("--packets-per-day", sc.packets_per_day);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (gen->parsed() || ver->parsed()) {
            if (seed1.empty()) seed1 = n == 3 ? "101" : default_seed(n);
            if (seed2.empty()) seed2 = n == 3 ? "101" : default_seed(n);
            const PnSet set = gold_set_for_degree(n, seed1, seed2, "n" + std::to_string(n));
            if (gen->parsed()) {
                for (const auto& s : set.sequences) std::cout << bits_to_string(s.bits) << "\n";
                if (!pn_out.empty()) write_atomic(pn_out, export_pn_set(set));
                return kOk;
            }
            const auto rep = verify_three_valued(set);
            std::ostringstream vals;
            vals << "{";
            for (std::size_t i = 0; i < rep.allowed.size(); ++i) vals << (i ? ", " : "") << rep.allowed[i];
            vals << "}";
            std::cout << "three-valued: " << (rep.passes ? "PASS " : "FAIL ") << vals.str() << "\n";
            bool ok = rep.passes;
            for (const auto* m : {&set.pair.u, &set.pair.v}) {
                const bool bal = is_balanced(m->bits), runs = satisfies_run_property(m->bits, n);
                bool two = true;
                for (std::size_t t = 1; t < m->bits.size(); ++t)
                    two = two && autocorrelation(m->bits, static_cast<std::int64_t>(t)) ==
                                     Rational(-1, static_cast<std::int64_t>(m->bits.size()));
                std::cout << "m-sequence " << bits_to_string(m->bits).substr(0, 16)
                          << (m->bits.size() > 16 ? "..." : "") << ": balance " << (bal ? "PASS" : "FAIL")
                          << ", runs " << (runs ? "PASS" : "FAIL") << ", autocorrelation " << (two ? "PASS" : "FAIL")
                          << "\n";
                ok = ok && bal && runs && two;
            }
            return ok ? kOk : kRuntime;
        }
        if (est->parsed()) {
            const double c = shannon_bitrate_ratio(bandwidth, snr_ratio);
            const double s = spread_bitrate_ratio(bandwidth, snr_ratio, chips);
            std::printf("shannon: %.2f bps\nspread (N=%d): %.2f bps per sensor, %.2f bps for %lld sensors\n", c, chips,
                        s, s * static_cast<double>(sc.sensors_per_subcarrier),
                        static_cast<long long>(sc.sensors_per_subcarrier));
            ScalabilityInput paired = sc;
            paired.paired = true;
            std::printf("sensors (uplink only): %lld\nsensors (uplink and downlink): %lld\n",
                        static_cast<long long>(scalability_estimate(sc)),
                        static_cast<long long>(scalability_estimate(paired)));
            return kOk;
        }
        for (auto [name, flags, kind] :
             {std::tuple{"run-uplink", &up, ScenarioKind::uplink}, std::tuple{"run-downlink", &down, ScenarioKind::downlink},
              std::tuple{"run-p2p", &p2p, ScenarioKind::p2p}})
            if (app.got_subcommand(name)) return run_command(*flags, kind, false);
        if (base_cmd->parsed()) return run_command(base, std::nullopt, true);
        if (sweep_cmd->parsed()) {
            if (sweep.grid.empty() && (sweep.config.empty() || load(sweep).sweep.empty()))
                throw ConfigError("sweep needs a grid (--grid or a sweep key in the config)");
            return run_command(sweep, std::nullopt, sweep_baseline);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
