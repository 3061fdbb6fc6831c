// Acceptance checks against the reference results. One line per criterion:
//   [PASS|FAIL] <id> <name>: <measured> (want <target>) <seconds>s
// Usage: msnow_acceptance <group>...   groups: pn phy uplink downlink scaling p2p calc determinism all
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "msnow/config.hpp"
#include "msnow/metrics.hpp"
#include "msnow/netsim.hpp"
#include "msnow/phy.hpp"
#include "msnow/pnseq.hpp"
#include "msnow/rng.hpp"

using namespace msnow;

namespace {

int failures = 0;

struct Clock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int id, const std::string& name, bool ok, const std::string& measured, const std::string& want,
            const Clock& c, double budget_s) {
    const double s = c.seconds();
    const bool in_time = s <= budget_s;
    std::printf("[%s] %d %s: %s (want %s, under %.0fs) %.1fs%s\n", ok && in_time ? "PASS" : "FAIL", id, name.c_str(),
                measured.c_str(), want.c_str(), budget_s, s, in_time ? "" : " over budget");
    std::fflush(stdout);
    if (!(ok && in_time)) ++failures;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

ScenarioConfig load(const std::string& name) { return parse_config_file(std::string(MSNOW_CONFIG_DIR) + "/" + name); }

// Runs each point of the config's sweep and returns the reports in order.
std::vector<MetricsReport> sweep(ScenarioConfig cfg, bool baseline = false) {
    const auto axis = parse_sweep_axis(cfg.sweep);
    std::vector<MetricsReport> out;
    for (std::size_t i = 0; i < axis.values.size(); ++i) {
        ScenarioConfig c = cfg;
        apply_sweep_value(c, axis.key, axis.values[i]);
        c.rng_seed = derive_seed(cfg.rng_seed, {i});
        c.validate();
        out.push_back(baseline ? run_snow_baseline(c).report : run_scenario(c).report);
    }
    return out;
}

std::string joined(const std::vector<double>& v, const char* f) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " / " : "") + fmt(f, v[i]);
    return s;
}

void pn_group() {
    {
        Clock c;
        const std::vector<std::string> one{"1011100", "1010011", "0001111", "1111011", "0010010",
                                           "1000001", "1100110", "0101000", "0110101"};
        const std::vector<std::string> two{"0101110", "0100111", "0001001", "1100000", "0110011",
                                           "0010100", "1011010", "1000111", "1111101"};
        auto strings = [](const PnSet& s) {
            std::vector<std::string> v;
            for (const auto& q : s.sequences) v.push_back(bits_to_string(q.bits));
            return v;
        };
        const bool a = strings(gold_set_for_degree(3, "101", "101", "PNs1")) == one;
        const bool b = strings(gold_set_for_degree(3, "010", "010", "PNs2")) == two;
        report(1, "PN-set reproduction", a && b, std::string("PNs1 ") + (a ? "exact" : "differs") + ", PNs2 " +
                                                    (b ? "exact" : "differs"),
               "bit exact", c, 1);
    }
    {
        Clock c;
        bool ok = true;
        std::string seen;
        for (int n : {3, 5}) {
            const std::string seed(static_cast<std::size_t>(n - 1), '0');
            const auto set = gold_set_for_degree(n, seed + "1", seed + "1", "g");
            const std::set<std::int64_t> allowed{-t_of_n(n), -1, t_of_n(n) - 2};
            std::set<std::int64_t> vals;
            const auto N = static_cast<std::int64_t>(set[0].length());
            for (std::size_t i = 0; i < set.size(); ++i)
                for (std::size_t j = 0; j < set.size(); ++j)
                    for (std::int64_t t = 0; t < N; ++t) {
                        if (i == j) continue;
                        std::int64_t s = 0;
                        for (std::int64_t k = 0; k < N; ++k)
                            s += (1 - 2 * set[i].bits[k]) * (1 - 2 * set[j].bits[((k - t) % N + N) % N]);
                        vals.insert(s);
                    }
            for (auto v : vals) ok = ok && allowed.count(v);
            ok = ok && verify_three_valued(set).passes;
            seen += "n=" + std::to_string(n) + " {";
            for (auto v : vals) seen += std::to_string(v) + (v == *vals.rbegin() ? "" : ",");
            seen += "} ";
        }
        report(2, "Gold three-valued cross-correlation", ok, seen, "{-t, -1, t-2}", c, 10);
    }
    {
        Clock c;
        bool ok = true;
        for (int n : {3, 5, 6, 7}) {
            const std::string seed = std::string(static_cast<std::size_t>(n - 1), '0') + "1";
            const auto set = gold_set_for_degree(n, seed, seed, "m");
            for (const auto* m : {&set.pair.u, &set.pair.v}) {
                const auto N = static_cast<std::int64_t>(m->bits.size());
                ok = ok && is_balanced(m->bits) && satisfies_run_property(m->bits, n);
                for (std::int64_t t = 1; t < N; ++t) ok = ok && autocorrelation(m->bits, t) == Rational(-1, N);
            }
        }
        report(3, "m-sequence properties", ok, ok ? "balance, runs, autocorrelation hold" : "violated",
               "exact for n in {3,5,6,7}", c, 5);
    }
}

void phy_group() {
    {
        Clock c;
        auto cfg = load("chip_aligned.cfg");
        cfg.sweep.clear();
        cfg.sensors_per_subcarrier = 9;
        cfg.packets_per_sensor = 40;  // 27 sensors x 40 = 1080 packets per direction
        cfg.noise = false;
        cfg.repetitions = 1;
        cfg.validate();
        const auto up = run_scenario(cfg).report.cdr;
        cfg.kind = ScenarioKind::downlink;
        const auto down = run_scenario(cfg).report.cdr;
        const bool ok = up.delivered == up.transmitted && down.delivered == down.transmitted && up.transmitted >= 1000;
        report(4, "noise-free chip-aligned identity",
               ok, fmt("uplink %.2f%%", *up.average) + fmt(", downlink %.2f%%", *down.average) + " of " +
                       std::to_string(up.transmitted) + " packets",
               "100%", c, 60);
    }
    {
        Clock c;
        const auto plan = build_subcarrier_plan(547.0e6, 547.8e6, 400e3, 0.5);
        const auto geo = make_geometry(plan);
        const std::int64_t chips = 50000 / geo.rows + 1;
        double worst = 1.0;
        for (int k = 0; k <= 9; ++k) {
            ChipLevels levels(geo.rows, 0, chips);
            for (auto& v : levels.data) v = k;
            auto sig = synthesize(levels, geo, 1.0);
            add_awgn_inplace(sig, 6.0, derive_seed(5, {static_cast<std::uint64_t>(k)}));
            const auto res = gfft_demux(sig, plan);
            std::int64_t in = 0;
            for (double m : res.rss) in += (m > k - 0.5 && m <= k + 0.5);
            worst = std::min(worst, static_cast<double>(in) / static_cast<double>(res.rss.size()));
        }
        report(5, "demux thresholds at 6 dB", worst >= 0.999, fmt("worst level %.4f%% in band", 100 * worst),
               ">= 99.9%", c, 120);
    }
}

// Average CDR per point: near 100% up to four per subcarrier, within 3 points
// of the reference values beyond.
void cdr_check(int id, const std::string& name, const char* cfg_name, const std::vector<double>& target) {
    Clock c;
    const auto reps = sweep(load(cfg_name));
    std::vector<double> got;
    bool ok = reps.size() == 9;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const double v = reps[i].cdr.average.value_or(0);
        got.push_back(v);
        ok = ok && (i < 4 ? v >= 99.0 : std::abs(v - target[i - 4]) <= 3.0);
    }
    report(id, name, ok, joined(got, "%.2f"), ">=99 for 1-4, then " + joined(target, "%.2f") + " +-3", c, 600);
}

void scaling_group() {
    Clock c;
    const auto cfg = load("scaling.cfg");
    const auto m = sweep(cfg);
    const auto b = sweep(cfg, true);
    const double secs = c.seconds();
    std::vector<double> tm, tb, lm, lb, em, eb;
    for (const auto& r : m) {
        tm.push_back(r.throughput.effective_bps / 1e6);
        lm.push_back(r.latency_s.value_or(0) * 1e3);
        em.push_back(r.energy_j.value_or(0) * 1e3);
    }
    for (const auto& r : b) {
        tb.push_back(r.throughput.effective_bps / 1e6);
        lb.push_back(r.latency_s.value_or(0) * 1e3);
        eb.push_back(r.energy_j.value_or(0) * 1e3);
    }
    const double ratio = tm.back() / tm.front();
    bool flat = true;
    for (double v : tb) flat = flat && v >= 1.9 && v <= 2.1;
    const bool ok8 = std::abs(tm.front() - 2.56) <= 0.256 && ratio >= 7.0 && ratio <= 9.5 && flat;
    std::printf("sweep took %.1fs for mSNOW and SNOW together\n", secs);
    report(8, "throughput scaling", ok8,
           "mSNOW " + joined(tm, "%.3f") + " Mbps, ratio " + fmt("%.2f", ratio) + "; SNOW " + joined(tb, "%.3f"),
           "2.56+-10% at 64, ratio in [7.0, 9.5], SNOW in [1.9, 2.1]", c, 1200);
    bool ok9 = true;
    for (double v : lm) ok9 = ok9 && v >= 5.6 * 0.95 && v <= 6.03 * 1.05;
    for (std::size_t i = 1; i < lb.size(); ++i) ok9 = ok9 && lb[i] > lb[i - 1];
    report(9, "latency", ok9, "mSNOW " + joined(lm, "%.2f") + " ms; SNOW " + joined(lb, "%.1f"),
           "mSNOW in [5.6, 6.03] +-5%, SNOW increasing", c, 1200);
    bool ok10 = eb.back() >= 5.0 * 0.95 * em.back();
    for (double v : em) ok10 = ok10 && v >= 0.2940 * 0.95 && v <= 0.3166 * 1.05;
    report(10, "energy", ok10,
           "mSNOW " + joined(em, "%.4f") + " mJ; SNOW at 576 " + fmt("%.3f", eb.back()) + fmt(" (%.1fx)", eb.back() / em.back()),
           "mSNOW in [0.2940, 0.3166] +-5%, SNOW >= 5x at 576", c, 1200);
}

void p2p_group() {
    Clock c;
    const auto cfg = load("p2p_e2e.cfg");
    const auto m = sweep(cfg);
    const auto b = sweep(cfg, true);
    std::vector<double> em, eb;
    bool ratio_ok = true;
    for (std::size_t i = 0; i < m.size(); ++i) {
        em.push_back(m[i].e2e_mean_s.value_or(0) * 1e3);
        eb.push_back(b[i].e2e_mean_s.value_or(0) * 1e3);
        ratio_ok = ratio_ok && eb.back() >= 2.5 * em.back();
    }
    const bool ok = std::abs(em.front() - 16.21) <= 1.621 && std::abs(em.back() - 20.79) <= 2.079 && ratio_ok;
    report(11, "peer to peer E2E", ok, "mSNOW " + joined(em, "%.2f") + " ms; SNOW " + joined(eb, "%.2f"),
           "16.21+-10% at 5 pairs, 20.79+-10% at 25, SNOW >= 2.5x", c, 300);
}

void calc_group() {
    Clock c;
    const double r = spread_bitrate_ratio(200e3, 3.0, 7) / 1e3;
    ScalabilityInput in;
    const std::int64_t up = scalability_estimate(in);
    in.paired = true;
    const std::int64_t both = scalability_estimate(in);
    // the quoted figure halves the uplink total after rounding it to 80.5 million
    const std::int64_t rounded = (up + 50000) / 100000 * 100000;
    const bool ok = std::abs(r - 57.14) <= 0.01 && up == 80537118 && rounded / 2 == 40250000 && both == up / 2;
    report(12, "analytical calculators", ok,
           fmt("%.4f kbps, ", r) + std::to_string(up) + " sensors, " + std::to_string(rounded / 2) +
               " paired (unrounded " + std::to_string(both) + ")",
           "57.14+-0.01, 80537118, 40250000", c, 1);
}

void determinism_group() {
    Clock c;
    bool ok = true;
    std::string what;
    for (auto kind : {ScenarioKind::uplink, ScenarioKind::downlink, ScenarioKind::p2p}) {
        ScenarioConfig cfg;
        cfg.kind = kind;
        cfg.sensors_per_subcarrier = 6;
        cfg.packets_per_sensor = 8;
        cfg.rng_seed = 2024;
        if (kind == ScenarioKind::p2p) {
            cfg.subcarriers = 6;
            cfg.pairs = 10;
        }
        cfg.validate();
        for (bool base : {false, true}) {
            auto once = [&] {
                const auto r = base ? run_snow_baseline(cfg) : run_scenario(cfg);
                return r.report.to_json() + r.report.to_csv_row() + r.log.to_csv();
            };
            const bool same = once() == once();
            ok = ok && same;
            what += std::string(base ? "snow/" : "msnow/") + to_string(kind) + (same ? " same " : " DIFFERS ");
        }
    }
    report(13, "determinism", ok, what, "byte identical", c, 120);
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<void()>>> groups{
        {"pn", pn_group},
        {"phy", phy_group},
        {"uplink", [] { cdr_check(6, "uplink CDR", "uplink_cdr.cfg", {98.4, 97.71, 97.33, 95.33, 92.88}); }},
        {"downlink", [] { cdr_check(7, "downlink CDR", "downlink_cdr.cfg", {99.0, 98.49, 97.9, 95.12, 93.61}); }},
        {"scaling", scaling_group},
        {"p2p", p2p_group},
        {"calc", calc_group},
        {"determinism", determinism_group},
    };
    std::vector<std::string> want(argv + 1, argv + argc);
    if (want.empty()) {
        std::fprintf(stderr, "usage: %s <group>... (pn phy uplink downlink scaling p2p calc determinism all)\n", argv[0]);
        return 1;
    }
    for (const auto& w : want) {
        bool known = false;
        for (const auto& [name, fn] : groups)
            if (w == name || w == "all") {
                fn();
                known = true;
            }
        if (!known) {
            std::fprintf(stderr, "unknown group %s\n", w.c_str());
            return 1;
        }
    }
    return failures ? 1 : 0;
}
