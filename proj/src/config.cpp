#include "msnow/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace msnow {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& range) {
    throw ConfigError(key + ": '" + value + "' is not valid, expected " + range);
}

double to_double(const std::string& key, const std::string& v, const std::string& range) {
    double x = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end || std::isnan(x)) bad(key, v, range);
    return x;
}

long long to_int(const std::string& key, const std::string& v, const std::string& range) {
    long long x = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end) bad(key, v, range);
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    std::string l = v;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "on" || l == "true" || l == "yes" || l == "1") return true;
    if (l == "off" || l == "false" || l == "no" || l == "0") return false;
    bad(key, v, "on or off");
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Entry {
    ConfigKey key;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

Entry real(const char* name, const char* help, double lo, double hi, bool lo_open, double ScenarioConfig::*field) {
    char range[96];
    std::snprintf(range, sizeof range, "a number in %c%g, %g]", lo_open ? '(' : '[', lo, hi);
    std::string r = range;
    return {{name, r, help},
            [=](ScenarioConfig& c, const std::string& v) {
                const double x = to_double(name, v, r);
                if (x > hi || x < lo || (lo_open && x == lo)) bad(name, v, r);
                c.*field = x;
            },
            [=](const ScenarioConfig& c) { return fmt(c.*field); }};
}

Entry energy(const char* name, const char* help, double EnergyModel::*field) {
    const std::string r = "a positive number";
    return {{name, r, help},
            [=](ScenarioConfig& c, const std::string& v) {
                const double x = to_double(name, v, r);
                if (!(x > 0) || std::isinf(x)) bad(name, v, r);
                c.energy.*field = x;
            },
            [=](const ScenarioConfig& c) { return fmt(c.energy.*field); }};
}

Entry integer(const char* name, const char* help, long long lo, long long hi, int ScenarioConfig::*field) {
    const std::string r = "an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    return {{name, r, help},
            [=](ScenarioConfig& c, const std::string& v) {
                const long long x = to_int(name, v, r);
                if (x < lo || x > hi) bad(name, v, r);
                c.*field = static_cast<int>(x);
            },
            [=](const ScenarioConfig& c) { return std::to_string(c.*field); }};
}

Entry flag(const char* name, const char* help, bool ScenarioConfig::*field) {
    return {{name, "on or off", help},
            [=](ScenarioConfig& c, const std::string& v) { c.*field = to_bool(name, v); },
            [=](const ScenarioConfig& c) { return std::string(c.*field ? "on" : "off"); }};
}

const std::vector<Entry>& table() {
    constexpr double inf = HUGE_VAL;
    static const std::vector<Entry> t = [] {
        std::vector<Entry> v;
        v.push_back({{"scenario", "uplink, downlink or p2p", "which experiment to run"},
                     [](ScenarioConfig& c, const std::string& s) {
                         try {
                             c.kind = parse_scenario_kind(s);
                         } catch (const ConfigError&) {
                             bad("scenario", s, "uplink, downlink or p2p");
                         }
                     },
                     [](const ScenarioConfig& c) { return std::string(to_string(c.kind)); }});
        v.push_back(real("band_start_hz", "lower band edge", 0, inf, true, &ScenarioConfig::band_start_hz));
        v.push_back(real("band_end_hz", "upper band edge", 0, inf, true, &ScenarioConfig::band_end_hz));
        v.push_back(real("subcarrier_bw_hz", "subcarrier bandwidth, also the chip rate", 0, inf, true,
                         &ScenarioConfig::subcarrier_bw_hz));
        v.push_back(real("overlap", "subcarrier overlap factor", 0, 0.5, true, &ScenarioConfig::overlap));
        v.push_back(integer("subcarriers", "if non-zero, the band is sized for this many subcarriers", 0, 4096,
                            &ScenarioConfig::subcarriers));
        v.push_back(integer("sensors_per_subcarrier", "concurrent senders per subcarrier", 1, kMaxPerSubcarrier,
                            &ScenarioConfig::sensors_per_subcarrier));
        v.push_back(integer("packets_per_sensor", "packets each sensor sends", 1, 10000000,
                            &ScenarioConfig::packets_per_sensor));
        v.push_back(integer("packet_size_bytes", "header plus payload bytes", 13, 1024,
                            &ScenarioConfig::packet_size_bytes));
        v.push_back(real("interval_min_s", "shortest idle time between packets", 0, inf, false,
                         &ScenarioConfig::interval_min_s));
        v.push_back(real("interval_max_s", "longest idle time between packets", 0, inf, false,
                         &ScenarioConfig::interval_max_s));
        v.push_back(real("snr_db", "per-sample SNR of one unit chip", -inf, inf, false, &ScenarioConfig::snr_db));
        v.push_back(flag("noise", "add white Gaussian noise", &ScenarioConfig::noise));
        v.push_back({{"rng_seed", "an unsigned 64-bit integer", "base seed for every random stream"},
                     [](ScenarioConfig& c, const std::string& s) {
                         std::uint64_t x = 0;
                         const auto* end = s.data() + s.size();
                         auto [p, ec] = std::from_chars(s.data(), end, x);
                         if (ec != std::errc() || p != end) bad("rng_seed", s, "an unsigned 64-bit integer");
                         c.rng_seed = x;
                     },
                     [](const ScenarioConfig& c) { return std::to_string(c.rng_seed); }});
        v.push_back(integer("repetitions", "independent runs merged into one report", 1, 100000,
                            &ScenarioConfig::repetitions));
        v.push_back(real("tx_power_dbm", "sensor transmit power", -60, 30, false, &ScenarioConfig::tx_power_dbm));
        v.push_back(real("rx_sensitivity_dbm", "receiver sensitivity", -150, 0, false,
                         &ScenarioConfig::rx_sensitivity_dbm));
        v.push_back(flag("chip_aligned", "all sensors of a subcarrier start together, back to back",
                         &ScenarioConfig::chip_aligned));
        v.push_back(integer("pairs", "sender and receiver pairs in p2p", 1, kMaxPairs, &ScenarioConfig::pairs));
        v.push_back(real("forwarding_delay_s", "base station processing before forwarding", 0, inf, false,
                         &ScenarioConfig::forwarding_delay_s));
        v.push_back(real("backoff_initial", "SNOW initial back-off window, in airtimes", 0, 100, true,
                         &ScenarioConfig::backoff_initial));
        v.push_back(real("backoff_congestion", "SNOW congestion back-off window, in airtimes", 0, 100, true,
                         &ScenarioConfig::backoff_congestion));
        v.push_back({{"modulation", "ook", "only on-off keying is modelled"},
                     [](ScenarioConfig&, const std::string& s) {
                         if (s != "ook" && s != "OOK") bad("modulation", s, "ook");
                     },
                     [](const ScenarioConfig&) { return std::string("ook"); }});
        v.push_back({{"sweep", "key=from:to:step or key=a,b,c", "grid of values to run"},
                     [](ScenarioConfig& c, const std::string& s) {
                         if (!s.empty()) parse_sweep_axis(s);
                         c.sweep = s;
                     },
                     [](const ScenarioConfig& c) { return c.sweep; }});
        v.push_back(energy("tx_current_ma", "radio current while sending", &EnergyModel::tx_current_ma));
        v.push_back(energy("idle_current_ma", "radio current while idle", &EnergyModel::idle_current_ma));
        v.push_back(energy("sleep_current_ua", "radio current while asleep", &EnergyModel::sleep_current_ua));
        v.push_back(energy("listen_current_ma", "radio current while sensing the channel",
                           &EnergyModel::listen_current_ma));
        v.push_back(energy("supply_voltage", "supply voltage", &EnergyModel::supply_voltage));
        return v;
    }();
    return t;
}

const Entry* find(const std::string& key) {
    for (const auto& e : table())
        if (e.key.name == key) return &e;
    return nullptr;
}

}  // namespace

void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    const Entry* e = find(key);
    if (!e) throw ConfigError("unknown key '" + key + "'");
    e->set(cfg, trim(value));
}

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(n) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        try {
            apply_setting(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return parse_config_text(s.str(), path);
}

void apply_env_overrides(ScenarioConfig& cfg, const std::string& prefix) {
    for (const auto& e : table()) {
        std::string var = prefix + e.key.name;
        std::transform(var.begin(), var.end(), var.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(var.c_str())) {
            try {
                e.set(cfg, trim(v));
            } catch (const ConfigError& err) {
                throw ConfigError(var + ": " + err.what());
            }
        }
    }
    cfg.validate();
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& e : table()) k.push_back(e.key);
        return k;
    }();
    return keys;
}

std::string format_config(const ScenarioConfig& cfg) {
    std::string out;
    for (const auto& e : table()) out += e.key.name + " = " + e.get(cfg) + "\n";
    return out;
}

SweepAxis parse_sweep_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("sweep axis must look like key=from:to:step or key=a,b,c");
    SweepAxis ax;
    ax.key = trim(spec.substr(0, eq));
    const std::string rest = trim(spec.substr(eq + 1));
    if (ax.key != "sensors" && !find(ax.key)) throw ConfigError("unknown sweep key '" + ax.key + "'");
    if (rest.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(rest);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
        if (parts.size() != 3) throw ConfigError("range sweep must be from:to:step");
        const std::string r = "a from:to:step integer range";
        const long long a = to_int(ax.key, parts[0], r), b = to_int(ax.key, parts[1], r), s = to_int(ax.key, parts[2], r);
        if (s <= 0 || b < a) throw ConfigError("sweep range " + rest + " is empty");
        for (long long x = a; x <= b; x += s) ax.values.push_back(std::to_string(x));
    } else {
        std::stringstream ss(rest);
        for (std::string p; std::getline(ss, p, ',');)
            if (!trim(p).empty()) ax.values.push_back(trim(p));
    }
    if (ax.values.empty()) throw ConfigError("sweep grid is empty");
    return ax;
}

void apply_sweep_value(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    if (key != "sensors") {
        apply_setting(cfg, key, value);
        return;
    }
    const long long total = to_int("sensors", value, "a positive integer");
    const auto m = static_cast<long long>(cfg.plan().size());
    if (total < 1 || total % m != 0)
        throw ConfigError("sensors: " + value + " is not a multiple of the " + std::to_string(m) + " subcarriers");
    apply_setting(cfg, "sensors_per_subcarrier", std::to_string(total / m));
}

}  // namespace msnow
