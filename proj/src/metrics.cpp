#include "msnow/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace msnow {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::ready: return "ready";
        case EventKind::tx_start: return "tx_start";
        case EventKind::tx_end: return "tx_end";
        case EventKind::decode_ok: return "decode_ok";
        case EventKind::decode_fail: return "decode_fail";
        case EventKind::rx_ok: return "rx_ok";
        case EventKind::rx_fail: return "rx_fail";
    }
    return "?";
}

void EventLog::finalize() {
    std::stable_sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
        if (a.chip != b.chip) return a.chip < b.chip;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
}

void EventLog::append(const EventLog& other, std::int64_t chip_offset) {
    for (auto e : other.events_) {
        e.chip += chip_offset;
        events_.push_back(e);
    }
}

std::int64_t EventLog::first_chip() const {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (const auto& e : events_) m = std::min(m, e.chip);
    return events_.empty() ? 0 : m;
}

std::int64_t EventLog::last_chip() const {
    std::int64_t m = std::numeric_limits<std::int64_t>::min();
    for (const auto& e : events_) m = std::max(m, e.chip);
    return events_.empty() ? 0 : m;
}

std::string EventLog::to_csv() const {
    std::string out = "time_s,node,subcarrier,event,packet_id\n";
    char buf[160];
    for (const auto& e : events_) {
        std::snprintf(buf, sizeof buf, "%.9f,%d,%d,%s,%lld\n", time_of(e.chip), e.node, e.subcarrier,
                      to_string(e.kind), static_cast<long long>(e.packet_id));
        out += buf;
    }
    return out;
}

void EventLog::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write event log " + path);
    f << to_csv();
}

void EnergyModel::validate() const {
    if (!(tx_current_ma > 0 && idle_current_ma > 0 && sleep_current_ua > 0 && supply_voltage > 0 &&
          listen_current_ma > 0))
        throw std::invalid_argument("energy model values must be positive");
}

namespace {

bool is_outcome(EventKind k) {
    return k == EventKind::decode_ok || k == EventKind::decode_fail || k == EventKind::rx_ok ||
           k == EventKind::rx_fail;
}

bool is_ok(EventKind k) { return k == EventKind::decode_ok || k == EventKind::rx_ok; }

// Uplink events belong to a sensor's transmission, downlink ones to the base station's.
bool is_downlink(const Event& e) {
    if (e.kind == EventKind::rx_ok || e.kind == EventKind::rx_fail) return true;
    if (e.kind == EventKind::decode_ok || e.kind == EventKind::decode_fail) return false;
    return e.node == kBaseStation;
}

struct HopRecord {
    int sender = -1;
    int flow = -1;  // sender for uplink hops, receiver for downlink hops
    std::int64_t ready = -1;
    std::int64_t first_tx = -1;
    std::int64_t last_end = -1;
    std::int64_t open_tx = -1;
    std::int64_t tx_chips = 0;
    int attempts = 0;
    bool ok = false;
    std::int64_t ok_chip = -1;
};

using HopKey = std::pair<std::int64_t, bool>;  // (packet id, downlink)

std::map<HopKey, HopRecord> collect_hops(const EventLog& log) {
    std::map<HopKey, HopRecord> hops;
    for (const auto& e : log.events()) {
        const bool down = is_downlink(e);
        auto& h = hops[{e.packet_id, down}];
        switch (e.kind) {
            case EventKind::ready:
                h.ready = e.chip;
                h.sender = e.node;
                break;
            case EventKind::tx_start:
                if (h.first_tx < 0) h.first_tx = e.chip;
                h.open_tx = e.chip;
                h.sender = e.node;
                ++h.attempts;
                break;
            case EventKind::tx_end:
                h.last_end = e.chip;
                if (h.open_tx >= 0) h.tx_chips += e.chip - h.open_tx;
                h.open_tx = -1;
                break;
            default:
                h.flow = down ? e.node : h.sender;
                if (is_ok(e.kind) && !h.ok) {
                    h.ok = true;
                    h.ok_chip = e.chip;
                }
                break;
        }
        if (!down && h.flow < 0) h.flow = h.sender;
    }
    for (auto& [key, h] : hops) {
        if (h.ready < 0) h.ready = h.first_tx;
    }
    return hops;
}

bool complete(const HopRecord& h) { return h.first_tx >= 0 && h.last_end >= 0 && h.flow >= 0; }

}  // namespace

CdrReport compute_cdr(const EventLog& log, Hop hop) {
    std::map<int, std::pair<std::int64_t, std::int64_t>> counts;  // ok, total
    CdrReport r;
    for (const auto& e : log.events()) {
        if (!is_outcome(e.kind)) continue;
        const bool down = is_downlink(e);
        if ((hop == Hop::uplink && down) || (hop == Hop::downlink && !down)) continue;
        auto& c = counts[e.subcarrier];
        ++c.second;
        ++r.transmitted;
        if (is_ok(e.kind)) {
            ++c.first;
            ++r.delivered;
        }
    }
    if (counts.empty()) return r;
    double sum = 0.0;
    for (const auto& [sc, c] : counts) {
        const double v = 100.0 * static_cast<double>(c.first) / static_cast<double>(c.second);
        r.per_subcarrier[sc] = v;
        sum += v;
    }
    r.average = sum / static_cast<double>(counts.size());
    return r;
}

ThroughputReport compute_throughput(const EventLog& log, const MetricsContext& ctx) {
    ThroughputReport r;
    const auto hops = collect_hops(log);
    std::map<std::pair<bool, int>, std::array<std::int64_t, 3>> flows;  // busy chips, delivered, hops
    std::int64_t delivered = 0;
    for (const auto& [key, h] : hops) {
        if (!complete(h)) continue;
        auto& f = flows[{key.second, h.flow}];
        f[0] += std::max<std::int64_t>(1, h.last_end - h.ready - ctx.preamble_chips);
        f[1] += h.ok ? 1 : 0;
        f[2] += 1;
        delivered += h.ok ? 1 : 0;
    }
    for (const auto& [key, f] : flows) {
        const double busy = static_cast<double>(f[0]) / ctx.chip_rate;
        r.effective_bps += ctx.payload_bits * static_cast<double>(f[1]) / busy;
        r.offered_bps += ctx.payload_bits * static_cast<double>(f[2]) / busy;
    }
    r.makespan_s = static_cast<double>(log.last_chip() - log.first_chip()) / ctx.chip_rate;
    if (r.makespan_s > 0) r.makespan_bps = ctx.payload_bits * static_cast<double>(delivered) / r.makespan_s;
    return r;
}

std::optional<double> compute_latency(const EventLog& log, const MetricsContext& ctx) {
    const auto hops = collect_hops(log);
    double sum = 0.0;
    std::int64_t n = 0, ok = 0;
    for (const auto& [key, h] : hops) {
        if (!complete(h)) continue;
        sum += static_cast<double>(h.last_end - h.ready - ctx.preamble_chips) / ctx.chip_rate;
        ++n;
        ok += h.ok ? 1 : 0;
    }
    if (n == 0 || ok == 0) return std::nullopt;
    // mean over packets, times n / ok expected sends per delivery
    return sum / static_cast<double>(ok);
}

std::optional<double> compute_energy(const EventLog& log, const MetricsContext& ctx) {
    const auto hops = collect_hops(log);
    const auto& m = ctx.energy;
    const double v = m.supply_voltage;
    std::map<int, std::vector<const HopRecord*>> by_sender;
    std::int64_t delivered = 0;
    for (const auto& [key, h] : hops) {
        if (key.second || !complete(h) || h.sender == kBaseStation) continue;
        by_sender[h.sender].push_back(&h);
        delivered += h.ok ? 1 : 0;
    }
    if (delivered == 0) return std::nullopt;
    double joules = 0.0;
    for (auto& [sender, list] : by_sender) {
        std::sort(list.begin(), list.end(), [](const HopRecord* a, const HopRecord* b) { return a->ready < b->ready; });
        std::int64_t prev_end = -1;
        for (const HopRecord* h : list) {
            const std::int64_t tx = std::max<std::int64_t>(0, h->tx_chips - h->attempts * ctx.preamble_chips);
            const std::int64_t listen = std::max<std::int64_t>(0, (h->last_end - h->ready) - h->tx_chips);
            joules += m.tx_current_ma * 1e-3 * v * static_cast<double>(tx) / ctx.chip_rate;
            joules += m.listen_current_ma * 1e-3 * v * static_cast<double>(listen) / ctx.chip_rate;
            if (prev_end >= 0 && h->ready > prev_end)
                joules += m.idle_current_ma * 1e-3 * v * static_cast<double>(h->ready - prev_end) / ctx.chip_rate;
            prev_end = std::max(prev_end, h->last_end);
        }
    }
    return joules / static_cast<double>(delivered);
}

std::vector<double> e2e_latencies(const EventLog& log) {
    const auto hops = collect_hops(log);
    std::vector<double> out;
    for (const auto& [key, h] : hops) {
        if (!key.second || !h.ok) continue;
        auto up = hops.find({key.first, false});
        if (up == hops.end() || !up->second.ok || up->second.first_tx < 0) continue;
        // from the moment the sender had the packet, so MAC waits count
        out.push_back(log.time_of(h.ok_chip - up->second.ready));
    }
    return out;
}

double shannon_bitrate_ratio(double bandwidth_hz, double snr_ratio) {
    if (!(bandwidth_hz > 0)) throw std::invalid_argument("bandwidth must be positive");
    if (snr_ratio < 0) throw std::invalid_argument("snr ratio must be non-negative");
    return bandwidth_hz * std::log2(1.0 + snr_ratio);
}

double shannon_bitrate(double bandwidth_hz, double snr_db) {
    return shannon_bitrate_ratio(bandwidth_hz, std::pow(10.0, snr_db / 10.0));
}

double spread_bitrate_ratio(double bandwidth_hz, double snr_ratio, int chips_per_bit) {
    if (chips_per_bit < 1) throw std::invalid_argument("spreading factor must be at least 1");
    return shannon_bitrate_ratio(bandwidth_hz, snr_ratio) / chips_per_bit;
}

double spread_bitrate(double bandwidth_hz, double snr_db, int chips_per_bit) {
    return spread_bitrate_ratio(bandwidth_hz, std::pow(10.0, snr_db / 10.0), chips_per_bit);
}

std::int64_t scalability_estimate(const ScalabilityInput& in) {
    if (in.channels < 1 || in.subcarriers_per_channel < 1 || in.sensors_per_subcarrier < 1 || in.airtime_us < 1 ||
        in.packets_per_day < 1)
        throw std::invalid_argument("scalability inputs must be positive");
    constexpr std::int64_t us_per_day = 86400LL * 1000000LL;
    const std::int64_t per_subcarrier = in.sensors_per_subcarrier * us_per_day / (in.packets_per_day * in.airtime_us);
    const std::int64_t total = per_subcarrier * in.subcarriers_per_channel * in.channels;
    return in.paired ? total / 2 : total;
}

namespace {

nlohmann::ordered_json cdr_json(const CdrReport& c) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (const auto& [sc, v] : c.per_subcarrier) per[std::to_string(sc)] = v;
    j["per_subcarrier"] = per;
    j["average"] = c.average ? nlohmann::ordered_json(*c.average) : nlohmann::ordered_json(nullptr);
    j["transmitted"] = c.transmitted;
    j["delivered"] = c.delivered;
    return j;
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string num(const std::optional<double>& v) {
    if (!v) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", *v);
    return buf;
}

}  // namespace

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["system"] = system;
    j["subcarriers"] = subcarriers;
    j["sensors_per_subcarrier"] = sensors_per_subcarrier;
    j["sensors"] = sensors;
    j["packets_per_sensor"] = packets_per_sensor;
    j["repetitions"] = repetitions;
    j["seed"] = seed;
    j["snr_db"] = snr_db;
    j["noise"] = noise;
    j["cdr"] = cdr_json(cdr);
    if (scenario == "p2p") {
        j["uplink_cdr"] = cdr_json(uplink_cdr);
        j["downlink_cdr"] = cdr_json(downlink_cdr);
    }
    j["throughput_bps"] = throughput.effective_bps;
    j["throughput_offered_bps"] = throughput.offered_bps;
    j["throughput_makespan_bps"] = throughput.makespan_bps;
    j["makespan_s"] = throughput.makespan_s;
    j["latency_s"] = opt_json(latency_s);
    j["energy_j"] = opt_json(energy_j);
    if (scenario == "p2p") {
        j["e2e_mean_s"] = opt_json(e2e_mean_s);
        j["e2e_s"] = e2e_s;
    }
    return j.dump(2);
}

std::string MetricsReport::csv_header() {
    return "scenario,system,subcarriers,sensors_per_subcarrier,sensors,packets_per_sensor,repetitions,seed,snr_db,"
           "cdr_avg,transmitted,delivered,throughput_bps,throughput_offered_bps,throughput_makespan_bps,latency_s,"
           "energy_j,e2e_mean_s";
}

std::string MetricsReport::to_csv_row() const {
    std::ostringstream o;
    o << scenario << ',' << system << ',' << subcarriers << ',' << sensors_per_subcarrier << ',' << sensors << ','
      << packets_per_sensor << ',' << repetitions << ',' << seed << ',' << num(snr_db) << ',' << num(cdr.average)
      << ',' << cdr.transmitted << ',' << cdr.delivered << ',' << num(throughput.effective_bps) << ','
      << num(throughput.offered_bps) << ',' << num(throughput.makespan_bps) << ',' << num(latency_s) << ','
      << num(energy_j) << ',' << num(e2e_mean_s);
    return o.str();
}

void fill_metrics(MetricsReport& r, const EventLog& log, const MetricsContext& ctx) {
    r.cdr = compute_cdr(log);
    r.throughput = compute_throughput(log, ctx);
    r.latency_s = compute_latency(log, ctx);
    r.energy_j = compute_energy(log, ctx);
    if (r.scenario != "p2p") return;
    r.uplink_cdr = compute_cdr(log, Hop::uplink);
    r.downlink_cdr = compute_cdr(log, Hop::downlink);
    r.e2e_s = e2e_latencies(log);
    if (r.e2e_s.empty()) return;
    double mean = 0.0;
    for (double x : r.e2e_s) mean += x;
    mean /= static_cast<double>(r.e2e_s.size());
    // Lost packets are resent on the hop that lost them.
    auto extra = [&](const CdrReport& c) {
        if (c.transmitted == 0 || c.delivered == 0) return 0.0;
        const double p = static_cast<double>(c.delivered) / static_cast<double>(c.transmitted);
        return ctx.airtime_s * (1.0 / p - 1.0);
    };
    r.e2e_mean_s = mean + extra(r.uplink_cdr) + extra(r.downlink_cdr);
}

}  // namespace msnow
