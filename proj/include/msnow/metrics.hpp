#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace msnow {

enum class EventKind { ready, tx_start, tx_end, decode_ok, decode_fail, rx_ok, rx_fail };

const char* to_string(EventKind k);

// Node 0 is the base station; sensors are numbered from 1.
inline constexpr int kBaseStation = 0;

struct Event {
    std::int64_t chip = 0;
    int node = 0;
    int subcarrier = 0;
    EventKind kind = EventKind::ready;
    std::int64_t packet_id = 0;
};

// Times are kept in chips so ordering and equality are exact.
class EventLog {
public:
    explicit EventLog(double chip_rate = 400e3) : chip_rate_(chip_rate) {}

    void add(std::int64_t chip, int node, int subcarrier, EventKind kind, std::int64_t packet_id) {
        events_.push_back({chip, node, subcarrier, kind, packet_id});
    }
    // Stable order by time, then by kind so a packet's events keep their causal order.
    void finalize();
    void append(const EventLog& other, std::int64_t chip_offset);

    const std::vector<Event>& events() const { return events_; }
    double chip_rate() const { return chip_rate_; }
    double time_of(std::int64_t chip) const { return static_cast<double>(chip) / chip_rate_; }
    std::int64_t first_chip() const;
    std::int64_t last_chip() const;

    std::string to_csv() const;
    void write_csv(const std::string& path) const;

private:
    double chip_rate_;
    std::vector<Event> events_;
};

struct EnergyModel {
    double tx_current_ma = 17.5;
    double idle_current_ma = 0.5;
    double sleep_current_ua = 0.2;
    double supply_voltage = 3.0;
    // Current while sensing the channel during back-off.
    double listen_current_ma = 17.5;

    void validate() const;
};

// What the metrics need to know about the packets in a log.
struct MetricsContext {
    double chip_rate = 400e3;
    std::int64_t preamble_chips = 56;  // carried on air, left out of airtime figures
    int payload_bits = 224;
    double airtime_s = 5.6e-3;
    EnergyModel energy;
};

struct CdrReport {
    std::map<int, double> per_subcarrier;  // percent; subcarriers with no packets are absent
    std::optional<double> average;
    std::int64_t transmitted = 0;
    std::int64_t delivered = 0;
};

enum class Hop { any, uplink, downlink };

// Outcomes of every transmission attempt, uplink (decode_*) and downlink (rx_*).
CdrReport compute_cdr(const EventLog& log, Hop hop = Hop::any);

struct ThroughputReport {
    double effective_bps = 0.0;  // delivered payload bits over each sender's busy time, summed over senders
    double offered_bps = 0.0;    // same with every transmitted packet counted
    double makespan_bps = 0.0;   // delivered payload bits over the log span
    double makespan_s = 0.0;
};

ThroughputReport compute_throughput(const EventLog& log, const MetricsContext& ctx);

// Mean time from ready to the end of the frame (airtime convention), scaled by
// 1 / CDR for the expected retransmissions of lost packets.
std::optional<double> compute_latency(const EventLog& log, const MetricsContext& ctx);

// Sensor energy over tx, listen and idle states, per delivered packet.
std::optional<double> compute_energy(const EventLog& log, const MetricsContext& ctx);

// Per delivered forwarded packet: sender ready to receiver rx_ok.
std::vector<double> e2e_latencies(const EventLog& log);

double shannon_bitrate(double bandwidth_hz, double snr_db);
double shannon_bitrate_ratio(double bandwidth_hz, double snr_ratio);
double spread_bitrate(double bandwidth_hz, double snr_db, int chips_per_bit);
double spread_bitrate_ratio(double bandwidth_hz, double snr_ratio, int chips_per_bit);

struct ScalabilityInput {
    std::int64_t channels = 1;
    std::int64_t subcarriers_per_channel = 29;
    std::int64_t sensors_per_subcarrier = 9;
    std::int64_t airtime_us = 2000;
    std::int64_t packets_per_day = 140;
    bool paired = false;  // uplink and downlink share the airtime
};

std::int64_t scalability_estimate(const ScalabilityInput& in);

struct MetricsReport {
    std::string scenario;
    std::string system = "msnow";
    int subcarriers = 0;
    int sensors_per_subcarrier = 0;
    int sensors = 0;
    int packets_per_sensor = 0;
    int repetitions = 0;
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    bool noise = true;

    CdrReport cdr;
    CdrReport uplink_cdr;    // p2p only
    CdrReport downlink_cdr;  // p2p only
    ThroughputReport throughput;
    std::optional<double> latency_s;
    std::optional<double> energy_j;
    std::vector<double> e2e_s;
    std::optional<double> e2e_mean_s;  // adjusted for lost packets on both hops

    std::string to_json() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

// Fills the metric fields of a report from a finished log.
void fill_metrics(MetricsReport& r, const EventLog& log, const MetricsContext& ctx);

}  // namespace msnow
