#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msnow/metrics.hpp"
#include "msnow/phy.hpp"
#include "msnow/pnseq.hpp"
#include "msnow/spreadcodec.hpp"

namespace msnow {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Role { sensor, base_station };

struct NodeProfile {
    int id = 0;
    int subcarrier_index = 0;
    int pn_index = 0;  // position in the subcarrier's PN set
    PnSequence pn;
    Role role = Role::sensor;
    double tx_power_dbm = 0.0;
    double rx_sensitivity_dbm = -85.0;
};

enum class ScenarioKind { uplink, downlink, p2p };

const char* to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(const std::string& s);

inline constexpr int kMaxPerSubcarrier = 9;
inline constexpr int kMaxPairs = 25;

struct ScenarioConfig {
    double band_start_hz = 547.0e6;
    double band_end_hz = 547.8e6;  // three subcarriers
    double subcarrier_bw_hz = 400e3;
    double overlap = 0.5;
    int subcarriers = 0;  // when set, band_end follows from band_start
    int sensors_per_subcarrier = 9;
    int packets_per_sensor = 100;
    int packet_size_bytes = 40;  // header and payload; the preamble byte rides on top
    double interval_min_s = 0.0;
    double interval_max_s = 3e-3;
    double snr_db = 6.0;
    bool noise = true;
    std::uint64_t rng_seed = 1;
    ScenarioKind kind = ScenarioKind::uplink;
    int repetitions = 1;
    double tx_power_dbm = 0.0;
    double rx_sensitivity_dbm = -85.0;
    // Every sensor of a subcarrier starts at chip 0 and sends back to back.
    bool chip_aligned = false;
    int pairs = 5;
    double forwarding_delay_s = 4.73e-3;
    // SNOW baseline back-off windows, in packet airtimes.
    double backoff_initial = 0.51;
    double backoff_congestion = 0.75;
    EnergyModel energy;
    // Optional grid such as "sensors_per_subcarrier=1:9:1"; run commands then
    // produce one report per point.
    std::string sweep;

    SubcarrierPlan plan() const;
    PacketFormat format() const;
    MetricsContext metrics_context() const;
    double airtime_s() const;  // header and payload only
    std::int64_t frame_chips() const;
    void validate() const;
};

// Sensors in id order, subcarrier by subcarrier. Odd subcarriers take PNs1
// members in order, even ones PNs2, so neighbours never share a sequence.
std::vector<NodeProfile> assign_pn_sequences(const SubcarrierPlan& plan, int sensors_per_subcarrier);

// Packets for one sensor: start times separated by the frame time plus a
// uniform idle interval, random payload bytes. Deterministic in (seed, rep, id).
std::vector<Transmission> generate_traffic(const NodeProfile& profile, const ScenarioConfig& cfg, int rep = 0);

std::int64_t make_packet_id(int rep, int node, int seq);

struct P2pLayout {
    std::vector<NodeProfile> senders;
    std::vector<NodeProfile> receivers;  // receivers[i] is the peer of senders[i]
};

// Senders and receivers on disjoint subcarrier sets, at least five per used
// subcarrier once there are five pairs, at most nine.
P2pLayout make_p2p_layout(const SubcarrierPlan& plan, int pairs);
void validate_p2p_layout(const P2pLayout& layout, const SubcarrierPlan& plan);

struct RunOptions {
    Kernel kernel = Kernel::parallel;
    std::string dump_signal;  // first chunk of the first repetition, if set
};

struct ScenarioResult {
    EventLog log;
    MetricsReport report;
};

ScenarioResult run_uplink_convergecast(const ScenarioConfig& cfg, const RunOptions& opt = {});
ScenarioResult run_downlink(const ScenarioConfig& cfg, const RunOptions& opt = {});
ScenarioResult run_p2p(const ScenarioConfig& cfg, const RunOptions& opt = {});

// Existing SNOW for comparison: one decodable sensor per subcarrier at a
// time, CSMA/CA on the uplink, round-robin from the base station.
ScenarioResult run_snow_baseline(const ScenarioConfig& cfg);

ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

}  // namespace msnow
