#include "msnow/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "msnow/decoder.hpp"
#include "msnow/rng.hpp"

namespace msnow {

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::uplink: return "uplink";
        case ScenarioKind::downlink: return "downlink";
        case ScenarioKind::p2p: return "p2p";
    }
    return "?";
}

ScenarioKind parse_scenario_kind(const std::string& s) {
    if (s == "uplink") return ScenarioKind::uplink;
    if (s == "downlink") return ScenarioKind::downlink;
    if (s == "p2p") return ScenarioKind::p2p;
    throw ConfigError("scenario must be one of uplink, downlink, p2p (got '" + s + "')");
}

namespace {

constexpr std::int64_t kChunkChips = 16 * kNoiseBlockChips;

enum : std::uint64_t { kTagTraffic = 1, kTagNoiseUp = 2, kTagNoiseDown = 3, kTagBackoff = 4 };

const PnSet& set_for(int subcarrier_index) {
    static const PnSet odd = pns1();
    static const PnSet even = pns2();
    return subcarrier_index % 2 == 1 ? odd : even;
}

int chips_per_bit() { return static_cast<int>(set_for(1)[0].length()); }

}  // namespace

SubcarrierPlan ScenarioConfig::plan() const {
    try {
        const double end = subcarriers > 0 ? band_start_hz + (subcarriers + 1) * subcarrier_bw_hz * overlap : band_end_hz;
        return build_subcarrier_plan(band_start_hz, end, subcarrier_bw_hz, overlap);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("band plan: ") + e.what());
    }
}

PacketFormat ScenarioConfig::format() const {
    PacketFormat f;
    f.payload_bytes = packet_size_bytes - f.header_bytes;
    return f;
}

double ScenarioConfig::airtime_s() const {
    return static_cast<double>(format().airtime_bits()) * chips_per_bit() / subcarrier_bw_hz;
}

std::int64_t ScenarioConfig::frame_chips() const {
    return static_cast<std::int64_t>(format().total_bits()) * chips_per_bit();
}

MetricsContext ScenarioConfig::metrics_context() const {
    MetricsContext c;
    const auto f = format();
    c.chip_rate = subcarrier_bw_hz;
    c.preamble_chips = static_cast<std::int64_t>(f.preamble_bits()) * chips_per_bit();
    c.payload_bits = f.payload_bits();
    c.airtime_s = airtime_s();
    c.energy = energy;
    return c;
}

void ScenarioConfig::validate() const {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(sensors_per_subcarrier >= 1, "sensors_per_subcarrier must be at least 1");
    need(sensors_per_subcarrier <= kMaxPerSubcarrier,
         "sensors_per_subcarrier must be at most 9; more needs a MAC protocol that is out of scope");
    need(packets_per_sensor >= 1, "packets_per_sensor must be at least 1");
    need(packet_size_bytes > PacketFormat{}.header_bytes && packet_size_bytes <= 1024,
         "packet_size_bytes must be in [13, 1024]");
    need(interval_min_s >= 0 && interval_max_s >= 0, "interval bounds must be non-negative");
    need(interval_min_s <= interval_max_s, "interval_min_s must not exceed interval_max_s");
    need(repetitions >= 1, "repetitions must be at least 1");
    need(pairs >= 1 && pairs <= kMaxPairs, "pairs must be in [1, 25]");
    need(forwarding_delay_s >= 0, "forwarding_delay_s must be non-negative");
    need(backoff_initial > 0 && backoff_congestion > 0, "back-off windows must be positive");
    need(!std::isnan(snr_db), "snr_db must be a number");
    try {
        energy.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    const auto p = plan();
    need(p.size() >= 1, "band plan has no usable subcarrier");
}

std::vector<NodeProfile> assign_pn_sequences(const SubcarrierPlan& plan, int sensors_per_subcarrier) {
    if (sensors_per_subcarrier < 1) throw ConfigError("sensors_per_subcarrier must be at least 1");
    if (sensors_per_subcarrier > kMaxPerSubcarrier)
        throw ConfigError("more than 9 sensors on one subcarrier needs a MAC protocol that is out of scope");
    std::vector<NodeProfile> out;
    int id = 1;
    for (const auto& sc : plan.subcarriers) {
        const PnSet& set = set_for(sc.index);
        for (int j = 0; j < sensors_per_subcarrier; ++j) {
            NodeProfile p;
            p.id = id++;
            p.subcarrier_index = sc.index;
            p.pn_index = j;
            p.pn = set[static_cast<std::size_t>(j)];
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::int64_t make_packet_id(int rep, int node, int seq) {
    return static_cast<std::int64_t>(rep) * 1000000000LL + static_cast<std::int64_t>(node) * 100000LL + seq;
}

std::vector<Transmission> generate_traffic(const NodeProfile& profile, const ScenarioConfig& cfg, int rep) {
    std::mt19937_64 rng(derive_seed(cfg.rng_seed, {kTagTraffic, static_cast<std::uint64_t>(rep),
                                                    static_cast<std::uint64_t>(profile.id)}));
    const double rate = cfg.subcarrier_bw_hz;
    std::uniform_int_distribution<std::int64_t> gap(std::llround(cfg.interval_min_s * rate),
                                                    std::llround(cfg.interval_max_s * rate));
    std::uniform_int_distribution<int> byte(0, 255);
    const PacketFormat fmt = cfg.format();
    std::vector<Transmission> out;
    out.reserve(static_cast<std::size_t>(cfg.packets_per_sensor));
    std::int64_t t = cfg.chip_aligned ? 0 : gap(rng);
    for (int seq = 0; seq < cfg.packets_per_sensor; ++seq) {
        Packet p;
        p.preamble.assign(static_cast<std::size_t>(fmt.preamble_bytes), fmt.preamble_value);
        p.header.assign(static_cast<std::size_t>(fmt.header_bytes), 0);
        p.header[0] = static_cast<std::uint8_t>(profile.id >> 8);
        p.header[1] = static_cast<std::uint8_t>(profile.id);
        p.header[2] = static_cast<std::uint8_t>(profile.subcarrier_index);
        p.header[3] = static_cast<std::uint8_t>(profile.pn_index);
        for (int b = 0; b < 4; ++b) p.header[static_cast<std::size_t>(4 + b)] = static_cast<std::uint8_t>(seq >> (24 - 8 * b));
        p.header[8] = static_cast<std::uint8_t>(fmt.payload_bytes);
        p.payload.resize(static_cast<std::size_t>(fmt.payload_bytes));
        for (auto& v : p.payload) v = static_cast<std::uint8_t>(byte(rng));
        std::vector<std::uint8_t> body = p.header;
        body.insert(body.end(), p.payload.begin(), p.payload.end());
        whiten(body);
        std::copy(body.begin(), body.begin() + fmt.header_bytes, p.header.begin());
        std::copy(body.begin() + fmt.header_bytes, body.end(), p.payload.begin());
        Transmission tx;
        tx.sensor_id = profile.id;
        tx.subcarrier_index = profile.subcarrier_index;
        tx.pn = profile.pn;
        tx.chips = encode_packet(p, profile.pn);
        tx.start_chip = t;
        tx.power_dbm = profile.tx_power_dbm;
        tx.packet_id = make_packet_id(rep, profile.id, seq);
        t = tx.end_chip() + (cfg.chip_aligned ? 0 : gap(rng));
        out.push_back(std::move(tx));
    }
    return out;
}

P2pLayout make_p2p_layout(const SubcarrierPlan& plan, int pairs) {
    if (pairs < 1 || pairs > kMaxPairs) throw ConfigError("pairs must be in [1, 25]");
    const int used = (pairs + kMaxPerSubcarrier - 1) / kMaxPerSubcarrier;
    if (static_cast<int>(plan.size()) < 2 * used)
        throw ConfigError("p2p with " + std::to_string(pairs) + " pairs needs at least " + std::to_string(2 * used) +
                          " subcarriers");
    P2pLayout l;
    for (int i = 0; i < pairs; ++i) {
        NodeProfile s;
        s.id = i + 1;
        s.subcarrier_index = 1 + i % used;
        s.pn_index = i / used;
        s.pn = set_for(s.subcarrier_index)[static_cast<std::size_t>(s.pn_index)];
        NodeProfile r;
        r.id = pairs + i + 1;
        r.subcarrier_index = used + 1 + i % used;
        r.pn_index = i / used;
        r.pn = set_for(r.subcarrier_index)[static_cast<std::size_t>(r.pn_index)];
        l.senders.push_back(std::move(s));
        l.receivers.push_back(std::move(r));
    }
    return l;
}

void validate_p2p_layout(const P2pLayout& layout, const SubcarrierPlan& plan) {
    const auto pairs = static_cast<int>(layout.senders.size());
    if (pairs < 1 || pairs > kMaxPairs) throw ConfigError("pairs must be in [1, 25]");
    if (layout.receivers.size() != layout.senders.size()) throw ConfigError("every sender needs one receiver");
    std::map<int, int> up, down;
    for (const auto& s : layout.senders) {
        if (!plan.contains(s.subcarrier_index)) throw ConfigError("sender subcarrier outside the plan");
        ++up[s.subcarrier_index];
    }
    for (const auto& r : layout.receivers) {
        if (!plan.contains(r.subcarrier_index)) throw ConfigError("receiver subcarrier outside the plan");
        ++down[r.subcarrier_index];
    }
    for (const auto& [sc, n] : up)
        if (down.count(sc)) throw ConfigError("subcarrier " + std::to_string(sc) + " carries both senders and receivers");
    auto check = [&](const std::map<int, int>& m, const char* who) {
        for (const auto& [sc, n] : m) {
            if (n > kMaxPerSubcarrier)
                throw ConfigError(std::string("more than 9 ") + who + " on subcarrier " + std::to_string(sc));
            if (pairs >= 5 && n < 5)
                throw ConfigError(std::string("fewer than 5 ") + who + " on used subcarrier " + std::to_string(sc));
        }
    };
    check(up, "senders");
    check(down, "receivers");
    auto distinct = [](const std::vector<NodeProfile>& v) {
        std::map<std::pair<int, int>, int> seen;
        for (const auto& p : v)
            if (seen[{p.subcarrier_index, p.pn_index}]++) throw ConfigError("PN reused on one subcarrier");
    };
    distinct(layout.senders);
    distinct(layout.receivers);
}

namespace {

Bits bits_of(const Transmission& tx) {
    const int n = tx.chips.chips_per_bit;
    Bits out(tx.chips.bit_count());
    for (std::size_t b = 0; b < out.size(); ++b) {
        std::uint8_t any = 0;
        for (int c = 0; c < n; ++c) any |= tx.chips.chips[b * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
        out[b] = any;
    }
    return out;
}

std::int64_t span_end(const std::vector<Transmission>& txs) {
    std::int64_t end = 0;
    for (const auto& t : txs) end = std::max(end, t.end_chip());
    return end + 64;
}

using Rows = std::vector<std::vector<std::uint8_t>>;

// Base station side: synthesize every uplink signal, add noise and demux all
// subcarriers with the wideband FFT, one chunk at a time.
Rows uplink_rows(const std::vector<Transmission>& txs, const SubcarrierPlan& plan, const ScenarioConfig& cfg,
                 std::uint64_t noise_seed, const RunOptions& opt, bool dump) {
    const auto geo = make_geometry(plan);
    const std::int64_t end = span_end(txs);
    Rows rows(plan.size(), std::vector<std::uint8_t>(static_cast<std::size_t>(end), 0));
    for (std::int64_t c0 = 0; c0 < end; c0 += kChunkChips) {
        const std::int64_t n = std::min(kChunkChips, end - c0);
        ChipLevels levels(geo.rows, c0, n);
        accumulate_levels(txs, levels);
        auto sig = synthesize(levels, geo, 1.0, opt.kernel);
        if (cfg.noise) add_awgn_inplace(sig, cfg.snr_db, noise_seed);
        if (dump && c0 == 0) write_signal_dump(opt.dump_signal, sig);
        const auto res = gfft_demux(sig, plan, DemuxOptions{true, opt.kernel});
        for (int r = 0; r < geo.rows; ++r) {
            const auto src = res.levels.row(r);
            std::copy(src.begin(), src.end(), rows[static_cast<std::size_t>(r)].begin() + c0);
        }
    }
    return rows;
}

// Sensor side: the base station's composite is received once per subcarrier
// with a single-bin correlator, so co-subcarrier sensors see the same noise.
Rows downlink_rows(const std::vector<Transmission>& txs, const SubcarrierPlan& plan, const ScenarioConfig& cfg,
                   std::uint64_t noise_seed, const RunOptions& opt, bool dump, const std::vector<int>& wanted) {
    const auto geo = make_geometry(plan);
    const std::int64_t end = span_end(txs);
    Rows rows(plan.size());
    for (int sc : wanted) rows[static_cast<std::size_t>(sc - 1)].assign(static_cast<std::size_t>(end), 0);
    for (std::int64_t c0 = 0; c0 < end; c0 += kChunkChips) {
        const std::int64_t n = std::min(kChunkChips, end - c0);
        ChipLevels levels(geo.rows, c0, n);
        accumulate_levels(txs, levels);
        auto sig = synthesize_downlink(levels, plan, opt.kernel);
        if (cfg.noise) add_awgn_inplace(sig, cfg.snr_db, noise_seed);
        if (dump && c0 == 0) write_signal_dump(opt.dump_signal, sig);
        for (int sc : wanted) {
            const auto rss = single_bin_receive(sig, plan, sc, true);
            auto& row = rows[static_cast<std::size_t>(sc - 1)];
            for (std::size_t k = 0; k < rss.size(); ++k)
                row[static_cast<std::size_t>(c0) + k] = static_cast<std::uint8_t>(quantize_rss(rss[k]));
        }
    }
    return rows;
}

// Decodes every subcarrier row that carries traffic and marks which
// transmissions came out bit exact.
std::vector<bool> decode_rows(const Rows& rows, const std::vector<Transmission>& txs, const std::vector<int>& pn_index,
                              const ScenarioConfig& cfg) {
    const PacketFormat fmt = cfg.format();
    std::map<int, std::vector<std::size_t>> by_sc;
    for (std::size_t i = 0; i < txs.size(); ++i) by_sc[txs[i].subcarrier_index].push_back(i);
    std::vector<std::pair<int, std::vector<std::size_t>>> jobs(by_sc.begin(), by_sc.end());
    std::vector<bool> ok(txs.size(), false);
    DecoderConfig dc;
    dc.preamble_bits = fmt.preamble_bit_pattern();
    dc.packet_bits = fmt.total_bits();
    dc.detect_arrivals = !cfg.chip_aligned;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const int sc = jobs[j].first;
        const auto& idx = jobs[j].second;
        int codes_used = 0;
        for (auto i : idx) codes_used = std::max(codes_used, pn_index[i] + 1);
        const PnSet& set = set_for(sc);
        std::vector<PnSequence> codes(set.sequences.begin(), set.sequences.begin() + codes_used);
        SubcarrierDecoder dec(codes, dc);
        const auto& row = rows[static_cast<std::size_t>(sc - 1)];
        // Chip-aligned senders follow a fixed schedule the base station knows,
        // so arrivals are given rather than searched for.
        std::vector<KnownArrival> known;
        if (cfg.chip_aligned) {
            const std::int64_t frame = static_cast<std::int64_t>(fmt.total_bits()) * static_cast<std::int64_t>(set.sequences.front().length());
            for (int c = 0; c < codes_used; ++c)
                for (int m = 0; m < cfg.packets_per_sensor; ++m) known.push_back({c, m * frame});
        }
        const auto found = dec.decode(row, 0, known);
        std::map<std::pair<int, std::int64_t>, const DecodedPacket*> got;
        for (const auto& p : found) got[{p.code, p.start_chip}] = &p;
        for (auto i : idx) {
            auto it = got.find({pn_index[i], txs[i].start_chip});
            if (it != got.end() && it->second->complete && it->second->bits == bits_of(txs[i])) ok[i] = true;
        }
    }
    return ok;
}

void log_frame(EventLog& log, const Transmission& tx, int tx_node, int rx_node, std::int64_t ready, bool ok,
               bool downlink) {
    log.add(ready, tx_node, tx.subcarrier_index, EventKind::ready, tx.packet_id);
    log.add(tx.start_chip, tx_node, tx.subcarrier_index, EventKind::tx_start, tx.packet_id);
    log.add(tx.end_chip(), tx_node, tx.subcarrier_index, EventKind::tx_end, tx.packet_id);
    const EventKind outcome = downlink ? (ok ? EventKind::rx_ok : EventKind::rx_fail)
                                       : (ok ? EventKind::decode_ok : EventKind::decode_fail);
    log.add(tx.end_chip(), rx_node, tx.subcarrier_index, outcome, tx.packet_id);
}

MetricsReport base_report(const ScenarioConfig& cfg, const char* scenario, const char* system, int sensors) {
    MetricsReport r;
    r.scenario = scenario;
    r.system = system;
    r.subcarriers = static_cast<int>(cfg.plan().size());
    r.sensors_per_subcarrier = cfg.sensors_per_subcarrier;
    r.sensors = sensors;
    r.packets_per_sensor = cfg.packets_per_sensor;
    r.repetitions = cfg.repetitions;
    r.seed = cfg.rng_seed;
    r.snr_db = cfg.snr_db;
    r.noise = cfg.noise;
    return r;
}

template <class F>
EventLog run_reps(const ScenarioConfig& cfg, F&& one) {
    std::vector<EventLog> logs(static_cast<std::size_t>(cfg.repetitions), EventLog(cfg.subcarrier_bw_hz));
#pragma omp parallel for schedule(dynamic) if (cfg.repetitions > 1)
    for (int rep = 0; rep < cfg.repetitions; ++rep) logs[static_cast<std::size_t>(rep)] = one(rep);
    // Repetitions are laid end to end so the merged log stays time ordered.
    EventLog all(cfg.subcarrier_bw_hz);
    std::int64_t offset = 0;
    for (auto& l : logs) {
        l.finalize();
        all.append(l, offset);
        offset += l.last_chip() + 1;
    }
    return all;
}

}  // namespace

ScenarioResult run_uplink_convergecast(const ScenarioConfig& cfg, const RunOptions& opt) {
    cfg.validate();
    const auto plan = cfg.plan();
    const auto profiles = assign_pn_sequences(plan, cfg.sensors_per_subcarrier);
    EventLog log = run_reps(cfg, [&](int rep) {
        std::vector<Transmission> txs;
        std::vector<int> pn;
        for (const auto& p : profiles) {
            for (auto& t : generate_traffic(p, cfg, rep)) {
                txs.push_back(std::move(t));
                pn.push_back(p.pn_index);
            }
        }
        check_assignment(txs, plan);
        const auto seed = derive_seed(cfg.rng_seed, {kTagNoiseUp, static_cast<std::uint64_t>(rep)});
        const auto rows = uplink_rows(txs, plan, cfg, seed, opt, rep == 0 && !opt.dump_signal.empty());
        const auto ok = decode_rows(rows, txs, pn, cfg);
        EventLog l(cfg.subcarrier_bw_hz);
        for (std::size_t i = 0; i < txs.size(); ++i)
            log_frame(l, txs[i], txs[i].sensor_id, txs[i].sensor_id, txs[i].start_chip, ok[i], false);
        return l;
    });
    ScenarioResult res{log, base_report(cfg, "uplink", "msnow", static_cast<int>(profiles.size()))};
    fill_metrics(res.report, res.log, cfg.metrics_context());
    return res;
}

ScenarioResult run_downlink(const ScenarioConfig& cfg, const RunOptions& opt) {
    cfg.validate();
    const auto plan = cfg.plan();
    const auto profiles = assign_pn_sequences(plan, cfg.sensors_per_subcarrier);
    std::vector<int> wanted;
    for (const auto& sc : plan.subcarriers) wanted.push_back(sc.index);
    EventLog log = run_reps(cfg, [&](int rep) {
        std::vector<Transmission> txs;
        std::vector<int> pn;
        for (const auto& p : profiles) {
            for (auto& t : generate_traffic(p, cfg, rep)) {
                txs.push_back(std::move(t));
                pn.push_back(p.pn_index);
            }
        }
        const auto seed = derive_seed(cfg.rng_seed, {kTagNoiseDown, static_cast<std::uint64_t>(rep)});
        const auto rows = downlink_rows(txs, plan, cfg, seed, opt, rep == 0 && !opt.dump_signal.empty(), wanted);
        const auto ok = decode_rows(rows, txs, pn, cfg);
        EventLog l(cfg.subcarrier_bw_hz);
        for (std::size_t i = 0; i < txs.size(); ++i)
            log_frame(l, txs[i], kBaseStation, txs[i].sensor_id, txs[i].start_chip, ok[i], true);
        return l;
    });
    ScenarioResult res{log, base_report(cfg, "downlink", "msnow", static_cast<int>(profiles.size()))};
    fill_metrics(res.report, res.log, cfg.metrics_context());
    return res;
}

ScenarioResult run_p2p(const ScenarioConfig& cfg, const RunOptions& opt) {
    cfg.validate();
    const auto plan = cfg.plan();
    const auto layout = make_p2p_layout(plan, cfg.pairs);
    validate_p2p_layout(layout, plan);
    std::vector<int> down_sc;
    for (const auto& r : layout.receivers)
        if (std::find(down_sc.begin(), down_sc.end(), r.subcarrier_index) == down_sc.end())
            down_sc.push_back(r.subcarrier_index);
    const std::int64_t fwd = std::llround(cfg.forwarding_delay_s * cfg.subcarrier_bw_hz);
    EventLog log = run_reps(cfg, [&](int rep) {
        std::vector<Transmission> up;
        std::vector<int> up_pn, peer;
        for (std::size_t i = 0; i < layout.senders.size(); ++i) {
            for (auto& t : generate_traffic(layout.senders[i], cfg, rep)) {
                up.push_back(std::move(t));
                up_pn.push_back(layout.senders[i].pn_index);
                peer.push_back(static_cast<int>(i));
            }
        }
        check_assignment(up, plan);
        const auto seed_up = derive_seed(cfg.rng_seed, {kTagNoiseUp, static_cast<std::uint64_t>(rep)});
        const auto up_rows = uplink_rows(up, plan, cfg, seed_up, opt, rep == 0 && !opt.dump_signal.empty());
        const auto up_ok = decode_rows(up_rows, up, up_pn, cfg);

        // Store and forward: each receiver has a FIFO at the base station's Tx radio.
        std::vector<std::size_t> order(up.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return up[a].end_chip() < up[b].end_chip(); });
        std::vector<std::int64_t> free_at(layout.receivers.size(), 0);
        std::vector<Transmission> down;
        std::vector<int> down_pn;
        std::vector<std::int64_t> down_ready;
        for (auto i : order) {
            if (!up_ok[i]) continue;
            const auto& rx = layout.receivers[static_cast<std::size_t>(peer[i])];
            Transmission t;
            t.sensor_id = rx.id;
            t.subcarrier_index = rx.subcarrier_index;
            t.pn = rx.pn;
            t.chips = encode_bits(bits_of(up[i]), rx.pn);
            t.packet_id = up[i].packet_id;
            const std::int64_t ready = up[i].end_chip() + fwd;
            auto& f = free_at[static_cast<std::size_t>(peer[i])];
            t.start_chip = std::max(ready, f);
            f = t.end_chip();
            down_ready.push_back(ready);
            down_pn.push_back(rx.pn_index);
            down.push_back(std::move(t));
        }
        EventLog l(cfg.subcarrier_bw_hz);
        for (std::size_t i = 0; i < up.size(); ++i)
            log_frame(l, up[i], up[i].sensor_id, up[i].sensor_id, up[i].start_chip, up_ok[i], false);
        if (!down.empty()) {
            const auto seed_dn = derive_seed(cfg.rng_seed, {kTagNoiseDown, static_cast<std::uint64_t>(rep)});
            const auto dn_rows = downlink_rows(down, plan, cfg, seed_dn, opt, false, down_sc);
            const auto dn_ok = decode_rows(dn_rows, down, down_pn, cfg);
            for (std::size_t i = 0; i < down.size(); ++i)
                log_frame(l, down[i], kBaseStation, down[i].sensor_id, down_ready[i], dn_ok[i], true);
        }
        return l;
    });
    ScenarioResult res{log, base_report(cfg, "p2p", "msnow", 2 * cfg.pairs)};
    fill_metrics(res.report, res.log, cfg.metrics_context());
    return res;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
    switch (cfg.kind) {
        case ScenarioKind::uplink: return run_uplink_convergecast(cfg, opt);
        case ScenarioKind::downlink: return run_downlink(cfg, opt);
        case ScenarioKind::p2p: return run_p2p(cfg, opt);
    }
    throw ConfigError("unknown scenario");
}

}  // namespace msnow
