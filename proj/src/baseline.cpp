#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <random>
#include <tuple>

#include "msnow/netsim.hpp"
#include "msnow/rng.hpp"

namespace msnow {

namespace {

enum : std::uint64_t { kTagReady = 11, kTagBackoff = 12 };

struct Delivered {
    int sender = 0;
    int subcarrier = 0;
    std::int64_t packet_id = 0;
    std::int64_t end = 0;
};

struct Station {
    int id = 0;
    int seq = 0;
    std::int64_t ready = 0;
    bool fresh = true;  // the current packet has not been logged as ready yet
    std::mt19937_64 rng;
};

class Timing {
public:
    Timing(const ScenarioConfig& cfg)
        : frame(cfg.frame_chips()),
          gap(std::llround(cfg.interval_min_s * cfg.subcarrier_bw_hz), std::llround(cfg.interval_max_s * cfg.subcarrier_bw_hz)),
          aligned(cfg.chip_aligned) {
        const double airtime = cfg.airtime_s() * cfg.subcarrier_bw_hz;
        wi = std::max<std::int64_t>(1, std::llround(cfg.backoff_initial * airtime));
        wc = std::max<std::int64_t>(1, std::llround(cfg.backoff_congestion * airtime));
    }
    std::int64_t first_ready(std::mt19937_64& r) { return aligned ? 0 : gap(r); }
    std::int64_t next_ready(std::mt19937_64& r, std::int64_t end) { return end + (aligned ? 0 : gap(r)); }
    std::int64_t initial(std::mt19937_64& r) { return std::uniform_int_distribution<std::int64_t>(0, wi - 1)(r); }
    std::int64_t congestion(std::mt19937_64& r) { return std::uniform_int_distribution<std::int64_t>(0, wc - 1)(r); }

    std::int64_t frame;
    std::uniform_int_distribution<std::int64_t> gap;
    bool aligned;
    std::int64_t wi = 1, wc = 1;
};

// CSMA/CA on one subcarrier. Carrier sensing is instantaneous and perfect, so
// frames only collide when two sensors sense the idle channel on the same chip;
// both are lost and retried after a fresh initial back-off. Sensors that find
// the channel busy queue in the order they sensed it. When a frame ends the
// head of that queue draws a congestion back-off and the channel is held for
// it, so deferred sensors are served in turn rather than captured by whoever
// becomes ready next.
std::vector<Delivered> csma_subcarrier(const std::vector<int>& ids, int subcarrier, const ScenarioConfig& cfg, int rep,
                                       EventLog& log) {
    Timing tm(cfg);
    std::vector<Station> st(ids.size());
    enum Kind : int { kRelease = 0, kGrant = 1, kSense = 2 };
    using Item = std::tuple<std::int64_t, int, std::size_t>;  // time, kind, station
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        st[i].id = ids[i];
        st[i].rng.seed(derive_seed(cfg.rng_seed, {kTagBackoff, static_cast<std::uint64_t>(rep),
                                                   static_cast<std::uint64_t>(ids[i])}));
        st[i].ready = tm.first_ready(st[i].rng);
        q.push({st[i].ready + tm.initial(st[i].rng), kSense, i});
    }
    std::vector<Delivered> out;
    std::deque<std::size_t> deferred;
    std::int64_t busy_until = 0;
    std::vector<std::size_t> group;

    const auto transmit = [&](std::int64_t t, const std::vector<std::size_t>& senders) {
        const bool collided = senders.size() > 1;
        const std::int64_t end = t + tm.frame;
        busy_until = std::max(busy_until, end);
        q.push({end, kRelease, 0});
        for (auto i : senders) {
            auto& s = st[i];
            const std::int64_t pid = make_packet_id(rep, s.id, s.seq);
            if (s.fresh) log.add(s.ready, s.id, subcarrier, EventKind::ready, pid);
            s.fresh = false;
            log.add(t, s.id, subcarrier, EventKind::tx_start, pid);
            log.add(end, s.id, subcarrier, EventKind::tx_end, pid);
            log.add(end, s.id, subcarrier, collided ? EventKind::decode_fail : EventKind::decode_ok, pid);
            if (collided) {
                q.push({end + tm.initial(s.rng), kSense, i});
                continue;
            }
            out.push_back({s.id, subcarrier, pid, end});
            if (++s.seq >= cfg.packets_per_sensor) continue;
            s.fresh = true;
            s.ready = tm.next_ready(s.rng, end);
            q.push({s.ready + tm.initial(s.rng), kSense, i});
        }
    };

    while (!q.empty()) {
        const auto [t, kind, who] = q.top();
        q.pop();
        if (kind == kRelease) {
            if (t < busy_until || deferred.empty()) continue;
            const std::size_t head = deferred.front();
            deferred.pop_front();
            const std::int64_t at = t + tm.congestion(st[head].rng);
            busy_until = at + tm.frame;
            q.push({at, kGrant, head});
            continue;
        }
        if (kind == kGrant) {
            transmit(t, {who});
            continue;
        }
        group.assign(1, who);
        while (!q.empty() && std::get<0>(q.top()) == t && std::get<1>(q.top()) == kSense) {
            group.push_back(std::get<2>(q.top()));
            q.pop();
        }
        std::sort(group.begin(), group.end());
        if (t < busy_until) {
            for (auto i : group) deferred.push_back(i);
            continue;
        }
        transmit(t, group);
    }
    return out;
}

struct Pending {
    std::int64_t ready = 0;
    int receiver = 0;
    std::int64_t packet_id = 0;
};

// The base station serves one receiver per subcarrier at a time, cycling over
// receivers in id order and skipping those with nothing queued.
void round_robin_subcarrier(std::vector<Pending> jobs, int subcarrier, std::int64_t frame, EventLog& log) {
    std::stable_sort(jobs.begin(), jobs.end(), [](const Pending& a, const Pending& b) { return a.ready < b.ready; });
    std::map<int, std::queue<Pending>> queues;
    for (const auto& j : jobs) queues[j.receiver];
    std::size_t next_job = 0;
    std::int64_t t = 0;
    int last = -1;
    std::size_t left = jobs.size();
    while (left > 0) {
        while (next_job < jobs.size() && jobs[next_job].ready <= t) {
            queues[jobs[next_job].receiver].push(jobs[next_job]);
            ++next_job;
        }
        auto scan = queues.upper_bound(last);
        bool found = false;
        for (std::size_t k = 0; k < queues.size(); ++k) {
            if (scan == queues.end()) scan = queues.begin();
            if (!scan->second.empty()) {
                found = true;
                break;
            }
            ++scan;
        }
        if (!found) {
            t = std::max(t, jobs[next_job].ready);
            continue;
        }
        const Pending p = scan->second.front();
        scan->second.pop();
        last = scan->first;
        log.add(p.ready, kBaseStation, subcarrier, EventKind::ready, p.packet_id);
        log.add(t, kBaseStation, subcarrier, EventKind::tx_start, p.packet_id);
        log.add(t + frame, kBaseStation, subcarrier, EventKind::tx_end, p.packet_id);
        log.add(t + frame, p.receiver, subcarrier, EventKind::rx_ok, p.packet_id);
        t += frame;
        --left;
    }
}

// Closed-loop downlink traffic: the next packet for a sensor is queued a random
// interval after the previous one was delivered.
void downlink_subcarrier(const std::vector<int>& ids, int subcarrier, const ScenarioConfig& cfg, int rep, EventLog& log) {
    Timing tm(cfg);
    std::vector<std::mt19937_64> rng;
    std::vector<std::int64_t> ready;
    std::vector<int> seq(ids.size(), 0);
    for (int id : ids) {
        rng.emplace_back(derive_seed(cfg.rng_seed, {kTagReady, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(id)}));
        ready.push_back(tm.first_ready(rng.back()));
    }
    std::int64_t t = 0;
    std::size_t last = ids.size() - 1;
    while (true) {
        std::size_t pick = ids.size();
        std::int64_t soonest = -1;
        for (std::size_t k = 1; k <= ids.size(); ++k) {
            const std::size_t i = (last + k) % ids.size();
            if (seq[i] >= cfg.packets_per_sensor) continue;
            if (ready[i] <= t) {
                pick = i;
                break;
            }
            if (soonest < 0 || ready[i] < soonest) soonest = ready[i];
        }
        if (pick == ids.size()) {
            if (soonest < 0) break;
            t = soonest;
            continue;
        }
        const std::int64_t pid = make_packet_id(rep, ids[pick], seq[pick]);
        log.add(ready[pick], kBaseStation, subcarrier, EventKind::ready, pid);
        log.add(t, kBaseStation, subcarrier, EventKind::tx_start, pid);
        log.add(t + tm.frame, kBaseStation, subcarrier, EventKind::tx_end, pid);
        log.add(t + tm.frame, ids[pick], subcarrier, EventKind::rx_ok, pid);
        t += tm.frame;
        ready[pick] = tm.next_ready(rng[pick], t);
        ++seq[pick];
        last = pick;
    }
}

}  // namespace

ScenarioResult run_snow_baseline(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto plan = cfg.plan();
    std::vector<EventLog> logs(static_cast<std::size_t>(cfg.repetitions), EventLog(cfg.subcarrier_bw_hz));
    int sensors = 0;
    if (cfg.kind == ScenarioKind::p2p) {
        const auto layout = make_p2p_layout(plan, cfg.pairs);
        validate_p2p_layout(layout, plan);
        sensors = 2 * cfg.pairs;
        const std::int64_t fwd = std::llround(cfg.forwarding_delay_s * cfg.subcarrier_bw_hz);
        std::map<int, int> peer;
        for (std::size_t i = 0; i < layout.senders.size(); ++i) peer[layout.senders[i].id] = static_cast<int>(i);
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
            auto& log = logs[static_cast<std::size_t>(rep)];
            std::map<int, std::vector<int>> up;
            for (const auto& s : layout.senders) up[s.subcarrier_index].push_back(s.id);
            std::map<int, std::vector<Pending>> down;
            for (const auto& [sc, ids] : up) {
                for (const auto& d : csma_subcarrier(ids, sc, cfg, rep, log)) {
                    const auto& rx = layout.receivers[static_cast<std::size_t>(peer[d.sender])];
                    down[rx.subcarrier_index].push_back({d.end + fwd, rx.id, d.packet_id});
                }
            }
            for (auto& [sc, jobs] : down) round_robin_subcarrier(std::move(jobs), sc, cfg.frame_chips(), log);
        }
    } else {
        const auto profiles = assign_pn_sequences(plan, cfg.sensors_per_subcarrier);
        sensors = static_cast<int>(profiles.size());
        std::map<int, std::vector<int>> by_sc;
        for (const auto& p : profiles) by_sc[p.subcarrier_index].push_back(p.id);
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
            auto& log = logs[static_cast<std::size_t>(rep)];
            for (const auto& [sc, ids] : by_sc) {
                if (cfg.kind == ScenarioKind::uplink) csma_subcarrier(ids, sc, cfg, rep, log);
                else downlink_subcarrier(ids, sc, cfg, rep, log);
            }
        }
    }
    EventLog all(cfg.subcarrier_bw_hz);
    std::int64_t offset = 0;
    for (auto& l : logs) {
        l.finalize();
        all.append(l, offset);
        offset += l.last_chip() + 1;
    }
    MetricsReport r;
    r.scenario = to_string(cfg.kind);
    r.system = "snow";
    r.subcarriers = static_cast<int>(plan.size());
    r.sensors_per_subcarrier = cfg.sensors_per_subcarrier;
    r.sensors = sensors;
    r.packets_per_sensor = cfg.packets_per_sensor;
    r.repetitions = cfg.repetitions;
    r.seed = cfg.rng_seed;
    r.snr_db = cfg.snr_db;
    r.noise = cfg.noise;
    ScenarioResult res{std::move(all), std::move(r)};
    fill_metrics(res.report, res.log, cfg.metrics_context());
    return res;
}

}  // namespace msnow
