#include "msnow/decoder.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <bitset>
#include <limits>
#include <map>
#include <stdexcept>
#ifdef MSNOW_DEBUG_DECODER
#include <cstdio>
#include <cstdlib>
#endif

namespace msnow {

namespace {

constexpr int kPos = SubcarrierDecoder::kMaxActive;
constexpr int kStates = 1 << kPos;
constexpr std::int32_t kInf = std::numeric_limits<std::int32_t>::max() / 4;

struct Slot {
    int code = -1;
    std::int64_t start = 0;
    int packet = -1;
};

struct Trellis {
    std::array<std::int32_t, kStates> cost{};
    std::int64_t offset = 0;  // absolute cost = offset + cost[state]
    std::array<Slot, kPos> slots{};
    std::uint32_t mask = 0;
};

struct Event {
    std::int64_t chip = 0;
    std::int32_t packet = -1;
    std::int16_t symbol = 0;  // -1 marks the end of a packet
    std::uint8_t pos = 0;
    std::bitset<kStates> surv;  // old bit of pos, indexed by new state with pos cleared
};

struct Snapshot {
    Trellis tr;
    std::size_t log_size = 0;
    std::int64_t chip = std::numeric_limits<std::int64_t>::min();
};

struct Adoption {
    std::vector<KnownArrival> choices;  // ranked, best first
    std::size_t next = 0;
    bool settled = false;
    std::int64_t trigger = 0;
    Snapshot base;
};

// popcount without relying on a hardware instruction
constexpr std::array<std::uint8_t, kStates> kOnes = [] {
    std::array<std::uint8_t, kStates> a{};
    for (std::size_t i = 1; i < a.size(); ++i) a[i] = static_cast<std::uint8_t>(a[i / 2] + (i & 1));
    return a;
}();

template <class F>
inline void for_subsets(std::uint32_t mask, F&& f) {
    std::uint32_t s = mask;
    while (true) {
        f(s);
        if (s == 0) break;
        s = (s - 1) & mask;
    }
}

class Run {
public:
    Run(const std::vector<PnSequence>& codes, const DecoderConfig& cfg, std::span<const std::uint8_t> row,
        std::int64_t first)
        : codes_(codes), cfg_(cfg), row_(row), first_(first), end_(first + static_cast<std::int64_t>(row.size())) {
        N_ = static_cast<int>(codes.front().length());
        packet_chips_ = static_cast<std::int64_t>(cfg.packet_bits) * N_;
        ring_.resize(static_cast<std::size_t>(std::max(cfg.search_back, cfg.wide_search_back) + 1));
    }

    void add_known(std::span<const KnownArrival> known) {
        for (const auto& a : known) arrivals_[a.start_chip].push_back(a.code);
    }

    std::vector<DecodedPacket> run() {
        Trellis tr;
        tr.cost.fill(kInf);
        tr.cost[0] = 0;
        std::int64_t cooldown = first_ - 1;
        std::map<std::int64_t, int> adopted_at;
        int retractions = 0;
        const auto R = static_cast<std::int64_t>(ring_.size());
        std::int64_t k = first_;
        while (k < end_) {
            auto& snap = ring_[static_cast<std::size_t>(k % R)];
            snap.tr = tr;
            snap.log_size = log_.size();
            snap.chip = k;
            apply_arrivals(tr, k, true);
            const std::int64_t before = tr.offset;
            const std::int32_t rise = step<true>(tr, k);
            if (cfg_.detect_arrivals && rise >= cfg_.trigger && k > cooldown && adopted_at[k] < 2 * kPos) {
                Adoption ad;
                if (search(k, before, ad.choices)) {
                    ++adopted_at[k];
                    ad.trigger = k;
                    std::int64_t base = k;
                    for (const auto& c : ad.choices) base = std::min(base, c.start_chip);
                    ad.base = ring_[static_cast<std::size_t>(base % R)];
                    adoptions_.push_back(std::move(ad));
                    k = adopt(tr);
                    continue;
                }
                if (retractions < cfg_.max_retractions && retract(k)) {
#ifdef MSNOW_DEBUG_DECODER
                    std::fprintf(stderr, "retract k=%lld\n", (long long)k);
#endif
                    ++retractions;
                    k = adopt(tr);
                    cooldown = first_ - 1;
                    continue;
                }
                cooldown = k + N_;
            }
            ++k;
        }
        traceback(tr);
        std::vector<DecodedPacket> out;
        for (std::size_t i = 0; i < packets_.size(); ++i)
            if (live_[i]) out.push_back(std::move(packets_[i]));
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return a.start_chip != b.start_chip ? a.start_chip < b.start_chip : a.code < b.code;
        });
        return out;
    }

private:
    std::uint8_t chip_of(int code, std::int64_t k, std::int64_t start) const {
        return codes_[static_cast<std::size_t>(code)].bits[static_cast<std::size_t>((k - start) % N_)];
    }

    int packet_index(int code, std::int64_t start) {
        auto key = std::make_pair(code, start);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        const int idx = static_cast<int>(packets_.size());
        index_.emplace(key, idx);
        DecodedPacket p;
        p.code = code;
        p.start_chip = start;
        p.bits.assign(static_cast<std::size_t>(cfg_.packet_bits), 0);
        p.complete = start + packet_chips_ <= end_;
        packets_.push_back(std::move(p));
        live_.push_back(false);
        return idx;
    }

    // A code is busy at chip k if it holds a slot whose packet does not end at k.
    bool busy(const Trellis& t, int code, std::int64_t k) const {
        for (int p = 0; p < kPos; ++p)
            if ((t.mask >> p & 1) && t.slots[p].code == code && t.slots[p].start + packet_chips_ != k) return true;
        return false;
    }

    bool activate(Trellis& t, int code, std::int64_t k, bool main) {
        // a packet ending here frees its position first, so back-to-back frames fit with all codes on air
        for (int q = 0; q < kPos; ++q)
            if ((t.mask >> q & 1) && t.slots[q].start + packet_chips_ == k) {
                if (main) retire<true>(t, q, k);
                else retire<false>(t, q, k);
            }
        int p = 0;
        while (p < kPos && (t.mask >> p & 1)) ++p;
        if (p == kPos) return false;
        t.slots[p] = Slot{code, k, main ? packet_index(code, k) : -1};
        const std::uint32_t b = 1u << p;
        for_subsets(t.mask, [&](std::uint32_t s) { t.cost[s | b] = kInf; });
        t.mask |= b;
        return true;
    }

    void apply_arrivals(Trellis& t, std::int64_t k, bool main) {
        auto it = arrivals_.find(k);
        if (it == arrivals_.end()) return;
        for (int code : it->second) activate(t, code, k, main);
    }

    template <bool Record>
    void retire(Trellis& t, int p, std::int64_t k) {
        const std::uint32_t b = 1u << p;
        const std::uint32_t others = t.mask & ~b;
        Event ev;
        if constexpr (Record) {
            ev.chip = k;
            ev.pos = static_cast<std::uint8_t>(p);
            ev.packet = t.slots[p].packet;
        }
        for_subsets(others, [&](std::uint32_t u) {
            const std::int32_t c0 = t.cost[u], c1 = t.cost[u | b];
            const bool w = c1 < c0;
            t.cost[u] = w ? c1 : c0;
            t.cost[u | b] = kInf;
            if constexpr (Record) ev.surv[u] = w;
        });
        ev.symbol = -1;
        t.mask = others;
        t.slots[p] = Slot{};
        if constexpr (Record) log_.push_back(ev);
    }

    template <bool Record>
    std::int32_t step(Trellis& t, std::int64_t k) {
        const int pre_len = static_cast<int>(cfg_.preamble_bits.size());
        for (int p = 0; p < kPos; ++p) {
            if (!(t.mask >> p & 1)) continue;
            Slot& s = t.slots[p];
            const std::int64_t d = k - s.start;
            if (d % N_) continue;
            const auto sym = static_cast<int>(d / N_);
            const std::uint32_t b = 1u << p;
            const std::uint32_t others = t.mask & ~b;
            Event ev;
            if constexpr (Record) {
                ev.chip = k;
                ev.pos = static_cast<std::uint8_t>(p);
                ev.packet = s.packet;
            }
            if (sym == cfg_.packet_bits) {
                retire<Record>(t, p, k);
                continue;
            } else {
                const int forced = sym < pre_len ? cfg_.preamble_bits[static_cast<std::size_t>(sym)] : -1;
                for_subsets(others, [&](std::uint32_t u) {
                    const std::int32_t c0 = t.cost[u], c1 = t.cost[u | b];
                    const bool w = c1 < c0;
                    const std::int32_t best = w ? c1 : c0;
                    t.cost[u] = forced == 1 ? kInf : best;
                    t.cost[u | b] = forced == 0 ? kInf : best;
                    if constexpr (Record) ev.surv[u] = w;
                });
                ev.symbol = static_cast<std::int16_t>(sym);
            }
            if constexpr (Record) log_.push_back(ev);
        }

        std::uint32_t cm = 0;
        for (int p = 0; p < kPos; ++p)
            if ((t.mask >> p & 1) && chip_of(t.slots[p].code, k, t.slots[p].start)) cm |= 1u << p;
        const int r = row_[static_cast<std::size_t>(k - first_)];
        std::array<std::int32_t, kPos + 1> sq{};
        for (int c = 0; c <= kPos; ++c) sq[static_cast<std::size_t>(c)] = (r - c) * (r - c);
        // States using a position outside the mask sit at kInf, so a dense sweep is safe.
        const std::uint32_t S = 1u << std::bit_width(t.mask);
        std::int32_t mn = kInf;
        for (std::uint32_t u = 0; u < S; ++u) {
            const std::int32_t c = t.cost[u];
            const std::int32_t v = c >= kInf ? kInf : c + sq[kOnes[u & cm]];
            t.cost[u] = v;
            mn = std::min(mn, v);
        }
        if (mn >= kInf) throw std::logic_error("decoder trellis has no surviving state");
        for (std::uint32_t u = 0; u < S; ++u) {
            const std::int32_t c = t.cost[u];
            t.cost[u] = c >= kInf ? kInf : c - mn;
        }
        t.offset += mn;
        return mn;
    }

    // Latest known start of each code within [from, to], or from - 1 if none.
    // A code is already scheduled at o when its entry is >= o.
    std::vector<std::int64_t> scheduled(std::int64_t from, std::int64_t to) const {
        std::vector<std::int64_t> last(codes_.size(), from - 1);
        for (auto it = arrivals_.lower_bound(from); it != arrivals_.end() && it->first <= to; ++it)
            for (int c : it->second) last[static_cast<std::size_t>(c)] = it->first;
        return last;
    }

    struct Hypothesis {
        std::vector<KnownArrival> arrivals;
        std::int64_t fail = 0;  // first chip the replay is no longer consistent
        std::int64_t cost = 0;
        std::int64_t tail_first = 0;
        std::vector<Trellis> tail;  // states before each chip of [tail_first, fail]
    };

    std::int64_t earliest(const Hypothesis& h) const {
        std::int64_t o = h.arrivals.front().start_chip;
        for (const auto& a : h.arrivals) o = std::min(o, a.start_chip);
        return o;
    }

    // Replays chips [from, T] from state f with the hypothesized senders
    // switched on at their starts. Consistent means no costlier than the path
    // was just before the trigger. With keep > 0 the states before the last
    // keep + 1 chips are kept so extensions can branch without replaying.
    bool replay(Hypothesis& h, Trellis f, std::int64_t from, std::int64_t ref_cost, std::int64_t T, int keep) {
        // scratch reused across calls; most replays fail within a few chips
        if (keep > 0 && scratch_.size() < static_cast<std::size_t>(keep + 1)) scratch_.resize(static_cast<std::size_t>(keep + 1));
        auto& ring = scratch_;
        const std::int64_t K = keep > 0 ? keep + 1 : 0;
        h.fail = T + 1;
        std::int64_t t = from;
        for (; t <= T; ++t) {
            if (keep > 0) ring[static_cast<std::size_t>(t % K)] = f;
            apply_arrivals(f, t, false);
            for (const auto& a : h.arrivals) {
                if (a.start_chip != t) continue;
                if (busy(f, a.code, t) || !activate(f, a.code, t, false)) return false;
            }
            step<false>(f, t);
            if (f.offset > ref_cost + cfg_.tolerance) {
                h.fail = t;
                break;
            }
        }
        h.cost = f.offset;
        h.tail.clear();
        if (keep > 0) {
            const std::int64_t last = std::min(t, T);
            h.tail_first = std::max(from, last - keep);
            for (std::int64_t c = h.tail_first; c <= last; ++c) h.tail.push_back(ring[static_cast<std::size_t>(c % K)]);
        }
        return true;
    }

    bool evaluate(Hypothesis& h, std::int64_t ref_cost, std::int64_t T, int keep = 0) {
        const std::int64_t o = earliest(h);
        const auto R = static_cast<std::int64_t>(ring_.size());
        const auto& snap = ring_[static_cast<std::size_t>(o % R)];
        if (snap.chip != o) return false;
        return replay(h, snap.tr, o, ref_cost, T, keep);
    }

    // Ties go to the guess whose first arrival is nearest the trigger: a sender
    // that stayed hidden behind the others for many chips is the less likely one.
    bool better(const Hypothesis& a, const Hypothesis& b) const {
        if (a.fail != b.fail) return a.fail > b.fail;
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.arrivals.size() != b.arrivals.size()) return a.arrivals.size() < b.arrivals.size();
        const std::int64_t ea = earliest(a), eb = earliest(b);
        if (ea != eb) return ea > eb;
        for (std::size_t i = 0; i < a.arrivals.size(); ++i) {
            if (a.arrivals[i].start_chip != b.arrivals[i].start_chip)
                return a.arrivals[i].start_chip > b.arrivals[i].start_chip;
            if (a.arrivals[i].code != b.arrivals[i].code) return a.arrivals[i].code < b.arrivals[i].code;
        }
        return false;
    }

    auto by_rank() const {
        return [this](const Hypothesis& a, const Hypothesis& b) { return better(a, b); };
    }

    // Candidate arrivals are (code, offset) pairs in a window before the
    // trigger, scored by how long their replay stays consistent; wrong guesses
    // usually break within a few chips. Because packets can start a few chips
    // apart, the best guesses are extended with a second and third arrival near
    // their breaking point. Guesses that survive to the horizon are then
    // compared over longer horizons, up to a full packet, which separates a
    // sender from a copy of itself shifted by whole symbols. Only the earliest
    // arrival of the winner is adopted; the rest are found by later triggers.
    bool search(std::int64_t k, std::int64_t ref_cost, std::vector<KnownArrival>& choices) {
        const std::int64_t T = std::min(end_ - 1, k + cfg_.lookahead);
        std::vector<Hypothesis> pool;
        collect(k, ref_cost, T, cfg_.search_back, pool);
        if (pool.empty() || pool.front().fail <= T) {
            std::vector<Hypothesis> wide;
            collect(k, ref_cost, T, cfg_.wide_search_back, wide);
            pool.insert(pool.end(), wide.begin(), wide.end());
        }
        if (pool.empty()) return false;
        std::sort(pool.begin(), pool.end(), by_rank());
        Hypothesis best = pool.front();

        std::int64_t horizon = T;
        const std::int64_t limit = std::min(end_ - 1, earliest(best) + packet_chips_ + cfg_.lookahead);
        while (best.fail == horizon + 1 && horizon < limit) {
            std::vector<Hypothesis> tied;
            for (auto& h : pool)
                if (h.fail == horizon + 1 && tied.size() < static_cast<std::size_t>(cfg_.beam)) tied.push_back(h);
            if (tied.size() < 2) break;
            const std::int64_t longer = std::min(limit, k + 2 * (horizon - k + 1));
            for (auto& h : tied) evaluate(h, ref_cost, longer);
            std::sort(tied.begin(), tied.end(), by_rank());
            // A later sender breaks every guess, the right one included, so a
            // longer horizon only decides when someone survives all of it.
            if (tied.front().fail <= longer) break;
            horizon = longer;
            best = tied.front();
            pool = std::move(tied);
        }
        if (best.fail <= k) return false;
#ifdef MSNOW_DEBUG_DECODER
        if (std::getenv("DBG_K") && std::atoll(std::getenv("DBG_K")) == k)
            for (std::size_t i = 0; i < std::min<std::size_t>(pool.size(), 12); ++i) {
                std::fprintf(stderr, "  fail=%lld cost=%lld:", (long long)pool[i].fail, (long long)pool[i].cost);
                for (auto& a : pool[i].arrivals) std::fprintf(stderr, " %d@%lld", a.code, (long long)a.start_chip);
                std::fprintf(stderr, "\n");
            }
#endif
        for (const auto& h : pool) {
            if (h.fail <= k || choices.size() >= static_cast<std::size_t>(cfg_.choices)) break;
            KnownArrival e = h.arrivals.front();
            for (const auto& a : h.arrivals)
                if (a.start_chip < e.start_chip || (a.start_chip == e.start_chip && a.code < e.code)) e = a;
            const bool seen = std::any_of(choices.begin(), choices.end(), [&](const KnownArrival& c) {
                return c.code == e.code && c.start_chip == e.start_chip;
            });
            if (!seen) choices.push_back(e);
        }
#ifdef MSNOW_DEBUG_DECODER
        std::fprintf(stderr, "search k=%lld base=%lld best=%lld any=1 code=%d o=%lld n=%zu\n", (long long)k,
                     (long long)ref_cost, (long long)best.fail, choices.front().code,
                     (long long)choices.front().start_chip, best.arrivals.size());
#endif
        return true;
    }

    void collect(std::int64_t k, std::int64_t ref_cost, std::int64_t T, int back, std::vector<Hypothesis>& pool) {
        std::vector<Hypothesis> level;
        const std::int64_t lo = std::max(first_, k - back);
        const auto sched = scheduled(lo, T);
        for (std::int64_t o = lo; o <= k; ++o) {
            for (int j = 0; j < static_cast<int>(codes_.size()); ++j) {
                if (sched[static_cast<std::size_t>(j)] >= o) continue;
                Hypothesis h;
                h.arrivals.push_back({j, o});
                if (evaluate(h, ref_cost, T) && h.fail >= o) level.push_back(std::move(h));
            }
        }
        if (level.empty()) return;
        std::sort(level.begin(), level.end(), by_rank());
        const auto width = [&](const std::vector<Hypothesis>& v) {
            return std::min<std::size_t>(v.size(), static_cast<std::size_t>(cfg_.beam));
        };
        pool.insert(pool.end(), level.begin(), level.begin() + static_cast<std::ptrdiff_t>(width(level)));
        if (level.front().fail > T) return;

        const int near = 2 * cfg_.search_back;
        std::vector<Hypothesis> frontier(level.begin(), level.begin() + static_cast<std::ptrdiff_t>(width(level)));
        for (auto& h : frontier) evaluate(h, ref_cost, T, near);
        for (int depth = 1; depth < cfg_.max_joint && !frontier.empty(); ++depth) {
            std::vector<Hypothesis> next;
            const bool last = depth + 1 == cfg_.max_joint;
            for (const auto& h : frontier) {
                if (h.fail > T || h.tail.empty()) continue;
                const std::int64_t from = std::max(h.tail_first, h.fail - near);
                const auto sched = scheduled(from, T);
                for (std::int64_t o = from; o <= h.fail; ++o) {
                    const Trellis& base = h.tail[static_cast<std::size_t>(o - h.tail_first)];
                    for (int j = 0; j < static_cast<int>(codes_.size()); ++j) {
                        bool dup = false;
                        for (const auto& a : h.arrivals) dup |= a.code == j;
                        if (dup || sched[static_cast<std::size_t>(j)] >= o) continue;
                        Hypothesis g;
                        g.arrivals = h.arrivals;
                        g.arrivals.push_back({j, o});
                        if (replay(g, base, o, ref_cost, T, last ? 0 : near) && g.fail > h.fail)
                            next.push_back(std::move(g));
                    }
                }
            }
            std::sort(next.begin(), next.end(), by_rank());
            next.resize(width(next));
            for (auto& g : next) pool.push_back(Hypothesis{g.arrivals, g.fail, g.cost, 0, {}});
            frontier = std::move(next);
        }
    }

    // Switches the newest adoption to its current choice and rewinds the main
    // path to the earliest chip any of its choices could start at.
    std::int64_t adopt(Trellis& tr) {
        const Adoption& ad = adoptions_.back();
        const KnownArrival& a = ad.choices[ad.next];
        arrivals_[a.start_chip].push_back(a.code);
        tr = ad.base.tr;
        log_.resize(ad.base.log_size);
        return ad.base.chip;
    }

    void forget(const Adoption& ad) {
        const KnownArrival& a = ad.choices[ad.next];
        auto it = arrivals_.find(a.start_chip);
        auto& v = it->second;
        v.erase(std::find(v.begin(), v.end(), a.code));
        if (v.empty()) arrivals_.erase(it);
    }

    // An unexplained trigger shortly after an adoption usually means that
    // adoption was wrong. Undo it, and everything adopted after it, and move
    // on to its next choice. Once every choice has been tried the first one
    // is restored and kept.
    bool retract(std::int64_t k) {
        const std::int64_t window = cfg_.retract_window > 0 ? cfg_.retract_window : packet_chips_ + packet_chips_ / 2;
        auto it = std::find_if(adoptions_.rbegin(), adoptions_.rend(), [&](const Adoption& a) {
            return a.trigger >= k - window && !a.settled;
        });
        if (it == adoptions_.rend()) return false;
        const std::size_t keep = static_cast<std::size_t>(adoptions_.rend() - it) - 1;
        while (adoptions_.size() > keep + 1) {
            forget(adoptions_.back());
            adoptions_.pop_back();
        }
        Adoption& ad = adoptions_.back();
        forget(ad);
        if (++ad.next >= ad.choices.size()) {
            ad.next = 0;
            ad.settled = true;
        }
        return true;
    }

    void traceback(const Trellis& t) {
        std::uint32_t st = 0;
        std::int32_t mn = kInf;
        for_subsets(t.mask, [&](std::uint32_t u) {
            if (t.cost[u] < mn || (t.cost[u] == mn && u < st)) {
                mn = t.cost[u];
                st = u;
            }
        });
        for (auto it = log_.rbegin(); it != log_.rend(); ++it) {
            const std::uint32_t b = 1u << it->pos;
            const std::uint32_t idx = st & ~b;
            if (it->packet >= 0) live_[static_cast<std::size_t>(it->packet)] = true;
            if (it->symbol >= 0 && it->packet >= 0)
                packets_[static_cast<std::size_t>(it->packet)].bits[static_cast<std::size_t>(it->symbol)] =
                    static_cast<std::uint8_t>(st >> it->pos & 1);
            st = idx | (static_cast<std::uint32_t>(it->surv[idx]) << it->pos);
        }
    }

    const std::vector<PnSequence>& codes_;
    const DecoderConfig& cfg_;
    std::span<const std::uint8_t> row_;
    std::int64_t first_;
    std::int64_t end_;
    int N_ = 0;
    std::int64_t packet_chips_ = 0;
    std::vector<Trellis> scratch_;

    std::vector<Snapshot> ring_;
    std::vector<Event> log_;
    std::map<std::int64_t, std::vector<int>> arrivals_;
    std::map<std::pair<int, std::int64_t>, int> index_;
    std::vector<DecodedPacket> packets_;
    std::vector<bool> live_;
    std::vector<Adoption> adoptions_;
};

}  // namespace

SubcarrierDecoder::SubcarrierDecoder(std::vector<PnSequence> codes, DecoderConfig cfg)
    : codes_(std::move(codes)), cfg_(std::move(cfg)) {
    if (codes_.empty()) throw std::invalid_argument("decoder needs at least one code");
    if (codes_.size() > 64) throw std::invalid_argument("too many codes for one subcarrier");
    for (const auto& c : codes_)
        if (c.length() != codes_.front().length()) throw std::invalid_argument("codes differ in length");
    if (cfg_.packet_bits < 1) throw std::invalid_argument("packet must carry at least one bit");
    if (static_cast<int>(cfg_.preamble_bits.size()) > cfg_.packet_bits)
        throw std::invalid_argument("preamble longer than packet");
}

std::vector<DecodedPacket> SubcarrierDecoder::decode(std::span<const std::uint8_t> row, std::int64_t first_chip,
                                                     std::span<const KnownArrival> known) const {
    if (row.empty()) return {};
    Run r(codes_, cfg_, row, first_chip);
    r.add_known(known);
    return r.run();
}

}  // namespace msnow
