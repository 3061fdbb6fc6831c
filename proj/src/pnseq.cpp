#include "msnow/pnseq.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace msnow {

namespace {

std::int64_t ipow2(int e) { return std::int64_t{1} << e; }

// Shortest recurrence generating s over GF(2); returns c_1..c_L.
std::vector<int> berlekamp_massey(const Bits& s) {
    std::vector<std::uint8_t> c(s.size() + 1, 0), b(s.size() + 1, 0);
    c[0] = b[0] = 1;
    int len = 0;
    int m = 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
        int d = s[i];
        for (int k = 1; k <= len; ++k) d ^= c[k] & s[i - k];
        if (d == 0) {
            ++m;
            continue;
        }
        auto t = c;
        for (std::size_t k = 0; k + m < c.size(); ++k) c[k + m] ^= b[k];
        if (2 * len <= static_cast<int>(i)) {
            len = static_cast<int>(i) + 1 - len;
            b = t;
            m = 1;
        } else {
            ++m;
        }
    }
    std::vector<int> taps;
    for (int k = 1; k <= len; ++k)
        if (c[k]) taps.push_back(k);
    return taps;
}

bool is_cyclic_shift(const Bits& a, const Bits& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t s = 0; s < a.size(); ++s)
        if (rotate_left(a, s) == b) return true;
    return false;
}

std::vector<std::uint8_t> effective_coeffs(const Polynomial& p, bool reciprocal) {
    std::vector<std::uint8_t> c(p.degree + 1, 0);
    for (int k : p.taps) c[k] = 1;
    if (!reciprocal) return c;
    std::vector<std::uint8_t> r(p.degree + 1, 0);
    for (int k = 1; k < p.degree; ++k) r[k] = c[p.degree - k];
    r[p.degree] = 1;
    return r;
}

Bits load_seed(const Seed& seed, bool reverse) {
    Bits s = seed.bits;
    if (reverse) std::reverse(s.begin(), s.end());
    return s;
}

}  // namespace

Bits bits_from_string(std::string_view s) {
    Bits out;
    out.reserve(s.size());
    for (char ch : s) {
        if (ch != '0' && ch != '1') throw PnError("bit string contains '" + std::string(1, ch) + "'");
        out.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    return out;
}

std::string bits_to_string(const Bits& b) {
    std::string s;
    s.reserve(b.size());
    for (auto x : b) s.push_back(x ? '1' : '0');
    return s;
}

Polynomial Polynomial::from_taps(int degree, std::vector<int> taps) {
    if (degree < 2) throw PnError("polynomial degree must be at least 2");
    std::sort(taps.begin(), taps.end());
    taps.erase(std::unique(taps.begin(), taps.end()), taps.end());
    if (taps.empty()) throw PnError("polynomial has no taps");
    for (int k : taps)
        if (k < 1 || k > degree) throw PnError("tap " + std::to_string(k) + " outside [1, degree]");
    if (taps.back() != degree) throw PnError("tap at position n is required");
    return Polynomial{degree, std::move(taps)};
}

Polynomial Polynomial::from_exponents(std::vector<int> exponents) {
    if (exponents.empty()) throw PnError("empty polynomial");
    int n = *std::max_element(exponents.begin(), exponents.end());
    std::vector<int> taps;
    for (int e : exponents)
        if (e < n) taps.push_back(n - e);
    return from_taps(n, std::move(taps));
}

std::string Polynomial::to_string() const {
    std::vector<int> exps{degree};
    for (auto it = taps.rbegin(); it != taps.rend(); ++it) exps.push_back(degree - *it);
    std::sort(exps.rbegin(), exps.rend());
    std::string s;
    for (int e : exps) {
        if (!s.empty()) s += "+";
        s += e == 0 ? "1" : e == 1 ? "x" : "x^" + std::to_string(e);
    }
    return s;
}

Seed Seed::from_string(std::string_view s) {
    return Seed{bits_from_string(s)};
}

std::string LfsrConvention::to_string() const {
    std::string s = reverse_seed ? "seed-reversed" : "seed-as-written";
    s += reciprocal ? ",reciprocal-taps" : ",taps-as-written";
    s += reverse_output ? ",output-reversed" : ",output-forward";
    return s;
}

std::vector<LfsrConvention> LfsrConvention::all() {
    std::vector<LfsrConvention> out;
    for (int i = 0; i < 8; ++i) out.push_back({bool(i & 1), bool(i & 2), bool(i & 4)});
    return out;
}

std::int64_t lfsr_period(const Polynomial& poly, const Seed& seed) {
    const int n = poly.degree;
    if (static_cast<int>(seed.bits.size()) != n) throw PnError("seed length differs from degree");
    auto c = effective_coeffs(poly, false);
    Bits state = seed.bits;  // state[j] = a_{i+j}
    const Bits start = state;
    const std::int64_t limit = ipow2(n);
    for (std::int64_t step = 1; step <= limit; ++step) {
        std::uint8_t next = 0;
        for (int k = 1; k <= n; ++k) next ^= c[k] & state[n - k];
        std::rotate(state.begin(), state.begin() + 1, state.end());
        state[n - 1] = next;
        if (state == start) return step;
    }
    return -1;
}

MSequence generate_msequence(const Polynomial& poly, const Seed& seed, const LfsrConvention& conv) {
    const int n = poly.degree;
    if (static_cast<int>(seed.bits.size()) != n)
        throw PnError("seed has " + std::to_string(seed.bits.size()) + " bits, polynomial degree is " +
                      std::to_string(n));
    if (std::none_of(seed.bits.begin(), seed.bits.end(), [](auto b) { return b != 0; }))
        throw PnError("zero seed: the all-zero state never leaves itself");
    const std::int64_t N = ipow2(n) - 1;

    Polynomial eff = poly;
    if (conv.reciprocal) {
        auto c = effective_coeffs(poly, true);
        eff.taps.clear();
        for (int k = 1; k <= n; ++k)
            if (c[k]) eff.taps.push_back(k);
    }
    Seed loaded{load_seed(seed, conv.reverse_seed)};
    std::int64_t period = lfsr_period(eff, loaded);
    if (period != N)
        throw PnError("polynomial " + poly.to_string() + " is not primitive: period " + std::to_string(period) +
                      " instead of " + std::to_string(N));

    auto c = effective_coeffs(eff, false);
    Bits a(static_cast<std::size_t>(N));
    std::copy(loaded.bits.begin(), loaded.bits.end(), a.begin());
    for (std::int64_t i = n; i < N; ++i) {
        std::uint8_t x = 0;
        for (int k = 1; k <= n; ++k) x ^= c[k] & a[i - k];
        a[i] = x;
    }
    if (conv.reverse_output) std::reverse(a.begin(), a.end());
    return MSequence{std::move(a), poly, seed};
}

Polynomial default_primitive(int n) {
    switch (n) {
        case 2: return Polynomial::from_exponents({2, 1, 0});
        case 3: return Polynomial::from_exponents({3, 1, 0});
        case 4: return Polynomial::from_exponents({4, 1, 0});
        case 5: return Polynomial::from_exponents({5, 2, 0});
        case 6: return Polynomial::from_exponents({6, 1, 0});
        case 7: return Polynomial::from_exponents({7, 1, 0});
        case 8: return Polynomial::from_exponents({8, 4, 3, 2, 0});
        case 9: return Polynomial::from_exponents({9, 4, 0});
        case 10: return Polynomial::from_exponents({10, 3, 0});
        case 11: return Polynomial::from_exponents({11, 2, 0});
        case 12: return Polynomial::from_exponents({12, 6, 4, 1, 0});
        case 13: return Polynomial::from_exponents({13, 4, 3, 1, 0});
        case 14: return Polynomial::from_exponents({14, 10, 6, 1, 0});
        case 15: return Polynomial::from_exponents({15, 1, 0});
        case 16: return Polynomial::from_exponents({16, 12, 3, 1, 0});
        default: throw PnError("no primitive polynomial tabulated for degree " + std::to_string(n));
    }
}

Bits decimate(const Bits& u, std::int64_t q) {
    const auto N = static_cast<std::int64_t>(u.size());
    if (N == 0) throw PnError("cannot decimate an empty sequence");
    if (q <= 0) throw PnError("decimation factor must be positive");
    if (std::gcd(N, q) != 1)
        throw PnError("gcd(N, q) = " + std::to_string(std::gcd(N, q)) + ": decimation would not span the full period");
    Bits out(u.size());
    for (std::int64_t i = 0; i < N; ++i) out[i] = u[(i * q) % N];
    return out;
}

MSequence decimate(const MSequence& u, std::int64_t q) {
    Bits d = decimate(u.bits, q);
    const int n = u.degree();
    Polynomial p = Polynomial::from_taps(n, berlekamp_massey(d));
    Seed s{Bits(d.begin(), d.begin() + n)};
    return MSequence{std::move(d), std::move(p), std::move(s)};
}

Validation validate_preferred_pair(int n, std::int64_t q, int k) {
    if (n < 2) return {false, "n must be at least 2"};
    if (n % 4 == 0) return {false, "n divisible by 4"};
    if (q % 2 == 0) return {false, "q even"};
    if (k < 1 || 2 * k >= 62) return {false, "k out of range"};
    if (q != ipow2(k) + 1 && q != ipow2(2 * k) - ipow2(k) + 1) return {false, "q is neither 2^k+1 nor 2^2k-2^k+1"};
    const int g = std::gcd(n, k);
    if (n % 2 == 1 && g != 1) return {false, "gcd(n, k) must be 1 for odd n"};
    if (n % 2 == 0 && g != 2) return {false, "gcd(n, k) must be 2 for even n"};
    if (std::gcd(ipow2(n) - 1, q) != 1) return {false, "gcd(N, q) != 1"};
    return {true, "ok"};
}

std::optional<std::pair<std::int64_t, int>> smallest_preferred_q(int n) {
    std::optional<std::pair<std::int64_t, int>> best;
    for (int k = 1; k <= n; ++k) {
        for (std::int64_t q : {ipow2(k) + 1, ipow2(2 * k) - ipow2(k) + 1}) {
            if (validate_preferred_pair(n, q, k) && (!best || q < best->first)) best = {q, k};
        }
    }
    return best;
}

PreferredPair make_preferred_pair(const MSequence& u, const MSequence& v, std::int64_t q, int k) {
    if (u.length() != v.length()) throw PnError("preferred pair members differ in length");
    if (u.degree() != v.degree()) throw PnError("preferred pair members differ in degree");
    auto why = validate_preferred_pair(u.degree(), q, k);
    if (!why) throw PnError("invalid preferred pair: " + why.reason);
    if (!is_cyclic_shift(decimate(u.bits, q), v.bits))
        throw PnError("v is not a cyclic shift of u decimated by " + std::to_string(q));
    return PreferredPair{u, v, q, k};
}

PreferredPair make_preferred_pair(const MSequence& u, std::int64_t q, int k) {
    auto why = validate_preferred_pair(u.degree(), q, k);
    if (!why) throw PnError("invalid preferred pair: " + why.reason);
    return PreferredPair{u, decimate(u, q), q, k};
}

int PnSequence::weight() const {
    return static_cast<int>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

Bits rotate_left(const Bits& v, std::size_t s) {
    if (v.empty()) return v;
    Bits out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[(i + s) % v.size()];
    return out;
}

Bits xor_bits(const Bits& a, const Bits& b) {
    if (a.size() != b.size()) throw PnError("xor of sequences with different lengths");
    Bits out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

PnSet generate_gold_set(const PreferredPair& pair, std::string label) {
    auto why = validate_preferred_pair(pair.u.degree(), pair.q, pair.k);
    if (!why) throw PnError("invalid preferred pair: " + why.reason);
    if (pair.u.length() != pair.v.length()) throw PnError("preferred pair members differ in length");
    const std::size_t N = pair.u.length();
    PnSet set;
    set.pair = pair;
    set.label = std::move(label);
    set.sequences.push_back({pair.u.bits, 0});
    set.sequences.push_back({pair.v.bits, 1});
    for (std::size_t i = 0; i < N; ++i)
        set.sequences.push_back({xor_bits(pair.u.bits, rotate_left(pair.v.bits, i)), static_cast<int>(i + 2)});
    return set;
}

PnSet gold_set_for_degree(int n, std::string_view seed1, std::string_view seed2, std::string label) {
    auto qk = smallest_preferred_q(n);
    if (!qk) throw PnError("no preferred pair exists for n = " + std::to_string(n));
    MSequence u = generate_msequence(default_primitive(n), Seed::from_string(seed1));
    MSequence d = decimate(u, qk->first);
    MSequence v = generate_msequence(d.poly, Seed::from_string(seed2));
    return generate_gold_set(make_preferred_pair(u, v, qk->first, qk->second), std::move(label));
}

PnSet n3_pn_set(std::string_view seed1, std::string_view seed2, std::string label) {
    return gold_set_for_degree(3, seed1, seed2, std::move(label));
}

PnSet pns1() { return n3_pn_set("101", "101", "PNs1"); }
PnSet pns2() { return n3_pn_set("010", "010", "PNs2"); }

std::int64_t t_of_n(int n) {
    return n % 2 ? 1 + ipow2((n + 1) / 2) : 1 + ipow2((n + 2) / 2);
}

std::int64_t crosscorrelation_raw(const Bits& a, const Bits& b, std::int64_t tau) {
    if (a.size() != b.size()) throw PnError("correlation of sequences with different lengths");
    const auto N = static_cast<std::int64_t>(a.size());
    if (N == 0) return 0;
    tau = ((tau % N) + N) % N;
    std::int64_t sum = 0;
    for (std::int64_t i = 0; i < N; ++i) {
        int x = 1 - 2 * a[i];
        int y = 1 - 2 * b[(i - tau + N) % N];
        sum += x * y;
    }
    return sum;
}

Rational crosscorrelation(const Bits& a, const Bits& b, std::int64_t tau) {
    return Rational(crosscorrelation_raw(a, b, tau), static_cast<std::int64_t>(a.size()));
}

Rational autocorrelation(const Bits& a, std::int64_t tau) {
    return crosscorrelation(a, a, tau);
}

bool is_balanced(const Bits& a) {
    auto ones = std::count(a.begin(), a.end(), std::uint8_t{1});
    auto zeros = static_cast<std::int64_t>(a.size()) - ones;
    return ones - zeros == 1;
}

std::map<int, int> run_length_histogram(const Bits& a) {
    std::map<int, int> h;
    const std::size_t N = a.size();
    if (N == 0) return h;
    // Start counting at a run boundary so the wrap-around run is not split.
    std::size_t start = 0;
    while (start < N && a[start] == a[(start + N - 1) % N]) ++start;
    if (start == N) {
        h[static_cast<int>(N)] = 1;
        return h;
    }
    int len = 0;
    for (std::size_t i = 0; i < N; ++i) {
        std::size_t idx = (start + i) % N;
        if (i > 0 && a[idx] != a[(idx + N - 1) % N]) {
            ++h[len];
            len = 0;
        }
        ++len;
    }
    ++h[len];
    return h;
}

bool satisfies_run_property(const Bits& a, int n) {
    auto h = run_length_histogram(a);
    int total = 0;
    for (auto& [len, count] : h) total += count;
    if (total != static_cast<int>(ipow2(n - 1))) return false;
    for (int k = 1; k < n; ++k) {
        // count / total == 1 / 2^k
        auto it = h.find(k);
        int count = it == h.end() ? 0 : it->second;
        if (static_cast<std::int64_t>(count) * ipow2(k) != total) return false;
    }
    return true;
}

CorrelationReport verify_three_valued(const PnSet& set) {
    CorrelationReport rep;
    if (set.sequences.empty()) return rep;
    const auto N = static_cast<std::int64_t>(set.sequences[0].length());
    int n = 0;
    while ((std::int64_t{1} << n) - 1 < N) ++n;
    const std::int64_t t = t_of_n(n);
    rep.allowed = {-t, -1, t - 2};
    rep.passes = true;
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i; j < set.size(); ++j) {
            for (std::int64_t tau = 0; tau < N; ++tau) {
                if (i == j && tau == 0) continue;
                auto v = crosscorrelation_raw(set[i].bits, set[j].bits, tau);
                ++rep.values[v];
                if (v != -t && v != -1 && v != t - 2) rep.passes = false;
            }
        }
    }
    return rep;
}

std::map<std::int64_t, std::int64_t> cross_set_histogram(const PnSet& a, const PnSet& b) {
    std::map<std::int64_t, std::int64_t> h;
    for (const auto& x : a.sequences)
        for (const auto& y : b.sequences)
            for (std::int64_t tau = 0; tau < static_cast<std::int64_t>(x.length()); ++tau)
                ++h[crosscorrelation_raw(x.bits, y.bits, tau)];
    return h;
}

std::string export_pn_set(const PnSet& set) {
    std::ostringstream os;
    os << "# label: " << set.label << "\n";
    os << "# q: " << set.pair.q << " k: " << set.pair.k << "\n";
    for (const auto& s : set.sequences) os << bits_to_string(s.bits) << "\n";
    return os.str();
}

PnSet import_pn_set(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line, label = "imported";
    std::int64_t q = 0;
    int k = 0;
    std::vector<Bits> rows;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            while (hs >> key) {
                if (key == "label:") hs >> label;
                else if (key == "q:") hs >> q;
                else if (key == "k:") hs >> k;
            }
            continue;
        }
        try {
            rows.push_back(bits_from_string(line));
        } catch (const PnError& e) {
            throw PnError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (rows.size() < 2) throw PnError("PN set needs at least two sequences");
    const std::size_t N = rows[0].size();
    int n = 0;
    while ((std::size_t{1} << n) - 1 < N) ++n;
    if ((std::size_t{1} << n) - 1 != N) throw PnError("sequence length " + std::to_string(N) + " is not 2^n - 1");
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].size() != N) throw PnError("sequence " + std::to_string(i) + " has the wrong length");
    if (rows.size() != N + 2)
        throw PnError("expected " + std::to_string(N + 2) + " sequences, found " + std::to_string(rows.size()));
    if (q == 0) {
        auto qk = smallest_preferred_q(n);
        if (!qk) throw PnError("no preferred pair exists for n = " + std::to_string(n));
        q = qk->first;
        k = qk->second;
    }
    auto as_mseq = [n](const Bits& b) {
        Polynomial p = Polynomial::from_taps(n, berlekamp_massey(b));
        Seed s{Bits(b.begin(), b.begin() + n)};
        MSequence m = generate_msequence(p, s);
        if (m.bits != b) throw PnError("sequence is not an m-sequence");
        return m;
    };
    PnSet set = generate_gold_set(make_preferred_pair(as_mseq(rows[0]), as_mseq(rows[1]), q, k), label);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (set[i].bits != rows[i]) throw PnError("sequence " + std::to_string(i) + " does not follow G(u, v)");
    return set;
}

}  // namespace msnow
