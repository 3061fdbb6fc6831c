#include <doctest.h>

#include <set>

#include "msnow/pnseq.hpp"

using namespace msnow;

namespace {

// Plain recurrence a_i = a_{i-2} ^ a_{i-3} (x^3 + x + 1), written out by hand.
Bits hand_m3(Bits a) {
    while (a.size() < 7) a.push_back(a[a.size() - 2] ^ a[a.size() - 3]);
    return a;
}

std::int64_t brute_corr(const Bits& a, const Bits& b, std::int64_t tau) {
    const auto N = static_cast<std::int64_t>(a.size());
    std::int64_t s = 0;
    for (std::int64_t i = 0; i < N; ++i) s += (1 - 2 * a[i]) * (1 - 2 * b[((i - tau) % N + N) % N]);
    return s;
}

std::vector<std::string> strings(const PnSet& s) {
    std::vector<std::string> out;
    for (const auto& q : s.sequences) out.push_back(bits_to_string(q.bits));
    return out;
}

}  // namespace

TEST_CASE("printed n=3 families") {
    const std::vector<std::string> one{"1011100", "1010011", "0001111", "1111011", "0010010",
                                       "1000001", "1100110", "0101000", "0110101"};
    const std::vector<std::string> two{"0101110", "0100111", "0001001", "1100000", "0110011",
                                       "0010100", "1011010", "1000111", "1111101"};
    CHECK(strings(pns1()) == one);
    CHECK(strings(pns2()) == two);
    CHECK(strings(gold_set_for_degree(3, "010", "010", "x")) == two);
}

TEST_CASE("first register matches a hand-rolled recurrence") {
    const auto m = generate_msequence(Polynomial::from_exponents({3, 1, 0}), Seed::from_string("101"));
    CHECK(m.bits == hand_m3({1, 0, 1}));
    CHECK(bits_to_string(m.bits) == "1011100");
}

TEST_CASE("default primitives have full period") {
    for (int n = 2; n <= 16; ++n) {
        Seed s;
        s.bits.assign(static_cast<std::size_t>(n), 0);
        s.bits.back() = 1;
        CHECK_MESSAGE(lfsr_period(default_primitive(n), s) == (1LL << n) - 1, "n=" << n);
    }
}

TEST_CASE("t(n) bound") {
    CHECK(t_of_n(3) == 5);
    CHECK(t_of_n(5) == 9);
    CHECK(t_of_n(6) == 17);
    CHECK(t_of_n(7) == 17);
}

TEST_CASE("library correlation agrees with brute force") {
    const auto set = gold_set_for_degree(5, "00001", "00001", "n5");
    REQUIRE(set.size() == 33);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::int64_t t = 0; t < 31; ++t)
                CHECK(crosscorrelation_raw(set[i].bits, set[j].bits, t) == brute_corr(set[i].bits, set[j].bits, t));
}

TEST_CASE("three valued cross-correlation, n = 3 and 5") {
    for (int n : {3, 5}) {
        const auto set = gold_set_for_degree(n, n == 3 ? "101" : "00001", n == 3 ? "101" : "00001", "g");
        const std::set<std::int64_t> allowed{-t_of_n(n), -1, t_of_n(n) - 2};
        const auto N = static_cast<std::int64_t>(set[0].length());
        for (std::size_t i = 0; i < set.size(); ++i)
            for (std::size_t j = 0; j < set.size(); ++j)
                for (std::int64_t t = 0; t < N; ++t) {
                    if (i == j && t == 0) continue;
                    CHECK(allowed.count(brute_corr(set[i].bits, set[j].bits, t)) == 1);
                }
        CHECK(verify_three_valued(set).passes);
    }
}

TEST_CASE("m-sequence properties") {
    for (int n : {3, 5, 6, 7}) {
        const auto set = gold_set_for_degree(n, std::string(static_cast<std::size_t>(n - 1), '0') + "1",
                                             std::string(static_cast<std::size_t>(n - 1), '0') + "1", "m");
        const Bits& u = set.pair.u.bits;
        const auto N = static_cast<std::int64_t>(u.size());
        CHECK(is_balanced(u));
        CHECK(satisfies_run_property(u, n));
        for (std::int64_t t = 1; t < N; ++t) CHECK(autocorrelation(u, t) == Rational(-1, N));
        CHECK(autocorrelation(u, 0) == Rational(1));
    }
}

TEST_CASE("run histogram of a degree 5 sequence") {
    const auto m = generate_msequence(default_primitive(5), Seed::from_string("00001"));
    const auto h = run_length_histogram(m.bits);
    CHECK(h.at(1) == 8);
    CHECK(h.at(2) == 4);
    CHECK(h.at(3) == 2);
    CHECK(h.at(4) == 1);
    CHECK(h.at(5) == 1);
}

TEST_CASE("decimation") {
    const auto u = generate_msequence(default_primitive(5), Seed::from_string("00001"));
    const Bits d = decimate(u.bits, 3);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == u.bits[(3 * i) % u.bits.size()]);
}

TEST_CASE("no preferred pair when n is a multiple of four") {
    CHECK_FALSE(smallest_preferred_q(4).has_value());
    CHECK_FALSE(smallest_preferred_q(8).has_value());
    CHECK(smallest_preferred_q(5).has_value());
}

TEST_CASE("export and import round trip") {
    const auto set = pns2();
    const auto back = import_pn_set(export_pn_set(set));
    CHECK(strings(back) == strings(set));
}

TEST_CASE("bad input is rejected") {
    CHECK_THROWS(bits_from_string("10a1"));
    CHECK_THROWS(gold_set_for_degree(3, "000", "101", "x"));
}

// Both printed seeds read the same either way round, so the seed direction is
// free; tap orientation and output order are not.
TEST_CASE("register conventions that reproduce PNs1") {
    const auto qk = smallest_preferred_q(3);
    REQUIRE(qk.has_value());
    const auto want = strings(pns1());
    int matches = 0;
    for (const auto& conv : LfsrConvention::all()) {
        try {
            const auto u = generate_msequence(Polynomial::from_exponents({3, 1, 0}), Seed::from_string("101"), conv);
            const auto v = generate_msequence(Polynomial::from_exponents({3, 2, 0}), Seed::from_string("101"), conv);
            if (strings(generate_gold_set(make_preferred_pair(u, v, qk->first, qk->second), "c")) == want) {
                ++matches;
                CHECK_FALSE(conv.reciprocal);
                CHECK_FALSE(conv.reverse_output);
            }
        } catch (const PnError&) {
        }
    }
    CHECK(matches == 2);
}
