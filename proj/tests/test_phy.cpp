#include <doctest.h>

#include <random>

#include "msnow/kernels.hpp"
#include "msnow/phy.hpp"

using namespace msnow;

namespace {

SubcarrierPlan three() { return build_subcarrier_plan(547.0e6, 547.8e6, 400e3, 0.5); }

ChipLevels random_levels(int rows, std::int64_t chips, int max_level, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> d(0, max_level);
    ChipLevels l(rows, 0, chips);
    for (auto& v : l.data) v = d(rng);
    return l;
}

}  // namespace

TEST_CASE("subcarrier plan") {
    const auto p = three();
    REQUIRE(p.size() == 3);
    CHECK(p.at(1).center_hz == doctest::Approx(547.2e6));
    CHECK(p.at(2).center_hz == doctest::Approx(547.4e6));
    CHECK(p.at(3).center_hz == doctest::Approx(547.6e6));
    CHECK(build_subcarrier_plan(547e6, 560e6, 400e3, 0.5).size() == 64);
    CHECK_THROWS_AS(build_subcarrier_plan(547e6, 547.2e6, 400e3, 0.5), PhyError);
    CHECK_THROWS_AS(build_subcarrier_plan(547e6, 548e6, 400e3, 0.7), PhyError);
}

TEST_CASE("geometry") {
    const auto g = make_geometry(three());
    CHECK(g.reference_index == 2);
    CHECK(g.samples_per_chip == 16);
    CHECK(g.fft_size == 32);
    CHECK(g.offsets == std::vector<int>{-1, 0, 1});
}

TEST_CASE("quantizer bands are (k - 0.5, k + 0.5]") {
    CHECK(quantize_rss(-0.3) == 0);
    CHECK(quantize_rss(0.5) == 0);
    CHECK(quantize_rss(0.5000001) == 1);
    CHECK(quantize_rss(1.5) == 1);
    CHECK(quantize_rss(1.51) == 2);
    CHECK(quantize_rss(8.9) == 9);
    CHECK(quantize_rss(42.0) == 9);
}

TEST_CASE("noise-free synthesis and demux are exact") {
    const auto plan = three();
    const auto geo = make_geometry(plan);
    const auto levels = random_levels(3, 600, 9, 1);
    for (auto k : {Kernel::reference, Kernel::parallel}) {
        const auto sig = synthesize(levels, geo, 1.0, k);
        const auto res = gfft_demux(sig, plan, DemuxOptions{true, k});
        for (int r = 0; r < 3; ++r)
            for (std::int64_t c = 0; c < 600; ++c)
                REQUIRE(res.levels.at(r, c) == static_cast<int>(levels.at(r, c).real()));
    }
}

TEST_CASE("reference and parallel kernels agree") {
    const auto plan = build_subcarrier_plan(547e6, 550.2e6, 400e3, 0.5);
    const auto geo = make_geometry(plan);
    const auto levels = random_levels(geo.rows, 300, 9, 2);
    const auto a = synthesize(levels, geo, 1.0, Kernel::reference);
    const auto b = synthesize(levels, geo, 1.0, Kernel::parallel);
    REQUIRE(a.samples.size() == b.samples.size());
    double worst = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) worst = std::max(worst, std::abs(a.samples[i] - b.samples[i]));
    CHECK(worst < 1e-9);
    const auto ra = gfft_demux(a, plan, DemuxOptions{true, Kernel::reference});
    const auto rb = gfft_demux(a, plan, DemuxOptions{true, Kernel::parallel});
    for (std::size_t i = 0; i < ra.rss.size(); ++i) CHECK(ra.rss[i] == doctest::Approx(rb.rss[i]).epsilon(1e-9));
    CHECK(ra.levels.data == rb.levels.data);
}

TEST_CASE("downlink single-bin receiver sees its own composite") {
    const auto plan = three();
    const auto levels = random_levels(3, 200, 9, 3);
    const auto sig = synthesize_downlink(levels, plan);
    for (int sc = 1; sc <= 3; ++sc) {
        const auto rss = single_bin_receive(sig, plan, sc);
        for (std::int64_t c = 0; c < 200; ++c)
            CHECK(quantize_rss(rss[static_cast<std::size_t>(c)]) == static_cast<int>(levels.at(sc - 1, c).real()));
    }
}

TEST_CASE("noise is seeded and reproducible") {
    const auto plan = three();
    const auto levels = random_levels(3, 2100, 1, 4);
    const auto sig = synthesize(levels, make_geometry(plan), 1.0);
    const auto a = add_awgn(sig, 6.0, 11);
    const auto b = add_awgn(sig, 6.0, 11);
    const auto c = add_awgn(sig, 6.0, 12);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    CHECK(add_awgn(sig, std::numeric_limits<double>::infinity(), 1).samples == sig.samples);
}

TEST_CASE("PN reuse on one subcarrier is refused") {
    const auto plan = three();
    Transmission a, b;
    a.subcarrier_index = b.subcarrier_index = 1;
    a.sensor_id = 1;
    b.sensor_id = 2;
    a.pn = b.pn = pns1()[0];
    const std::vector<Transmission> txs{a, b};
    CHECK_THROWS_AS(check_assignment(txs, plan), PhyError);
    b.pn = pns1()[1];
    const std::vector<Transmission> ok{a, b};
    CHECK_NOTHROW(check_assignment(ok, plan));
}

TEST_CASE("preamble detection finds the offset") {
    const auto set = pns1();
    const Bits pre = PacketFormat{}.preamble_bit_pattern();
    std::vector<std::uint8_t> row(200, 0);
    const auto cs = encode_bits(pre, set[5]);
    for (std::size_t i = 0; i < cs.chips.size(); ++i) row[37 + i] = cs.chips[i];
    const auto hits = detect_preamble(row, set, pre);
    bool found = false;
    for (const auto& h : hits) found = found || (h.pn_index == 5 && h.offset == 37);
    CHECK(found);
}
