#include <doctest.h>

#include <map>
#include <random>

#include "msnow/decoder.hpp"
#include "msnow/spreadcodec.hpp"

using namespace msnow;

namespace {

struct Sent {
    int code;
    std::int64_t start;
    Bits bits;
};

constexpr int kBits = 48;  // short packets keep these tests quick

DecoderConfig small_config() {
    DecoderConfig c;
    c.preamble_bits = PacketFormat{}.preamble_bit_pattern();
    c.packet_bits = kBits;
    return c;
}

Bits random_packet(std::mt19937& rng) {
    Bits b = PacketFormat{}.preamble_bit_pattern();
    while (b.size() < kBits) b.push_back(static_cast<std::uint8_t>(rng() & 1));
    return b;
}

std::vector<std::uint8_t> levels_of(const std::vector<Sent>& sent, const std::vector<PnSequence>& codes) {
    std::int64_t end = 0;
    for (const auto& s : sent) end = std::max(end, s.start + kBits * 7);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(end + 64), 0);
    for (const auto& s : sent) {
        const auto cs = encode_bits(s.bits, codes[static_cast<std::size_t>(s.code)]);
        for (std::size_t i = 0; i < cs.chips.size(); ++i) row[static_cast<std::size_t>(s.start) + i] += cs.chips[i];
    }
    return row;
}

int count_exact(const std::vector<Sent>& sent, const std::vector<DecodedPacket>& got) {
    std::map<std::pair<int, std::int64_t>, const DecodedPacket*> m;
    for (const auto& p : got) m[{p.code, p.start_chip}] = &p;
    int ok = 0;
    for (const auto& s : sent) {
        auto it = m.find({s.code, s.start});
        ok += it != m.end() && it->second->complete && it->second->bits == s.bits;
    }
    return ok;
}

std::vector<PnSequence> first(int n) {
    const auto s = pns1();
    return {s.sequences.begin(), s.sequences.begin() + n};
}

}  // namespace

TEST_CASE("lone packet") {
    std::mt19937 rng(1);
    const auto codes = first(3);
    const std::vector<Sent> sent{{1, 100, random_packet(rng)}};
    const auto got = SubcarrierDecoder(codes, small_config()).decode(levels_of(sent, codes), 0);
    REQUIRE(got.size() == 1);
    CHECK(count_exact(sent, got) == 1);
}

TEST_CASE("back to back packets on one code") {
    std::mt19937 rng(2);
    const auto codes = first(2);
    std::vector<Sent> sent;
    for (int m = 0; m < 4; ++m) sent.push_back({0, 10 + m * kBits * 7, random_packet(rng)});
    sent.push_back({1, 200, random_packet(rng)});
    const auto got = SubcarrierDecoder(codes, small_config()).decode(levels_of(sent, codes), 0);
    CHECK(count_exact(sent, got) == 5);
}

TEST_CASE("simultaneous starts") {
    std::mt19937 rng(3);
    const auto codes = first(3);
    const std::vector<Sent> sent{{0, 70, random_packet(rng)}, {2, 70, random_packet(rng)}};
    const auto got = SubcarrierDecoder(codes, small_config()).decode(levels_of(sent, codes), 0);
    CHECK(count_exact(sent, got) == 2);
}

TEST_CASE("asynchronous traffic from three codes") {
    std::mt19937 rng(4);
    const auto codes = first(3);
    std::vector<Sent> sent;
    for (int c = 0; c < 3; ++c) {
        std::int64_t t = static_cast<std::int64_t>(rng() % 400);
        for (int m = 0; m < 6; ++m) {
            sent.push_back({c, t, random_packet(rng)});
            t += kBits * 7 + static_cast<std::int64_t>(rng() % 500);
        }
    }
    const auto got = SubcarrierDecoder(codes, small_config()).decode(levels_of(sent, codes), 0);
    CHECK(count_exact(sent, got) == static_cast<int>(sent.size()));
}

TEST_CASE("known arrivals with detection off") {
    std::mt19937 rng(5);
    const auto codes = first(5);
    std::vector<Sent> sent;
    std::vector<KnownArrival> known;
    for (int c = 0; c < 5; ++c)
        for (int m = 0; m < 3; ++m) {
            sent.push_back({c, m * kBits * 7, random_packet(rng)});
            known.push_back({c, m * kBits * 7});
        }
    auto cfg = small_config();
    cfg.detect_arrivals = false;
    const auto got = SubcarrierDecoder(codes, cfg).decode(levels_of(sent, codes), 0, known);
    CHECK(count_exact(sent, got) == 15);
}

TEST_CASE("empty row gives nothing") {
    const auto codes = first(2);
    const std::vector<std::uint8_t> row(500, 0);
    CHECK(SubcarrierDecoder(codes, small_config()).decode(row, 0).empty());
    CHECK_THROWS(SubcarrierDecoder({}, small_config()));
}
