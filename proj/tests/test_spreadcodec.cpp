#include <doctest.h>

#include <numeric>
#include <random>

#include "msnow/spreadcodec.hpp"

using namespace msnow;

TEST_CASE("PN9 whitening sequence and self inverse") {
    std::vector<std::uint8_t> z(8, 0);
    whiten(z);
    CHECK(z[0] == 0xFF);
    CHECK(z[1] == 0xE1);
    CHECK(z[2] == 0x1D);
    CHECK(z[3] == 0x9A);
    std::vector<std::uint8_t> data(40);
    std::iota(data.begin(), data.end(), 7);
    auto copy = data;
    whiten(copy);
    CHECK(copy != data);
    whiten(copy);
    CHECK(copy == data);
}

TEST_CASE("bits are most significant first") {
    const std::uint8_t b[] = {0xE2, 0x01};
    CHECK(bits_to_string(bytes_to_bits(b)) == "1110001000000001");
    const auto back = bits_to_bytes(bytes_to_bits(b));
    CHECK(back == std::vector<std::uint8_t>{0xE2, 0x01});
    CHECK(bits_to_string(PacketFormat{}.preamble_bit_pattern()) == "11100010");
}

TEST_CASE("OOK spreading") {
    const auto g = pns1()[0];
    CHECK(spread_bit(1, g) == g.bits);
    CHECK(spread_bit(0, g) == Bits(7, 0));
}

TEST_CASE("packet layout") {
    PacketFormat f;
    CHECK(f.total_bytes() == 41);
    CHECK(f.total_bits() == 328);
    CHECK(f.airtime_bits() == 320);
    CHECK(f.payload_bits() == 224);
}

TEST_CASE("single sender encode and decode") {
    std::mt19937 rng(5);
    for (const auto& g : pns2().sequences) {
        Packet p;
        p.preamble = {0xE2};
        p.header.assign(12, 0);
        p.payload.resize(28);
        for (auto& b : p.payload) b = static_cast<std::uint8_t>(rng());
        const auto cs = encode_packet(p, g);
        REQUIRE(cs.chips.size() == 41u * 8 * 7);
        std::vector<int> levels(cs.chips.begin(), cs.chips.end());
        const auto d = decode_packet(levels, cs.bit_count(), g);
        CHECK(d.bits == p.bits());
    }
}

TEST_CASE("despread with an interferer") {
    const auto set = pns1();
    // Code 4 overlaps code 0 in a single chip.
    std::vector<int> r(7);
    for (int c = 0; c < 7; ++c) r[static_cast<std::size_t>(c)] = set[0].bits[c] + set[4].bits[c];
    CHECK(decide_bit(despread_symbol(r, set[0]), set[0]) == 1);
    for (int c = 0; c < 7; ++c) r[static_cast<std::size_t>(c)] = set[4].bits[c];
    CHECK(decide_bit(despread_symbol(r, set[0]), set[0]) == 0);
}

TEST_CASE("chip file round trip") {
    const auto cs = encode_bits(Bits{1, 0, 1}, pns1()[3]);
    const auto back = import_chips(export_chips(cs), 7);
    CHECK(back.chips == cs.chips);
    CHECK_THROWS(import_chips("10x", 7));
}
