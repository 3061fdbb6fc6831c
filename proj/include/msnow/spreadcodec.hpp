#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msnow/pnseq.hpp"

namespace msnow {

class CodecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PacketFormat {
    int preamble_bytes = 1;
    int header_bytes = 12;
    int payload_bytes = 28;
    std::uint8_t preamble_value = 0xE2;

    int total_bytes() const { return preamble_bytes + header_bytes + payload_bytes; }
    int total_bits() const { return 8 * total_bytes(); }
    int preamble_bits() const { return 8 * preamble_bytes; }
    // Bits counted in the airtime figure (preamble excluded).
    int airtime_bits() const { return 8 * (header_bytes + payload_bytes); }
    int payload_bits() const { return 8 * payload_bytes; }
    Bits preamble_bit_pattern() const;
};

struct Packet {
    std::vector<std::uint8_t> preamble;
    std::vector<std::uint8_t> header;
    std::vector<std::uint8_t> payload;

    std::vector<std::uint8_t> bytes() const;
    Bits bits() const;
    std::size_t byte_length() const { return preamble.size() + header.size() + payload.size(); }
};

// PN9 data whitening (x^9 + x^5 + 1, register seeded with ones). XOR, so it
// also undoes itself.
void whiten(std::span<std::uint8_t> bytes);

Bits bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

struct ChipStream {
    Bits chips;
    int chips_per_bit = 0;

    std::size_t bit_count() const { return chips_per_bit ? chips.size() / chips_per_bit : 0; }
};

Bits spread_bit(std::uint8_t b, const PnSequence& g);
ChipStream encode_bits(std::span<const std::uint8_t> bits, const PnSequence& g);
ChipStream encode_packet(const Packet& p, const PnSequence& g);

// Samples are quantized levels for one symbol.
int despread_symbol(std::span<const int> r, const PnSequence& g);
std::uint8_t decide_bit(int correlation, const PnSequence& g);

struct DecodedBits {
    Bits bits;
    std::vector<double> confidence;
};

// samples holds symbol_count * N levels back to back.
DecodedBits decode_packet(std::span<const int> samples, std::size_t symbol_count, const PnSequence& g);
DecodedBits decode_packet(const std::vector<std::vector<int>>& symbols, const PnSequence& g);

std::string export_chips(const ChipStream& s);
ChipStream import_chips(const std::string& text, int chips_per_bit);

}  // namespace msnow
