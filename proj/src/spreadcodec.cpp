#include "msnow/spreadcodec.hpp"

#include <sstream>

namespace msnow {

Bits PacketFormat::preamble_bit_pattern() const {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(preamble_bytes), preamble_value);
    return bytes_to_bits(bytes);
}

std::vector<std::uint8_t> Packet::bytes() const {
    std::vector<std::uint8_t> out;
    out.reserve(byte_length());
    out.insert(out.end(), preamble.begin(), preamble.end());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Bits Packet::bits() const {
    auto b = bytes();
    return bytes_to_bits(b);
}

Bits bytes_to_bits(std::span<const std::uint8_t> bytes) {
    Bits out;
    out.reserve(bytes.size() * 8);
    for (auto byte : bytes)
        for (int i = 7; i >= 0; --i) out.push_back((byte >> i) & 1);
    return out;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
    if (bits.size() % 8) throw CodecError("bit count is not a multiple of 8");
    std::vector<std::uint8_t> out(bits.size() / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) out[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1) << (7 - i % 8));
    return out;
}

Bits spread_bit(std::uint8_t b, const PnSequence& g) {
    if (b) return g.bits;
    return Bits(g.length(), 0);
}

ChipStream encode_bits(std::span<const std::uint8_t> bits, const PnSequence& g) {
    if (bits.empty()) throw CodecError("cannot encode an empty packet");
    if (g.length() == 0) throw CodecError("empty PN sequence");
    ChipStream s;
    s.chips_per_bit = static_cast<int>(g.length());
    s.chips.reserve(bits.size() * g.length());
    for (auto b : bits)
        for (auto c : g.bits) s.chips.push_back(b ? c : 0);
    return s;
}

void whiten(std::span<std::uint8_t> bytes) {
    std::uint16_t r = 0x1FF;
    for (auto& b : bytes) {
        b ^= static_cast<std::uint8_t>(r & 0xFF);
        for (int i = 0; i < 8; ++i) r = static_cast<std::uint16_t>((r >> 1) | (((r ^ (r >> 5)) & 1) << 8));
    }
}

ChipStream encode_packet(const Packet& p, const PnSequence& g) {
    auto bits = p.bits();
    return encode_bits(bits, g);
}

int despread_symbol(std::span<const int> r, const PnSequence& g) {
    if (r.size() != g.length())
        throw CodecError("symbol has " + std::to_string(r.size()) + " samples, PN length is " +
                         std::to_string(g.length()));
    int sum = 0;
    for (std::size_t k = 0; k < r.size(); ++k) sum += r[k] * g.bits[k];
    return sum;
}

std::uint8_t decide_bit(int correlation, const PnSequence& g) {
    const int w = g.weight();
    // ties go to 1
    return correlation >= (w + 1) / 2 ? 1 : 0;
}

DecodedBits decode_packet(std::span<const int> samples, std::size_t symbol_count, const PnSequence& g) {
    const std::size_t N = g.length();
    if (samples.size() != symbol_count * N)
        throw CodecError("expected " + std::to_string(symbol_count) + " symbols of " + std::to_string(N) +
                         " samples, got " + std::to_string(samples.size()) + " samples");
    DecodedBits out;
    out.bits.reserve(symbol_count);
    out.confidence.reserve(symbol_count);
    const double w = g.weight();
    for (std::size_t s = 0; s < symbol_count; ++s) {
        int c = despread_symbol(samples.subspan(s * N, N), g);
        out.bits.push_back(decide_bit(c, g));
        out.confidence.push_back(w > 0 ? c / w : 0.0);
    }
    return out;
}

DecodedBits decode_packet(const std::vector<std::vector<int>>& symbols, const PnSequence& g) {
    std::vector<int> flat;
    flat.reserve(symbols.size() * g.length());
    for (const auto& s : symbols) {
        if (s.size() != g.length()) throw CodecError("symbol length differs from PN length");
        flat.insert(flat.end(), s.begin(), s.end());
    }
    return decode_packet(flat, symbols.size(), g);
}

std::string export_chips(const ChipStream& s) {
    std::ostringstream os;
    for (std::size_t i = 0; i < s.chips.size(); ++i) {
        os << (s.chips[i] ? '1' : '0');
        if (s.chips_per_bit && (i + 1) % s.chips_per_bit == 0) os << '\n';
    }
    if (s.chips_per_bit == 0 || s.chips.size() % s.chips_per_bit) os << '\n';
    return os.str();
}

ChipStream import_chips(const std::string& text, int chips_per_bit) {
    ChipStream s;
    s.chips_per_bit = chips_per_bit;
    for (char ch : text) {
        if (ch == '0' || ch == '1') s.chips.push_back(static_cast<std::uint8_t>(ch - '0'));
        else if (ch != '\n' && ch != '\r' && ch != ' ') throw CodecError("chip text contains '" + std::string(1, ch) + "'");
    }
    if (chips_per_bit <= 0 || s.chips.size() % chips_per_bit)
        throw CodecError("chip count is not a multiple of chips per bit");
    return s;
}

}  // namespace msnow
