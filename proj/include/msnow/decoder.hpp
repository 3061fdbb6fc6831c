#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "msnow/pnseq.hpp"

namespace msnow {

struct DecoderConfig {
    Bits preamble_bits;     // known leading symbols of every packet
    int packet_bits = 328;  // symbols per packet, preamble included
    int search_back = 21;   // chips before a trigger where an arrival may have begun
    int wide_search_back = 84;  // fallback window when the first search cannot settle
    int lookahead = 63;     // chips after a trigger used to score arrival hypotheses
    int tolerance = 0;      // cost above the pre-trigger path still counted as consistent
    int trigger = 1;        // per-chip cost rise that starts an arrival search
    int max_joint = 3;      // most arrivals hypothesized together
    int beam = 40;           // guesses extended per level of the joint search
    int choices = 4;        // ranked alternatives kept per adopted arrival
    // An unexplained trigger this many chips after an adoption undoes it; 0 means one and a half packets.
    int retract_window = 0;
    int max_retractions = 4096;
    bool detect_arrivals = true;
};

struct DecodedPacket {
    int code = 0;  // index into the decoder's code list
    std::int64_t start_chip = 0;
    Bits bits;
    bool complete = false;
};

struct KnownArrival {
    int code = 0;
    std::int64_t start_chip = 0;
};

// Joint maximum-likelihood detector for one subcarrier row. Each active sender
// holds one bit of trellis state; the expected level of a chip is the number of
// active senders whose current bit is 1 and whose PN chip is 1. New packets are
// found when the best path can no longer explain the row, by re-running short
// windows with one extra sender hypothesized at each recent offset.
class SubcarrierDecoder {
public:
    static constexpr int kMaxActive = 9;

    SubcarrierDecoder(std::vector<PnSequence> codes, DecoderConfig cfg);

    std::vector<DecodedPacket> decode(std::span<const std::uint8_t> row, std::int64_t first_chip,
                                      std::span<const KnownArrival> known = {}) const;

    const std::vector<PnSequence>& codes() const { return codes_; }
    const DecoderConfig& config() const { return cfg_; }

private:
    std::vector<PnSequence> codes_;
    DecoderConfig cfg_;
};

}  // namespace msnow
