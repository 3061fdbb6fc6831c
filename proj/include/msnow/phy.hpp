#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msnow/pnseq.hpp"
#include "msnow/spreadcodec.hpp"

namespace msnow {

using cplx = std::complex<double>;

class PhyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Subcarrier {
    int index = 0;  // 1-based
    double center_hz = 0.0;
};

struct SubcarrierPlan {
    double band_start = 0.0;
    double band_end = 0.0;
    double bandwidth = 0.0;  // omega, also the chip rate
    double overlap = 0.0;    // alpha
    std::vector<Subcarrier> subcarriers;

    std::size_t size() const { return subcarriers.size(); }
    double width() const { return band_end - band_start; }
    double spacing() const { return bandwidth * overlap; }
    double chip_rate() const { return bandwidth; }
    bool contains(int index) const { return index >= 1 && index <= static_cast<int>(size()); }
    const Subcarrier& at(int index) const;
};

SubcarrierPlan build_subcarrier_plan(double band_start, double band_end, double bandwidth, double overlap);

// Sampling layout shared by synthesis and demux. Subcarrier i sits at
// offset[i] * spacing from the reference subcarrier (index ceil(M/2)), which is
// mixed to DC. Each chip is Ns samples; the FFT is zero-padded to K = Ns / alpha
// so every subcarrier lands on bin offset[i] mod K.
struct PhyGeometry {
    int rows = 0;
    int samples_per_chip = 0;
    int fft_size = 0;
    int alpha_inv = 0;
    int reference_index = 0;
    double chip_rate = 0.0;
    double sample_rate = 0.0;
    std::vector<int> offsets;

    int bin(int row) const { return ((offsets[row] % fft_size) + fft_size) % fft_size; }
};

PhyGeometry make_geometry(const SubcarrierPlan& plan, int min_samples_per_chip = 16);

// Complex chip amplitude per subcarrier per chip. Row r is subcarrier r + 1.
struct ChipLevels {
    int rows = 0;
    std::int64_t first_chip = 0;
    std::int64_t chips = 0;
    std::vector<cplx> data;

    ChipLevels() = default;
    ChipLevels(int rows, std::int64_t first_chip, std::int64_t chips)
        : rows(rows), first_chip(first_chip), chips(chips), data(static_cast<std::size_t>(rows * chips)) {}

    cplx& at(int row, std::int64_t k) { return data[static_cast<std::size_t>(row * chips + k)]; }
    const cplx& at(int row, std::int64_t k) const { return data[static_cast<std::size_t>(row * chips + k)]; }
};

struct Transmission {
    int sensor_id = 0;
    int subcarrier_index = 0;
    PnSequence pn;
    ChipStream chips;
    std::int64_t start_chip = 0;
    double power_dbm = 0.0;
    double phase = 0.0;  // radians, only used in random-phase runs
    std::int64_t packet_id = 0;

    std::int64_t end_chip() const { return start_chip + static_cast<std::int64_t>(chips.chips.size()); }
    double start_time(double chip_rate) const { return static_cast<double>(start_chip) / chip_rate; }
};

// Throws on a PN reused by two sensors of one subcarrier.
void check_assignment(std::span<const Transmission> txs, const SubcarrierPlan& plan);

// Adds every transmission overlapping the window [first_chip, first_chip + chips).
void accumulate_levels(std::span<const Transmission> txs, ChipLevels& levels);

struct BasebandSignal {
    std::vector<cplx> samples;
    double sample_rate = 0.0;
    double t0 = 0.0;
    std::int64_t first_chip = 0;
    int samples_per_chip = 0;
    double unit_amplitude = 1.0;  // amplitude of one sensor's unit chip

    std::int64_t chip_count() const {
        return samples_per_chip ? static_cast<std::int64_t>(samples.size()) / samples_per_chip : 0;
    }
    double duration() const { return samples.size() / sample_rate; }
};

enum class Kernel { reference, parallel };

BasebandSignal synthesize(const ChipLevels& levels, const PhyGeometry& geo, double scale,
                          Kernel kernel = Kernel::parallel);

BasebandSignal synthesize_uplink(std::span<const Transmission> txs, const SubcarrierPlan& plan,
                                 std::int64_t first_chip, std::int64_t chip_count,
                                 Kernel kernel = Kernel::parallel);

// One pre-summed composite per subcarrier, scaled by 1/sqrt(M).
BasebandSignal synthesize_downlink(const ChipLevels& composites, const SubcarrierPlan& plan,
                                   Kernel kernel = Kernel::parallel);

// snr_db is the ratio of one sensor's unit-chip sample power to the complex
// noise power per sample. Infinite snr leaves the signal untouched. Noise is
// drawn per block of chips from a stream keyed on (seed, block), so results do
// not depend on thread count or on how a run is chunked.
void add_awgn_inplace(BasebandSignal& signal, double snr_db, std::uint64_t seed);
BasebandSignal add_awgn(const BasebandSignal& signal, double snr_db, std::uint64_t seed);

inline constexpr int kNoiseBlockChips = 1024;

struct QuantizedSubcarrierMatrix {
    int rows = 0;
    std::int64_t cols = 0;
    std::int64_t first_chip = 0;
    std::vector<std::uint8_t> data;

    std::uint8_t at(int row, std::int64_t k) const { return data[static_cast<std::size_t>(row * cols + k)]; }
    std::span<const std::uint8_t> row(int r) const {
        return {data.data() + static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols)};
    }
};

struct DemuxResult {
    QuantizedSubcarrierMatrix levels;
    std::vector<double> rss;        // statistic that was quantized
    std::vector<double> magnitude;  // |bin|
    std::vector<cplx> bins;         // de-rotated bin values
};

struct DemuxOptions {
    bool coherent = true;  // in-phase component as the RSS statistic; otherwise magnitude
    Kernel kernel = Kernel::parallel;
};

DemuxResult gfft_demux(const BasebandSignal& signal, const SubcarrierPlan& plan, const DemuxOptions& opt = {});

// Sensor-side receiver: single-bin correlation on one subcarrier.
std::vector<double> single_bin_receive(const BasebandSignal& signal, const SubcarrierPlan& plan, int subcarrier_index,
                                       bool coherent = true);

int quantize_rss(double m);

struct PreambleDetection {
    int pn_index = 0;
    std::int64_t offset = 0;
    double score = 0.0;
};

inline constexpr double kPreambleThreshold = 0.75;

// Normalized score is the cosine between the window and the spread preamble,
// reported when the projection gain is also at least the threshold.
std::vector<PreambleDetection> detect_preamble(std::span<const std::uint8_t> row, const std::vector<PnSequence>& codes,
                                               const Bits& preamble_bits, double threshold = kPreambleThreshold);
std::vector<PreambleDetection> detect_preamble(std::span<const std::uint8_t> row, const PnSet& set,
                                               const Bits& preamble_bits, double threshold = kPreambleThreshold);

// Text header file at path + ".hdr", samples as interleaved float32 LE at path.
void write_signal_dump(const std::string& path, const BasebandSignal& signal);

}  // namespace msnow
