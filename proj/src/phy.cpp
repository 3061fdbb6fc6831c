#include "msnow/phy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "msnow/kernels.hpp"
#include "msnow/rng.hpp"

namespace msnow {

const Subcarrier& SubcarrierPlan::at(int index) const {
    if (!contains(index)) throw PhyError("subcarrier " + std::to_string(index) + " is not in the plan");
    return subcarriers[static_cast<std::size_t>(index - 1)];
}

SubcarrierPlan build_subcarrier_plan(double band_start, double band_end, double bandwidth, double overlap) {
    if (!(band_end > band_start)) throw PhyError("band_end must exceed band_start");
    if (!(bandwidth > 0)) throw PhyError("subcarrier bandwidth must be positive");
    if (!(overlap > 0 && overlap <= 0.5)) throw PhyError("overlap must lie in (0, 0.5]");
    const double ratio = (band_end - band_start) / (bandwidth * overlap);
    const auto slots = static_cast<std::int64_t>(std::floor(ratio + 1e-9));
    const std::int64_t count = slots - 1;
    if (count <= 0) throw PhyError("band too narrow: no usable subcarrier");
    SubcarrierPlan plan{band_start, band_end, bandwidth, overlap, {}};
    for (std::int64_t i = 0; i < count; ++i)
        plan.subcarriers.push_back({static_cast<int>(i + 1), band_start + bandwidth / 2 + i * bandwidth * overlap});
    return plan;
}

PhyGeometry make_geometry(const SubcarrierPlan& plan, int min_samples_per_chip) {
    if (plan.size() == 0) throw PhyError("empty subcarrier plan");
    const double inv = 1.0 / plan.overlap;
    const int D = static_cast<int>(std::lround(inv));
    if (std::abs(inv - D) > 1e-9) throw PhyError("1/overlap must be an integer so centers fall on FFT bins");
    PhyGeometry g;
    g.rows = static_cast<int>(plan.size());
    g.alpha_inv = D;
    g.reference_index = (g.rows + 1) / 2;
    int max_abs = 0;
    for (int r = 0; r < g.rows; ++r) {
        g.offsets.push_back(r + 1 - g.reference_index);
        max_abs = std::max(max_abs, std::abs(g.offsets.back()));
    }
    // Bins must stay strictly inside the Nyquist range of K = D * Ns.
    int ns = static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::max(1, min_samples_per_chip))));
    while (2 * max_abs >= D * ns) ns *= 2;
    g.samples_per_chip = ns;
    g.fft_size = D * ns;
    g.chip_rate = plan.chip_rate();
    g.sample_rate = ns * plan.chip_rate();
    return g;
}

void check_assignment(std::span<const Transmission> txs, const SubcarrierPlan& plan) {
    std::map<std::pair<int, std::string>, int> owner;
    for (const auto& t : txs) {
        if (!plan.contains(t.subcarrier_index))
            throw PhyError("transmission on subcarrier " + std::to_string(t.subcarrier_index) + " outside the plan");
        auto key = std::make_pair(t.subcarrier_index, bits_to_string(t.pn.bits));
        auto [it, fresh] = owner.emplace(key, t.sensor_id);
        if (!fresh && it->second != t.sensor_id)
            throw PhyError("sensors " + std::to_string(it->second) + " and " + std::to_string(t.sensor_id) +
                           " share a PN on subcarrier " + std::to_string(t.subcarrier_index));
    }
}

void accumulate_levels(std::span<const Transmission> txs, ChipLevels& levels) {
    const std::int64_t lo = levels.first_chip;
    const std::int64_t hi = levels.first_chip + levels.chips;
    for (const auto& t : txs) {
        if (t.end_chip() <= lo || t.start_chip >= hi) continue;
        const int row = t.subcarrier_index - 1;
        if (row < 0 || row >= levels.rows) throw PhyError("transmission subcarrier outside the level matrix");
        const cplx amp = std::polar(std::pow(10.0, t.power_dbm / 20.0), t.phase);
        const std::int64_t a = std::max(lo, t.start_chip);
        const std::int64_t b = std::min(hi, t.end_chip());
        for (std::int64_t c = a; c < b; ++c)
            if (t.chips.chips[static_cast<std::size_t>(c - t.start_chip)]) levels.at(row, c - lo) += amp;
    }
}

BasebandSignal synthesize(const ChipLevels& levels, const PhyGeometry& geo, double scale, Kernel kernel) {
    if (levels.rows != geo.rows) throw PhyError("level matrix rows differ from the plan size");
    BasebandSignal s;
    s.sample_rate = geo.sample_rate;
    s.first_chip = levels.first_chip;
    s.t0 = static_cast<double>(levels.first_chip) / geo.chip_rate;
    s.samples_per_chip = geo.samples_per_chip;
    s.unit_amplitude = scale;
    s.samples.resize(static_cast<std::size_t>(levels.chips * geo.samples_per_chip));
    if (kernel == Kernel::reference) kernels::synthesize_reference(levels, geo, scale, s.samples.data());
    else kernels::synthesize_parallel(levels, geo, scale, s.samples.data());
    return s;
}

BasebandSignal synthesize_uplink(std::span<const Transmission> txs, const SubcarrierPlan& plan,
                                 std::int64_t first_chip, std::int64_t chip_count, Kernel kernel) {
    check_assignment(txs, plan);
    const auto geo = make_geometry(plan);
    ChipLevels levels(geo.rows, first_chip, chip_count);
    accumulate_levels(txs, levels);
    return synthesize(levels, geo, 1.0, kernel);
}

BasebandSignal synthesize_downlink(const ChipLevels& composites, const SubcarrierPlan& plan, Kernel kernel) {
    if (composites.rows > static_cast<int>(plan.size()))
        throw PhyError("more composite streams than subcarriers");
    const auto geo = make_geometry(plan);
    const double scale = 1.0 / std::sqrt(static_cast<double>(plan.size()));
    if (composites.rows == geo.rows) return synthesize(composites, geo, scale, kernel);
    ChipLevels padded(geo.rows, composites.first_chip, composites.chips);
    std::copy(composites.data.begin(), composites.data.end(), padded.data.begin());
    return synthesize(padded, geo, scale, kernel);
}

void add_awgn_inplace(BasebandSignal& signal, double snr_db, std::uint64_t seed) {
    if (signal.samples.empty()) throw PhyError("cannot add noise to an empty signal");
    if (std::isinf(snr_db) && snr_db > 0) return;
    const double sigma2 = signal.unit_amplitude * signal.unit_amplitude * std::pow(10.0, -snr_db / 10.0);
    const double sd = std::sqrt(sigma2 / 2.0);
    const int ns = signal.samples_per_chip;
    const std::int64_t block_samples = static_cast<std::int64_t>(kNoiseBlockChips) * ns;
    const std::int64_t start = signal.first_chip * ns;
    const std::int64_t end = start + static_cast<std::int64_t>(signal.samples.size());
    auto floor_div = [](std::int64_t a, std::int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    const std::int64_t b0 = floor_div(start, block_samples);
    const std::int64_t b1 = floor_div(end - 1, block_samples);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = b0; b <= b1; ++b) {
        std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
        std::normal_distribution<double> nd(0.0, sd);
        const std::int64_t bs = b * block_samples;
        for (std::int64_t i = bs; i < bs + block_samples; ++i) {
            const double re = nd(rng);
            const double im = nd(rng);
            if (i >= start && i < end) signal.samples[static_cast<std::size_t>(i - start)] += cplx{re, im};
        }
    }
}

BasebandSignal add_awgn(const BasebandSignal& signal, double snr_db, std::uint64_t seed) {
    BasebandSignal out = signal;
    add_awgn_inplace(out, snr_db, seed);
    return out;
}

int quantize_rss(double m) {
    if (!(m > 0.5)) return 0;
    const double k = std::ceil(m - 0.5);
    return static_cast<int>(std::min(9.0, k));
}

DemuxResult gfft_demux(const BasebandSignal& signal, const SubcarrierPlan& plan, const DemuxOptions& opt) {
    const auto geo = make_geometry(plan);
    if (signal.samples_per_chip != geo.samples_per_chip || std::abs(signal.sample_rate - geo.sample_rate) > 1e-6)
        throw PhyError("signal sampling does not match the plan geometry");
    const std::int64_t chips = signal.chip_count();
    if (chips < 1) throw PhyError("signal shorter than one chip");
    DemuxResult res;
    res.bins.resize(static_cast<std::size_t>(geo.rows * chips));
    const double inv_unit = 1.0 / signal.unit_amplitude;
    if (opt.kernel == Kernel::reference)
        kernels::demux_reference(signal.samples.data(), signal.first_chip, chips, geo, inv_unit, res.bins.data());
    else
        kernels::demux_parallel(signal.samples.data(), signal.first_chip, chips, geo, inv_unit, res.bins.data());
    res.rss.resize(res.bins.size());
    res.magnitude.resize(res.bins.size());
    res.levels.rows = geo.rows;
    res.levels.cols = chips;
    res.levels.first_chip = signal.first_chip;
    res.levels.data.resize(res.bins.size());
    for (std::size_t i = 0; i < res.bins.size(); ++i) {
        res.magnitude[i] = std::abs(res.bins[i]);
        res.rss[i] = opt.coherent ? res.bins[i].real() : res.magnitude[i];
        res.levels.data[i] = static_cast<std::uint8_t>(quantize_rss(res.rss[i]));
    }
    return res;
}

std::vector<double> single_bin_receive(const BasebandSignal& signal, const SubcarrierPlan& plan, int subcarrier_index,
                                       bool coherent) {
    const auto geo = make_geometry(plan);
    if (!plan.contains(subcarrier_index)) throw PhyError("subcarrier not in plan");
    const std::int64_t chips = signal.chip_count();
    if (chips < 1) throw PhyError("signal shorter than one chip");
    std::vector<cplx> bins(static_cast<std::size_t>(chips));
    kernels::demux_row(signal.samples.data(), signal.first_chip, chips, geo, subcarrier_index - 1,
                       1.0 / signal.unit_amplitude, bins.data());
    std::vector<double> out(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) out[i] = coherent ? bins[i].real() : std::abs(bins[i]);
    return out;
}

std::vector<PreambleDetection> detect_preamble(std::span<const std::uint8_t> row, const std::vector<PnSequence>& codes,
                                               const Bits& preamble_bits, double threshold) {
    std::vector<PreambleDetection> out;
    for (std::size_t j = 0; j < codes.size(); ++j) {
        const auto pattern = encode_bits(preamble_bits, codes[j]).chips;
        const auto P = static_cast<std::int64_t>(pattern.size());
        const auto len = static_cast<std::int64_t>(row.size());
        if (len < P) continue;
        double ss = 0;
        for (auto c : pattern) ss += c;
        std::vector<double> score(static_cast<std::size_t>(len - P + 1), 0.0);
        for (std::int64_t o = 0; o + P <= len; ++o) {
            double xs = 0, xx = 0;
            for (std::int64_t k = 0; k < P; ++k) {
                const double x = row[o + k];
                xs += x * pattern[k];
                xx += x * x;
            }
            if (xx == 0 || xs / ss < threshold) continue;
            score[o] = xs / std::sqrt(xx * ss);
        }
        // keep the best offset within any preamble-length neighbourhood
        for (std::int64_t o = 0; o < static_cast<std::int64_t>(score.size()); ++o) {
            if (score[o] < threshold) continue;
            bool best = true;
            for (std::int64_t d = std::max<std::int64_t>(0, o - P + 1);
                 d < std::min<std::int64_t>(score.size(), o + P) && best; ++d)
                if (d != o && (score[d] > score[o] || (score[d] == score[o] && d < o))) best = false;
            if (best) out.push_back({codes[j].index, o, score[o]});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.offset != b.offset ? a.offset < b.offset : a.pn_index < b.pn_index;
    });
    return out;
}

std::vector<PreambleDetection> detect_preamble(std::span<const std::uint8_t> row, const PnSet& set,
                                               const Bits& preamble_bits, double threshold) {
    return detect_preamble(row, set.sequences, preamble_bits, threshold);
}

void write_signal_dump(const std::string& path, const BasebandSignal& signal) {
    {
        std::ofstream hdr(path + ".hdr");
        if (!hdr) throw PhyError("cannot write " + path + ".hdr");
        hdr << std::setprecision(17);
        hdr << "format cf32_le\n";
        hdr << "sample_rate " << signal.sample_rate << "\n";
        hdr << "t0 " << signal.t0 << "\n";
        hdr << "samples " << signal.samples.size() << "\n";
        hdr << "samples_per_chip " << signal.samples_per_chip << "\n";
    }
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw PhyError("cannot write " + path);
    static_assert(std::endian::native == std::endian::little, "dump writer assumes a little-endian host");
    std::vector<float> buf;
    buf.reserve(signal.samples.size() * 2);
    for (const auto& x : signal.samples) {
        buf.push_back(static_cast<float>(x.real()));
        buf.push_back(static_cast<float>(x.imag()));
    }
    bin.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

}  // namespace msnow
