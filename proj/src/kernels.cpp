#include "msnow/kernels.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace msnow::kernels {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Plans are created once per size under a lock; fftw_execute_dft on distinct
// buffers is safe from many threads.
fftw_plan cached_plan(int n, int sign) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, fftw_plan> plans;
    std::lock_guard lock(mu);
    auto key = std::make_pair(n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::vector<cplx> a(n), b(n);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    fftw_plan p = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, p);
    return p;
}

// Phase of subcarrier row at chip c, evaluated at the chip's half-sample origin:
// offset * (c / D + 1 / (2K)) cycles.
std::vector<cplx> rotation_table(const PhyGeometry& geo) {
    const int D = geo.alpha_inv;
    std::vector<cplx> rot(static_cast<std::size_t>(geo.rows * D));
    for (int r = 0; r < geo.rows; ++r) {
        const int m = geo.offsets[r];
        for (int c = 0; c < D; ++c) {
            const int mc = ((m * c) % D + D) % D;
            const double cycles = static_cast<double>(mc) / D + static_cast<double>(m) / (2.0 * geo.fft_size);
            rot[r * D + c] = std::polar(1.0, kTwoPi * cycles);
        }
    }
    return rot;
}

inline int chip_phase_slot(std::int64_t c, int D) {
    return static_cast<int>(((c % D) + D) % D);
}

// tone[r][n] = exp(j 2 pi m_r n / K) for n < Ns
std::vector<cplx> tone_table(const PhyGeometry& geo) {
    std::vector<cplx> tone(static_cast<std::size_t>(geo.rows * geo.samples_per_chip));
    for (int r = 0; r < geo.rows; ++r)
        for (int n = 0; n < geo.samples_per_chip; ++n)
            tone[r * geo.samples_per_chip + n] =
                std::polar(1.0, kTwoPi * static_cast<double>(geo.offsets[r]) * n / geo.fft_size);
    return tone;
}

}  // namespace

void synthesize_reference(const ChipLevels& levels, const PhyGeometry& geo, double scale, cplx* out) {
    const int ns = geo.samples_per_chip;
    const int D = geo.alpha_inv;
    for (std::int64_t k = 0; k < levels.chips; ++k) {
        const std::int64_t c = levels.first_chip + k;
        for (int n = 0; n < ns; ++n) {
            cplx acc{0.0, 0.0};
            for (int r = 0; r < geo.rows; ++r) {
                const cplx L = levels.at(r, k);
                if (L == cplx{}) continue;
                const int m = geo.offsets[r];
                const int mc = static_cast<int>(((static_cast<std::int64_t>(m) * c) % D + D) % D);
                const double cycles = static_cast<double>(mc) / D + m * (n + 0.5) / geo.fft_size;
                acc += L * std::polar(1.0, kTwoPi * cycles);
            }
            out[k * ns + n] = scale * acc;
        }
    }
}

void synthesize_parallel(const ChipLevels& levels, const PhyGeometry& geo, double scale, cplx* out) {
    const int ns = geo.samples_per_chip;
    const int K = geo.fft_size;
    const int D = geo.alpha_inv;
    const auto rot = rotation_table(geo);
    fftw_plan plan = cached_plan(K, FFTW_BACKWARD);
#pragma omp parallel
    {
        std::vector<cplx> in(K), res(K);
#pragma omp for schedule(static)
        for (std::int64_t k = 0; k < levels.chips; ++k) {
            const std::int64_t c = levels.first_chip + k;
            const int slot = chip_phase_slot(c, D);
            bool any = false;
            std::fill(in.begin(), in.end(), cplx{});
            for (int r = 0; r < geo.rows; ++r) {
                const cplx L = levels.at(r, k);
                if (L == cplx{}) continue;
                in[geo.bin(r)] += scale * L * rot[r * D + slot];
                any = true;
            }
            cplx* dst = out + k * ns;
            if (!any) {
                std::fill(dst, dst + ns, cplx{});
                continue;
            }
            fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                             reinterpret_cast<fftw_complex*>(res.data()));
            std::copy(res.begin(), res.begin() + ns, dst);
        }
    }
}

void demux_reference(const cplx* samples, std::int64_t first_chip, std::int64_t chips, const PhyGeometry& geo,
                     double inv_unit, cplx* bins) {
    const int ns = geo.samples_per_chip;
    const int D = geo.alpha_inv;
    for (int r = 0; r < geo.rows; ++r) {
        const int m = geo.offsets[r];
        for (std::int64_t k = 0; k < chips; ++k) {
            const std::int64_t c = first_chip + k;
            const int mc = static_cast<int>(((static_cast<std::int64_t>(m) * c) % D + D) % D);
            cplx acc{0.0, 0.0};
            for (int n = 0; n < ns; ++n) {
                const double cycles = static_cast<double>(mc) / D + m * (n + 0.5) / geo.fft_size;
                acc += samples[k * ns + n] * std::polar(1.0, -kTwoPi * cycles);
            }
            bins[r * chips + k] = acc * (inv_unit / ns);
        }
    }
}

void demux_parallel(const cplx* samples, std::int64_t first_chip, std::int64_t chips, const PhyGeometry& geo,
                    double inv_unit, cplx* bins) {
    const int ns = geo.samples_per_chip;
    const int K = geo.fft_size;
    const int D = geo.alpha_inv;
    const auto rot = rotation_table(geo);
    const double norm = inv_unit / ns;
    fftw_plan plan = cached_plan(K, FFTW_FORWARD);
#pragma omp parallel
    {
        std::vector<cplx> in(K), res(K);
#pragma omp for schedule(static)
        for (std::int64_t k = 0; k < chips; ++k) {
            const int slot = chip_phase_slot(first_chip + k, D);
            std::copy(samples + k * ns, samples + (k + 1) * ns, in.begin());
            std::fill(in.begin() + ns, in.end(), cplx{});
            fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                             reinterpret_cast<fftw_complex*>(res.data()));
            for (int r = 0; r < geo.rows; ++r)
                bins[r * chips + k] = res[geo.bin(r)] * std::conj(rot[r * D + slot]) * norm;
        }
    }
}

void demux_row(const cplx* samples, std::int64_t first_chip, std::int64_t chips, const PhyGeometry& geo, int row,
               double inv_unit, cplx* out) {
    const int ns = geo.samples_per_chip;
    const int D = geo.alpha_inv;
    const auto rot = rotation_table(geo);
    const auto tone = tone_table(geo);
    const cplx* t = tone.data() + row * ns;
    const double norm = inv_unit / ns;
    for (std::int64_t k = 0; k < chips; ++k) {
        const int slot = chip_phase_slot(first_chip + k, D);
        cplx acc{0.0, 0.0};
        const cplx* x = samples + k * ns;
        for (int n = 0; n < ns; ++n) acc += x[n] * std::conj(t[n]);
        out[k] = acc * std::conj(rot[row * D + slot]) * norm;
    }
}

}  // namespace msnow::kernels
