// Reference (direct sums, serial) against parallel (FFTW, OpenMP) kernels on
// the 64-subcarrier plan.
#include <benchmark/benchmark.h>

#include <random>

#include "msnow/kernels.hpp"
#include "msnow/phy.hpp"

using namespace msnow;

namespace {

struct Fixture {
    SubcarrierPlan plan = build_subcarrier_plan(547e6, 560e6, 400e3, 0.5);
    PhyGeometry geo = make_geometry(plan);
    ChipLevels levels;
    BasebandSignal signal;

    explicit Fixture(std::int64_t chips) : levels(geo.rows, 0, chips) {
        std::mt19937 rng(1);
        std::uniform_int_distribution<int> d(0, 9);
        for (auto& v : levels.data) v = d(rng);
        signal = synthesize(levels, geo, 1.0, Kernel::parallel);
    }
};

const Fixture& fixture(std::int64_t chips) {
    static Fixture f(chips);
    return f;
}

void synth(benchmark::State& st, Kernel k) {
    const auto& f = fixture(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(synthesize(f.levels, f.geo, 1.0, k).samples.data());
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void demux(benchmark::State& st, Kernel k) {
    const auto& f = fixture(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(gfft_demux(f.signal, f.plan, DemuxOptions{true, k}).rss.data());
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(synth, reference, Kernel::reference)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(synth, parallel, Kernel::parallel)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(demux, reference, Kernel::reference)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(demux, parallel, Kernel::parallel)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
