#pragma once

#include <complex>
#include <cstdint>

#include "msnow/phy.hpp"

// Per-chip synthesis and demux. The reference versions are direct sums and
// stay serial; the parallel versions use FFTW and split chips across threads.
namespace msnow::kernels {

// out holds levels.chips * Ns samples.
void synthesize_reference(const ChipLevels& levels, const PhyGeometry& geo, double scale, cplx* out);
void synthesize_parallel(const ChipLevels& levels, const PhyGeometry& geo, double scale, cplx* out);

// bins is rows x chips, row-major, normalized by inv_unit.
void demux_reference(const cplx* samples, std::int64_t first_chip, std::int64_t chips, const PhyGeometry& geo,
                     double inv_unit, cplx* bins);
void demux_parallel(const cplx* samples, std::int64_t first_chip, std::int64_t chips, const PhyGeometry& geo,
                    double inv_unit, cplx* bins);

// Single-bin correlator for one row.
void demux_row(const cplx* samples, std::int64_t first_chip, std::int64_t chips, const PhyGeometry& geo, int row,
               double inv_unit, cplx* out);

}  // namespace msnow::kernels
