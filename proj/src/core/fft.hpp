#pragma once

#include "common.hpp"

#include <vector>

namespace pcb {

// Unnormalized in-place DFT over a row-major array with the given extents.
// sign = -1 computes sum f e^{-ikx}; sign = +1 computes sum F e^{+ikx}.
// Plans are cached and execution is safe from several threads at once.
void fft_inplace(cplx* data, const std::vector<int>& dims, int sign);

} // namespace pcb
