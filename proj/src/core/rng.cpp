#include "rng.hpp"

#include <cmath>

namespace pcb {

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose)
    : seed_(seed), index_(index), uniform_(0.0, 1.0)
{
    std::seed_seq seq{std::uint32_t(seed & 0xffffffffu), std::uint32_t(seed >> 32),
                      std::uint32_t(index & 0xffffffffu), std::uint32_t(index >> 32),
                      std::uint32_t(purpose)};
    engine_.seed(seq);
}

cplx RandomStream::complex_normal()
{
    double a = normal();
    double b = normal();
    return {a * M_SQRT1_2, b * M_SQRT1_2};
}

} // namespace pcb
