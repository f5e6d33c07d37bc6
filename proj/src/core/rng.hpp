#pragma once

#include "common.hpp"

#include <cstdint>
#include <random>

namespace pcb {

// What a stream is used for inside one realization. Keeps source and medium
// draws independent of each other and of their consumption order.
enum class StreamPurpose : std::uint32_t { medium = 1, source = 2, test = 3, quadrature = 4 };

// Random stream addressed by (seed, index, purpose). Two streams built from the
// same address produce bitwise identical sequences.
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    // Circular complex Gaussian with E|w|^2 = 1.
    cplx complex_normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

  private:
    std::uint64_t seed_;
    std::uint64_t index_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> uniform_;
};

} // namespace pcb
