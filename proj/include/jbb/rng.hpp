// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#ifndef JBB_RNG_HPP
#define JBB_RNG_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace jbb
{

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A generator is identified by (seed, stream). Streams are independent, so a
// parallel loop hands stream i to chunk i and gets results that do not depend on
// which worker ran the chunk. Satisfies UniformRandomBitGenerator.
class CounterRng
{
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Child generator whose stream id is derived from this stream and index.
    CounterRng substream(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    double uniform();                                    // [0, 1)
    double normal() { return normal_(*this); }            // N(0, 1)
    std::complex<double> complex_normal(double variance); // CN(0, variance)

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

// One Philox4x32 block with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

} // namespace jbb

#endif
