#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fdrsel {

/**
 * Counter-based random stream (Philox4x32-10).
 *
 * The key is derived from the seed, the counter's upper half from the
 * stream id and substream id. Two streams with different (seed, stream,
 * substream) never share counters, so replicate k draws the same numbers
 * no matter which thread runs it or in which order replicates execute.
 *
 * Satisfies UniformRandomBitGenerator with 64-bit output.
 */
class RngStream
{
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0, std::uint32_t substream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1).
    double uniform();

    /// Standard normal via the Marsaglia polar method.
    double normal();

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    /// Independent child stream sharing seed and stream id.
    RngStream substream(std::uint32_t id) const { return RngStream(seed_, stream_, id); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint32_t substream_;
    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fdrsel
