#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace seqsense {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// A reproducible random stream identified by (seed, stream id).
///
/// The seed is the Philox key; the stream id occupies the upper half of the
/// counter and the draw index the lower half, so any stream can be opened
/// directly without advancing another one. Copies are independent and replay
/// the same sequence from the point of the copy.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1); safe as an argument to log.
    double uniform_open();
    /// Standard normal (Box-Muller, second variate cached).
    double normal();
    /// Unit-rate exponential.
    double exponential();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int available_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace seqsense
