#pragma once

#include <array>
#include <cstdint>

namespace trajcast {

// Philox4x64-10 counter-based block cipher. Output is a pure function of
// (counter, key), which is what makes streams splittable: every consumer
// derives its own key from (seed, stream) and walks a private counter.
// Bit-compatible with numpy.random.Philox, modulo numpy's convention of
// advancing the counter before the first block.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

// One deterministic random stream keyed by (seed, stream). Two RngStream
// objects with the same key produce the same sequence regardless of what any
// other stream did, so Monte-Carlo replications can be laid out as
// stream-per-replication and stay independent of scheduling.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01();

    double uniform(double lo, double hi);

    // Standard normal via Box-Muller on open-interval uniforms; draws come in
    // pairs and the second is cached.
    double normal();

    double normal(double mean, double stddev);

    std::uint64_t seed() const { return key_[0]; }
    std::uint64_t stream() const { return key_[1]; }

private:
    void refill();

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> block_{};
    int block_pos_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace trajcast
