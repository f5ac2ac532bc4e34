#include "trajcast/rng.hpp"

#include <cmath>
#include <numbers>

namespace trajcast {

namespace {

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi) {
    const auto p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    return static_cast<std::uint64_t>(p);
}

constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

} // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0 = 0;
        std::uint64_t hi1 = 0;
        const std::uint64_t lo0 = mulhilo(kMult0, counter[0], hi0);
        const std::uint64_t lo1 = mulhilo(kMult1, counter[2], hi1);
        counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return counter;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

void RngStream::refill() {
    if (++counter_[0] == 0) {
        if (++counter_[1] == 0) {
            if (++counter_[2] == 0) {
                ++counter_[3];
            }
        }
    }
    block_ = philox4x64(counter_, key_);
    block_pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
    if (block_pos_ == 4) {
        refill();
    }
    return block_[static_cast<std::size_t>(block_pos_++)];
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // (k + 0.5) / 2^53 lies strictly inside (0, 1), so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi_v<double> * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

double RngStream::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

} // namespace trajcast
