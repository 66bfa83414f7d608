#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace sfis {

// Counter-based generator: every (seed, stream, block) triple maps to an
// independent 128-bit word deterministically, so trajectories can be
// assigned fixed streams and replayed identically under any scheduling.
struct Philox4x32 {
    static std::array<std::uint32_t, 4> block(std::uint64_t seed,
                                              std::uint64_t stream,
                                              std::uint64_t counter);
};

// Stream id namespaces; keeps different subsystems off each other's
// streams when they share one master seed.
inline constexpr std::uint64_t kStreamEstimator = 0;
inline constexpr std::uint64_t kStreamValidate = 1ull << 40;
inline constexpr std::uint64_t kStreamAveraging = 2ull << 40;
inline constexpr std::uint64_t kStreamProbe = 3ull << 40;

// One Philox block yields exactly one pair of standard normals.
// Consumers draw whole pairs at a fixed rate per step, which keeps
// coupled simulations aligned on the same increments.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    std::pair<double, double> pair();

    void reset() { next_ = 0; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t next_ = 0;
};

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t block);

}  // namespace sfis
