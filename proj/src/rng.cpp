#include "sfis/rng.hpp"

#include <cmath>

namespace sfis {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
    const std::uint32_t lo0 = std::uint32_t(p0), hi0 = std::uint32_t(p0 >> 32);
    const std::uint32_t lo1 = std::uint32_t(p1), hi1 = std::uint32_t(p1 >> 32);
    const std::uint32_t n0 = hi1 ^ c[1] ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c[3] ^ k1;
    const std::uint32_t n3 = lo0;
    c[0] = n0;
    c[1] = n1;
    c[2] = n2;
    c[3] = n3;
}

// (word + 1/2) / 2^53 from the top 53 bits of a 64-bit lane; never 0 or 1.
inline double to_unit(std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t w = (std::uint64_t(hi) << 32) | lo;
    return (double(w >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::uint64_t seed,
                                               std::uint64_t stream,
                                               std::uint64_t counter) {
    std::uint32_t c[4] = {std::uint32_t(counter), std::uint32_t(counter >> 32),
                          std::uint32_t(stream), std::uint32_t(stream >> 32)};
    std::uint32_t k0 = std::uint32_t(seed);
    std::uint32_t k1 = std::uint32_t(seed >> 32);
    for (int r = 0; r < 10; ++r) {
        round_once(c, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return {c[0], c[1], c[2], c[3]};
}

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t block) {
    const auto w = Philox4x32::block(seed, stream, block);
    const double u0 = to_unit(w[0], w[1]);
    const double u1 = to_unit(w[2], w[3]);
    const double r = std::sqrt(-2.0 * std::log(u0));
    const double a = 2.0 * M_PI * u1;
    return {r * std::cos(a), r * std::sin(a)};
}

std::pair<double, double> GaussianStream::pair() {
    return normal_pair(seed_, stream_, next_++);
}

}  // namespace sfis
