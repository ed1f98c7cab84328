#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rrm {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform double in (0, 1]; never zero so it is safe under log().
constexpr double unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Counter-based standard normal: the same key always yields the same value,
/// which lets hyperplanes be regenerated on demand instead of stored.
inline double keyed_normal(std::uint64_t key) noexcept {
    const double u1 = unit_interval(splitmix64(key ^ 0x5851f42d4c957f2dULL));
    const double u2 = unit_interval(splitmix64(key ^ 0x14057b7ef767814fULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

constexpr std::uint64_t combine_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                    std::uint64_t c) noexcept {
    std::uint64_t x = splitmix64(seed);
    x = splitmix64(x ^ a);
    x = splitmix64(x ^ b);
    return splitmix64(x ^ c);
}

/// Small sequential generator with platform-independent output, used for
/// synthetic data. std:: distributions are implementation-defined, so they
/// are avoided wherever output must be reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64(state_);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    double normal() noexcept { return keyed_normal(next()); }

  private:
    std::uint64_t state_;
};

}  // namespace rrm
