#pragma once

// Seeded random streams. Every replication or Monte Carlo draw gets its own
// engine keyed by (master seed, stream path), so results never depend on
// how work is scheduled across threads.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pfa {

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

    double normal() { return normal_(engine_); }
    /// Uniform on the open interval (0, 1).
    double uniform();
    std::uint64_t bits() { return engine_(); }
    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

// Stream tags keep independent uses of the same index apart.
namespace stream {
inline constexpr std::uint64_t kDesign = 1;
inline constexpr std::uint64_t kStatistics = 2;
inline constexpr std::uint64_t kFactorDraw = 3;
inline constexpr std::uint64_t kPlacement = 4;
inline constexpr std::uint64_t kVariance = 5;
inline constexpr std::uint64_t kControl = 6;
}  // namespace stream

}  // namespace pfa
