#pragma once

#include <cmath>
#include <cstdint>

#include "granusol/types.hpp"

namespace granusol {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: the stream is keyed purely on (seed, tags), so a
/// walker's draw at a given step is a pure function of those labels.  That is
/// what makes runs bit-identical across checkpoints and any loop reordering:
/// nothing about history or scheduling leaks into the stream.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t tag0 = 0,
                        std::uint64_t tag1 = 0, std::uint64_t tag2 = 0) {
    state_ = detail::mix64(seed + 0x9E3779B97F4A7C15ull);
    state_ = detail::mix64(state_ ^ (tag0 + 0xA0761D6478BD642Full));
    state_ = detail::mix64(state_ ^ (tag1 + 0xE7037ED1A0B428DBull));
    state_ = detail::mix64(state_ ^ (tag2 + 0x8EBC6AF09C88C6E3ull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return detail::mix64(state_);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // 1-u keeps the log argument in (0, 1].
    const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
    const double phi = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  Vec3 normal3() {
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return {a, b, c};
  }

  /// Uniform over the solid ball of given radius (rejection from the cube).
  Vec3 in_ball(double radius) {
    while (true) {
      const Vec3 p{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
      if (p.squaredNorm() <= 1.0) return radius * p;
    }
  }

  /// Uniform over an axis-aligned box; degenerate extents collapse exactly.
  Vec3 in_box(const Aabb& box) {
    return {uniform(box.lo.x(), box.hi.x()), uniform(box.lo.y(), box.hi.y()),
            uniform(box.lo.z(), box.hi.z())};
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Stream tags keep independent consumers (walker steps, placement, scatter
/// retries) off each other's draws.
namespace rng_tag {
inline constexpr std::uint64_t kWalkerStep = 1;
inline constexpr std::uint64_t kWalkerInit = 2;
inline constexpr std::uint64_t kPlacement = 3;
inline constexpr std::uint64_t kScatter = 4;
}  // namespace rng_tag

}  // namespace granusol
