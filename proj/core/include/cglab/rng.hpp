#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace cglab {

using Rng = std::mt19937_64;

/// Independent stream for (base seed, stream index).
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

/// Uniform double in (0, 1] from the top 53 bits.
inline double uniform_open0(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Fills out with independent standard normals (Box-Muller, two per pair of draws).
inline void fill_normals(Rng& rng, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0(rng)));
    const double a = 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    out[i] = r * std::cos(a);
    out[i + 1] = r * std::sin(a);
  }
  if (i < out.size()) {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0(rng)));
    const double a = 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    out[i] = r * std::cos(a);
  }
}

}  // namespace cglab
