#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace mosaic {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named substream.
///
/// Every random quantity in the library is drawn from a generator seeded by
/// `derive_seed(master, module, purpose, index)`, so results never depend on
/// the order in which substreams are consumed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view module,
                                 std::string_view purpose, std::uint64_t index = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  auto fnv = [](std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  };
  std::uint64_t h = mix(master);
  h = mix(h ^ fnv(module));
  h = mix(h ^ fnv(purpose));
  h = mix(h ^ index);
  return h;
}

inline Rng make_rng(std::uint64_t master, std::string_view module, std::string_view purpose,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(master, module, purpose, index));
}

inline Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

}  // namespace mosaic
