#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "krescale/conv_oracle.hpp"
#include "krescale/random.hpp"
#include "krescale/spectral.hpp"

namespace krescale {

// Randomized verification families for the amplitude-ratio, attenuation and
// scaled-convolution identities.
//
// ratio / attenuation: `trials` independent draws of a, b in [1, 4],
//   M, N, C in [2, 6], amplitude in +-[0.1, 2], phase in [-pi, pi) and a
//   frequency anywhere on the base grid that is not its own conjugate bin.
// conv: `trials` draws for every configuration a, b in [1, 3],
//   M, N in {3, 4, 5}, C in {1, 2}; input and kernel are 3-component fields
//   with spatial frequencies below Nyquist (2u < M, 2v < N).
enum class Suite { Ratio, Attenuation, Conv };

std::string_view to_string(Suite suite) noexcept;
Suite parse_suite(std::string_view name);

struct SuiteResult {
  Suite suite = Suite::Ratio;
  std::size_t trials = 0;
  double tol = 0.0;
  // Worst relative error (ratio, attenuation) or absolute error (conv).
  double worst = 0.0;
  // conv only: worst gap between the spatial and spectral circular routes.
  double worst_route_gap = 0.0;
  std::size_t failures = 0;
  bool pass = false;
};

struct CosineCase {
  CosineSpec spec;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t c = 0;
  ScaleFactor scale{1, 1};
};

CosineCase draw_cosine_case(Rng& rng);

// A field of `components` cosines on (m, n, c) with 2u < m and 2v < n.
CosineField draw_band_limited_field(Rng& rng, std::size_t m, std::size_t n, std::size_t c, std::size_t components);

SuiteResult run_suite(Suite suite, std::size_t trials, std::uint64_t seed, double tol);

}  // namespace krescale
