#include "krescale/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "krescale/error.hpp"

namespace krescale {
namespace {

constexpr double kPi = std::numbers::pi;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

SuiteResult run_cosine_family(Suite suite, std::size_t trials, std::uint64_t seed, double tol) {
  Rng rng(seed);
  SuiteResult result{suite, trials, tol};
  for (std::size_t t = 0; t < trials; ++t) {
    const CosineCase draw = draw_cosine_case(rng);
    const RatioReport report = suite == Suite::Ratio
                                   ? verify_ratio(draw.spec, draw.m, draw.n, draw.c, draw.scale)
                                   : verify_attenuation(draw.spec, draw.m, draw.n, draw.c, draw.scale);
    result.worst = std::max(result.worst, report.rel_err);
    if (!(report.rel_err <= tol)) ++result.failures;
  }
  return result;
}

SuiteResult run_conv_family(std::size_t trials, std::uint64_t seed, double tol) {
  Rng rng(seed);
  SuiteResult result{Suite::Conv, 0, tol};
  for (std::size_t a = 1; a <= 3; ++a) {
    for (std::size_t b = 1; b <= 3; ++b) {
      for (std::size_t m = 3; m <= 5; ++m) {
        for (std::size_t n = 3; n <= 5; ++n) {
          for (std::size_t c = 1; c <= 2; ++c) {
            const ScaleFactor scale(a, b);
            for (std::size_t t = 0; t < trials; ++t) {
              const CosineField input = draw_band_limited_field(rng, m, n, c, 3);
              const CosineField kernel = draw_band_limited_field(rng, m, n, c, 3);
              const double bias = rng.uniform(-1.0, 1.0);
              const EquivalenceReport report = verify_conv_equivalence(input, kernel, bias, scale, tol);
              result.worst = std::max(result.worst, report.max_abs_err);
              if (!report.pass) ++result.failures;

              const Tensor fine_in = supersample_field(input, scale);
              const Tensor fine_k = supersample_field(kernel, scale);
              result.worst_route_gap = std::max(
                  result.worst_route_gap,
                  max_abs_diff(circular_conv3d(fine_in, fine_k, bias), circular_conv3d_spectral(fine_in, fine_k, bias)));
              ++result.trials;
            }
          }
        }
      }
    }
  }
  return result;
}

}  // namespace

std::string_view to_string(Suite suite) noexcept {
  switch (suite) {
    case Suite::Ratio: return "ratio";
    case Suite::Attenuation: return "attenuation";
    case Suite::Conv: return "conv";
  }
  return "unknown";
}

Suite parse_suite(std::string_view name) {
  if (name == "ratio") return Suite::Ratio;
  if (name == "attenuation") return Suite::Attenuation;
  if (name == "conv") return Suite::Conv;
  throw Error(ErrorCode::BadMethod, "unknown verification suite '" + std::string(name) + "'");
}

CosineCase draw_cosine_case(Rng& rng) {
  CosineCase draw;
  draw.scale = ScaleFactor(pick(rng, 1, 4), pick(rng, 1, 4));
  // Every bin of a 2x2x2 grid is self-conjugate, so that grid is redrawn.
  do {
    draw.m = pick(rng, 2, 6);
    draw.n = pick(rng, 2, 6);
    draw.c = pick(rng, 2, 6);
  } while (draw.m == 2 && draw.n == 2 && draw.c == 2);
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  draw.spec.amplitude = sign * rng.uniform(0.1, 2.0);
  draw.spec.phase = rng.uniform(-kPi, kPi);
  do {
    draw.spec.u = pick(rng, 0, draw.m - 1);
    draw.spec.v = pick(rng, 0, draw.n - 1);
    draw.spec.w = pick(rng, 0, draw.c - 1);
  } while (is_self_conjugate(draw.spec, draw.m, draw.n, draw.c));
  return draw;
}

CosineField draw_band_limited_field(Rng& rng, std::size_t m, std::size_t n, std::size_t c, std::size_t components) {
  CosineField field{{}, m, n, c};
  for (std::size_t i = 0; i < components; ++i) {
    CosineSpec spec;
    spec.amplitude = rng.uniform(-1.0, 1.0);
    spec.u = pick(rng, 0, (m - 1) / 2);
    spec.v = pick(rng, 0, (n - 1) / 2);
    spec.w = pick(rng, 0, c - 1);
    spec.phase = rng.uniform(-kPi, kPi);
    field.components.push_back(spec);
  }
  return field;
}

SuiteResult run_suite(Suite suite, std::size_t trials, std::uint64_t seed, double tol) {
  if (trials < 1) throw Error(ErrorCode::BadScale, "at least one trial is required");
  SuiteResult result = suite == Suite::Conv ? run_conv_family(trials, seed, tol)
                                            : run_cosine_family(suite, trials, seed, tol);
  result.pass = result.failures == 0;
  return result;
}

}  // namespace krescale
