#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "krescale/error.hpp"
#include "krescale/random.hpp"
#include "krescale/tensor.hpp"

// Asserts that `stmt` throws krescale::Error carrying `expected_code`.
#define EXPECT_KRESCALE_ERROR(stmt, expected_code)                                   \
  do {                                                                               \
    try {                                                                            \
      stmt;                                                                          \
      ADD_FAILURE() << "expected " << ::krescale::to_string(expected_code);          \
    } catch (const ::krescale::Error& e) {                                           \
      EXPECT_EQ(e.code(), expected_code) << e.what();                                \
    }                                                                                \
  } while (0)

namespace krescale::test {

inline constexpr double kPi = std::numbers::pi;

inline Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(element_count(shape));
  for (double& v : data) v = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(data));
}

// O((MNC)^2) textbook DFT, independent of the library's separable version.
inline std::vector<std::complex<double>> naive_dft3(const Tensor& field) {
  const std::size_t m = field.dim(0), n = field.dim(1), c = field.rank() == 3 ? field.dim(2) : 1;
  std::vector<std::complex<double>> out(m * n * c);
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t w = 0; w < c; ++w) {
        std::complex<double> acc = 0.0;
        for (std::size_t x = 0; x < m; ++x)
          for (std::size_t y = 0; y < n; ++y)
            for (std::size_t z = 0; z < c; ++z) {
              const double angle = -2.0 * kPi *
                                   (static_cast<double>(u * x) / static_cast<double>(m) +
                                    static_cast<double>(v * y) / static_cast<double>(n) +
                                    static_cast<double>(w * z) / static_cast<double>(c));
              acc += field[(x * n + y) * c + z] * std::polar(1.0, angle);
            }
        out[(u * n + v) * c + w] = acc;
      }
  return out;
}

inline std::string golden_path(const std::string& name) { return std::string(KRESCALE_GOLDEN_DIR) + "/" + name; }
inline std::string model_path(const std::string& name) { return std::string(KRESCALE_MODELS_DIR) + "/" + name; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// Compares `actual` with a checked-in golden file. With KRESCALE_UPDATE_GOLDEN
// set in the environment the golden is rewritten instead.
inline void expect_golden(const std::string& name, const std::string& actual) {
  const std::string path = golden_path(name);
  if (std::getenv("KRESCALE_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << "missing golden " << path;
  EXPECT_EQ(read_file(path), actual) << "golden mismatch: " << name;
}

// Scratch directory removed when the test ends.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = std::filesystem::temp_directory_path() /
            (std::string("krescale_") + info->test_suite_name() + "_" + info->name());
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace krescale::test
