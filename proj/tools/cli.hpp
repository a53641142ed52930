#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "krescale/resample.hpp"
#include "krescale/spectral.hpp"
#include "krescale/verification.hpp"

namespace krescale::cli {

// 0 success, 1 verification failure, 2 usage or I/O error.
enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2 };

struct CommandOutcome {
  int exit_code = kOk;
  std::vector<std::filesystem::path> report_paths;
};

struct RescaleArgs {
  std::filesystem::path in;
  std::filesystem::path out;
  std::size_t a = 2;
  std::size_t b = 2;
  InterpMethod method = InterpMethod::Bicubic;
  // Kernel names to rescale; empty means every rank-4 tensor.
  std::vector<std::string> tensors;
};

struct VerifyArgs {
  Suite suite = Suite::Ratio;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  // Defaults to 1e-9 for ratio/attenuation and 1e-6 for conv.
  std::optional<double> tol;
};

struct SpectrumArgs {
  std::filesystem::path in;
  std::string tensor;
  std::filesystem::path out;
  SpectrumFormat format = SpectrumFormat::Csv;
  double baseband = 0.5;
};

struct SurgeryArgs {
  std::filesystem::path manifest;
  std::filesystem::path weights;
  std::filesystem::path out_manifest;
  std::filesystem::path out_weights;
  std::size_t m = 2;
  std::size_t n = 2;
  InterpMethod method = InterpMethod::Bicubic;
  bool fc = true;
};

struct AgreeArgs {
  std::filesystem::path manifest;
  std::filesystem::path weights;
  std::size_t m = 2;
  std::size_t n = 2;
  InterpMethod method = InterpMethod::Bicubic;
  std::uint64_t seed = 7;
  std::size_t count = 200;
  double threshold = 0.9;
};

// Each command prints its tab-separated table to `out`. Library errors
// propagate as krescale::Error; run() maps them to exit code 2.
CommandOutcome cmd_rescale(const RescaleArgs& args, std::ostream& out);
CommandOutcome cmd_verify(const VerifyArgs& args, std::ostream& out);
CommandOutcome cmd_spectrum(const SpectrumArgs& args, std::ostream& out);
CommandOutcome cmd_surgery(const SurgeryArgs& args, std::ostream& out);
CommandOutcome cmd_agree(const AgreeArgs& args, std::ostream& out);

// Parses `args` (without the program name) and dispatches to a command.
CommandOutcome run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace krescale::cli
