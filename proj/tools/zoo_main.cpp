// Writes the bundled model files: toy_cnn.manifest, toy_cnn.kta and
// vgg16.manifest (VGG-16 weights are shape-only, see README).
#include <fmt/format.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "krescale/archive.hpp"
#include "krescale/error.hpp"
#include "krescale/model_zoo.hpp"

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream sink(path, std::ios::binary | std::ios::trunc);
  sink << text;
  sink.close();
  if (!sink) throw krescale::Error(krescale::ErrorCode::IoFailure, "failed writing '" + path.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the bundled toy CNN and VGG-16 manifests", "krescale-zoo"};
  std::filesystem::path out_dir = "models";
  std::uint64_t seed = krescale::zoo::kToySeed;
  app.add_option("--out-dir", out_dir, "Destination directory")->capture_default_str();
  app.add_option("--seed", seed, "Toy CNN weight seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "toy_cnn.manifest", krescale::zoo::toy_cnn_manifest());
    krescale::save_archive(out_dir / "toy_cnn.kta", krescale::zoo::toy_cnn_weights(seed));
    write_text(out_dir / "vgg16.manifest", krescale::zoo::vgg16_manifest());
  } catch (const std::exception& e) {
    std::cerr << "krescale-zoo: " << e.what() << '\n';
    return 2;
  }
  fmt::print("wrote {}\n", out_dir.string());
  return 0;
}
