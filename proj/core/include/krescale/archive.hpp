#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "krescale/tensor.hpp"

namespace krescale {

using NamedTensor = std::pair<std::string, Tensor>;
using TensorMap = std::map<std::string, Tensor>;

// KTA ("Kernel Tensor Archive"), little-endian, no padding:
//
//   "KTA1" | u32 version (=1) | u32 count
//   count x { u32 name_len | name bytes | u32 rank | rank x u64 dims | f64 payload }
//
// Nothing may follow the last entry.
inline constexpr char kArchiveMagic[4] = {'K', 'T', 'A', '1'};
inline constexpr std::uint32_t kArchiveVersion = 1;

// Entries are written in the given order. Names must be unique and nonempty.
void write_archive(std::ostream& sink, const std::vector<NamedTensor>& entries);
void write_archive(std::ostream& sink, const TensorMap& entries);

TensorMap read_archive(std::istream& source);

// File helpers; any stream failure surfaces as IoFailure.
void save_archive(const std::filesystem::path& path, const TensorMap& entries);
TensorMap load_archive(const std::filesystem::path& path);

}  // namespace krescale
