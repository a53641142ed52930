#include "krescale/archive.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "krescale/error.hpp"

namespace krescale {
namespace {

template <typename UInt>
void put_le(std::ostream& sink, UInt value) {
  std::array<char, sizeof(UInt)> bytes;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  }
  sink.write(bytes.data(), bytes.size());
}

class Reader {
 public:
  explicit Reader(std::istream& source) : source_(source) {}

  void bytes(char* out, std::size_t n, const char* what) {
    source_.read(out, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(source_.gcount()) != n) {
      throw Error(ErrorCode::Truncated, std::string("stream ended inside ") + what);
    }
  }

  template <typename UInt>
  UInt le(const char* what) {
    std::array<unsigned char, sizeof(UInt)> raw;
    bytes(reinterpret_cast<char*>(raw.data()), raw.size(), what);
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) value |= static_cast<UInt>(raw[i]) << (8 * i);
    return value;
  }

  bool at_end() { return source_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& source_;
};

void write_entry(std::ostream& sink, const std::string& name, const Tensor& tensor) {
  put_le<std::uint32_t>(sink, static_cast<std::uint32_t>(name.size()));
  sink.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_le<std::uint32_t>(sink, static_cast<std::uint32_t>(tensor.rank()));
  for (std::size_t extent : tensor.shape()) put_le<std::uint64_t>(sink, extent);
  for (double v : tensor.data()) put_le<std::uint64_t>(sink, std::bit_cast<std::uint64_t>(v));
}

template <typename Range>
void write_all(std::ostream& sink, const Range& entries, std::size_t count) {
  std::set<std::string_view> seen;
  for (const auto& [name, tensor] : entries) {
    if (name.empty()) throw Error(ErrorCode::DuplicateName, "archive entry with empty name");
    if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateName, "duplicate archive entry '" + name + "'");
  }
  sink.write(kArchiveMagic, sizeof(kArchiveMagic));
  put_le<std::uint32_t>(sink, kArchiveVersion);
  put_le<std::uint32_t>(sink, static_cast<std::uint32_t>(count));
  for (const auto& [name, tensor] : entries) write_entry(sink, name, tensor);
  if (!sink) throw Error(ErrorCode::IoFailure, "failed writing archive");
}

}  // namespace

void write_archive(std::ostream& sink, const std::vector<NamedTensor>& entries) {
  write_all(sink, entries, entries.size());
}

void write_archive(std::ostream& sink, const TensorMap& entries) { write_all(sink, entries, entries.size()); }

TensorMap read_archive(std::istream& source) {
  Reader in(source);
  std::array<char, 4> magic{};
  source.read(magic.data(), magic.size());
  if (source.gcount() != 4 || !std::equal(magic.begin(), magic.end(), kArchiveMagic)) {
    throw Error(ErrorCode::BadMagic, "stream does not start with KTA1");
  }
  const auto version = in.le<std::uint32_t>("version");
  if (version != kArchiveVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "archive version " + std::to_string(version));
  }
  const auto count = in.le<std::uint32_t>("entry count");

  TensorMap out;
  for (std::uint32_t entry = 0; entry < count; ++entry) {
    const auto name_len = in.le<std::uint32_t>("name length");
    std::string name;
    // Grow in bounded chunks so a corrupt length cannot force a huge allocation.
    constexpr std::size_t kChunk = 1 << 16;
    for (std::size_t done = 0; done < name_len;) {
      const std::size_t n = std::min<std::size_t>(kChunk, name_len - done);
      name.resize(done + n);
      in.bytes(name.data() + done, n, "entry name");
      done += n;
    }
    if (name.empty()) throw Error(ErrorCode::DuplicateName, "archive entry with empty name");

    const auto rank = in.le<std::uint32_t>("rank");
    if (rank < 1 || rank > kMaxRank) {
      throw Error(ErrorCode::BadRank, "entry '" + name + "' has rank " + std::to_string(rank));
    }
    Shape shape(rank);
    for (auto& extent : shape) extent = static_cast<std::size_t>(in.le<std::uint64_t>("dims"));
    check_shape(shape);

    const std::size_t n = element_count(shape);
    std::vector<double> data;
    data.reserve(std::min<std::size_t>(n, kChunk));
    std::vector<unsigned char> raw;
    for (std::size_t done = 0; done < n;) {
      const std::size_t batch = std::min<std::size_t>(kChunk, n - done);
      raw.resize(batch * 8);
      in.bytes(reinterpret_cast<char*>(raw.data()), raw.size(), "payload");
      for (std::size_t i = 0; i < batch; ++i) {
        std::uint64_t bits = 0;
        for (std::size_t b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(raw[8 * i + b]) << (8 * b);
        data.push_back(std::bit_cast<double>(bits));
      }
      done += batch;
    }

    if (!out.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw Error(ErrorCode::DuplicateName, "duplicate archive entry '" + name + "'");
    }
  }
  if (!in.at_end()) throw Error(ErrorCode::TrailingBytes, "bytes follow the last archive entry");
  return out;
}

void save_archive(const std::filesystem::path& path, const TensorMap& entries) {
  std::ofstream sink(path, std::ios::binary | std::ios::trunc);
  if (!sink) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  write_archive(sink, entries);
  sink.flush();
  if (!sink) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

TensorMap load_archive(const std::filesystem::path& path) {
  std::ifstream source(path, std::ios::binary);
  if (!source) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_archive(source);
}

}  // namespace krescale
