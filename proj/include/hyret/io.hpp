#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hyret {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// splitmix64; the standard finalizer makes single-step derivations usable as
// independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  return splitmix64(s);
}

// Uniform double in [0, 1) from 64 random bits.
inline double unit_real(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Little-endian buffer writer for the versioned binary containers (index,
// checkpoint, collection). Payload is framed as
//   magic(4) | version(u32) | payload | fnv1a(payload)(u64)
class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(std::string_view s);  // u32 length + bytes
  const std::string& buffer() const { return buf_; }
  void write_file(const std::filesystem::path& path, std::string_view magic,
                  std::uint32_t version) const;

 private:
  std::string buf_;
};

class ByteReader {
 public:
  // Validates magic, version and payload checksum; throws std::runtime_error.
  ByteReader(const std::filesystem::path& path, std::string_view magic,
             std::uint32_t expected_version);

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  bool done() const { return pos_ == payload_.size(); }

 private:
  void need(std::size_t n);
  std::string payload_;
  std::size_t pos_ = 0;
  std::string source_;
};

std::uint64_t file_digest(const std::filesystem::path& path);

}  // namespace hyret
