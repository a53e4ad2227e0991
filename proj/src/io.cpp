#include "hyret/io.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace hyret {

namespace {

template <typename T>
void append_le(std::string& buf, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = sizeof(T); i-- > 0;) buf.push_back(static_cast<char>(bytes[i]));
  } else {
    buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
  }
}

template <typename T>
T read_le(const std::string& buf, std::size_t pos) {
  T v;
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void ByteWriter::u32(std::uint32_t v) { append_le(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { append_le(buf_, v); }

void ByteWriter::f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  append_le(buf_, bits);
}

void ByteWriter::str(std::string_view s) {
  if (s.size() > 0xffffffffull) throw std::runtime_error("string too long to serialize");
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.append(s.data(), s.size());
}

void ByteWriter::write_file(const std::filesystem::path& path, std::string_view magic,
                            std::uint32_t version) const {
  if (magic.size() != 4) throw std::logic_error("magic must be 4 bytes");
  std::string out;
  out.reserve(buf_.size() + 16);
  out.append(magic.data(), 4);
  append_le(out, version);
  out.append(buf_);
  append_le(out, fnv1a(buf_));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

ByteReader::ByteReader(const std::filesystem::path& path, std::string_view magic,
                       std::uint32_t expected_version)
    : source_(path.string()) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + source_);
  std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (raw.size() < 16) throw std::runtime_error("file truncated: " + source_);
  if (raw.compare(0, 4, magic) != 0)
    throw std::runtime_error("bad magic (not a " + std::string(magic) + " file): " + source_);
  std::uint32_t version = read_le<std::uint32_t>(raw, 4);
  if (version != expected_version)
    throw std::runtime_error("unsupported version " + std::to_string(version) + ": " + source_);
  std::uint64_t stored = read_le<std::uint64_t>(raw, raw.size() - 8);
  payload_ = raw.substr(8, raw.size() - 16);
  if (fnv1a(payload_) != stored) throw std::runtime_error("checksum mismatch: " + source_);
}

void ByteReader::need(std::size_t n) {
  if (pos_ + n > payload_.size()) throw std::runtime_error("file truncated: " + source_);
}

std::uint32_t ByteReader::u32() {
  need(4);
  auto v = read_le<std::uint32_t>(payload_, pos_);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  auto v = read_le<std::uint64_t>(payload_, pos_);
  pos_ += 8;
  return v;
}

double ByteReader::f64() {
  std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string ByteReader::str() {
  std::uint32_t n = u32();
  need(n);
  std::string s = payload_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof(buf));
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(f.gcount())), h);
  }
  return h;
}

}  // namespace hyret
