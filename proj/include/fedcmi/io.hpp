#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fedcmi/errors.hpp"

namespace fedcmi {

// Little-endian byte stream helpers for the binary file formats. The host is
// assumed little-endian (checked once at startup of any writer/reader).

inline void require_little_endian() {
  uint32_t probe = 1;
  unsigned char b;
  std::memcpy(&b, &probe, 1);
  if (b != 1) throw IoError("big-endian hosts are not supported");
}

class ByteWriter {
 public:
  void u8(uint8_t v) { bytes_.push_back(v); }
  void u32(uint32_t v) { raw(&v, sizeof v); }
  void u64(uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void magic(const char (&m)[5]) { raw(m, 4); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void f64_block(const double* p, std::size_t n) { raw(p, n * sizeof(double)); }

  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> take() { return std::move(bytes_); }

 private:
  void raw(const void* p, std::size_t n) {
    auto* b = static_cast<const uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  uint8_t u8() { return bytes_[need(1)]; }
  uint32_t u32() { return read_as<uint32_t>(); }
  uint64_t u64() { return read_as<uint64_t>(); }
  double f64() { return read_as<double>(); }
  void magic(const char (&m)[5]) {
    std::size_t at = need(4);
    if (std::memcmp(bytes_.data() + at, m, 4) != 0)
      throw IoError(std::string("bad magic, expected ") + m);
  }
  std::string str() {
    uint32_t n = u32();
    std::size_t at = need(n);
    return std::string(reinterpret_cast<const char*>(bytes_.data() + at), n);
  }
  void f64_block(double* p, std::size_t n) {
    std::size_t at = need(n * sizeof(double));
    std::memcpy(p, bytes_.data() + at, n * sizeof(double));
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  template <typename T>
  T read_as() {
    T v;
    std::memcpy(&v, bytes_.data() + need(sizeof(T)), sizeof(T));
    return v;
  }
  std::size_t need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw IoError("truncated stream");
    std::size_t at = pos_;
    pos_ += n;
    return at;
  }
  const std::vector<uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

inline void write_file(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  auto size = in.tellg();
  in.seekg(0);
  std::vector<uint8_t> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw IoError("read failed: " + path.string());
  return bytes;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

// FNV-1a over a byte stream; used as the dataset fingerprint.
inline uint64_t fnv1a(const std::vector<uint8_t>& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fedcmi
