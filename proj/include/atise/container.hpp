#pragma once

// Versioned binary container shared by dataset bundles and checkpoints.
//
// Layout (all integers little-endian):
//   bytes 0..7    magic, 8 ASCII bytes ("ATISEBND", "ATISECKP")
//   bytes 8..11   u32 format version
//   bytes 12..19  u64 payload length N
//   N bytes       payload
//   32 bytes      SHA-256 of the payload
//
// Payload primitives: u8/u32/u64/i32/i64 fixed width; f64 as the raw IEEE-754
// bit pattern in a u64; strings as u32 length + bytes; vectors as u64 count
// + elements.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace atise {

std::string sha256_hex(std::string_view bytes);
std::string file_sha256_hex(const std::filesystem::path& path);

class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void str(std::string_view s);
  void f64s(std::span<const double> values);
  void i32s(std::span<const std::int32_t> values);

  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

// Every read past the end throws CorruptionError.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::string str();
  std::vector<double> f64s();
  std::vector<std::int32_t> i32s();

  bool at_end() const { return pos_ == data_.size(); }
  void expect_end() const;

 private:
  std::string_view take(std::size_t n);

  std::string_view data_;
  std::size_t pos_ = 0;
};

using Magic = std::array<char, 8>;

std::string encode_container(const Magic& magic, std::uint32_t version, std::string_view payload);
// Returns the payload. Throws CorruptionError (bad magic, truncation, checksum)
// or VersionError.
std::string decode_container(std::string_view bytes, const Magic& magic, std::uint32_t version);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace atise
