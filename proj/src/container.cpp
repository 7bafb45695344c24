#include "atise/container.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "atise/error.hpp"

namespace atise {
namespace {

std::array<unsigned char, 32> sha256_raw(std::string_view bytes) {
  std::array<unsigned char, 32> digest{};
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1 || len != digest.size()) {
    throw Error("SHA-256 computation failed");
  }
  return digest;
}

constexpr std::size_t kHeaderSize = 8 + 4 + 8;
constexpr std::size_t kDigestSize = 32;

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : sha256_raw(bytes)) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xf]);
  }
  return out;
}

std::string file_sha256_hex(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void BinaryWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.append(s);
}

void BinaryWriter::f64s(std::span<const double> values) {
  u64(values.size());
  for (double v : values) f64(v);
}

void BinaryWriter::i32s(std::span<const std::int32_t> values) {
  u64(values.size());
  for (std::int32_t v : values) i32(v);
}

std::string_view BinaryReader::take(std::size_t n) {
  if (n > data_.size() - pos_) throw CorruptionError("unexpected end of data");
  const auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t BinaryReader::u8() { return static_cast<std::uint8_t>(take(1)[0]); }

std::uint32_t BinaryReader::u32() {
  const auto b = take(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  const auto b = take(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  return std::string(take(n));
}

std::vector<double> BinaryReader::f64s() {
  const std::uint64_t n = u64();
  if (n > (data_.size() - pos_) / 8) throw CorruptionError("vector length exceeds remaining data");
  std::vector<double> out(n);
  for (auto& v : out) v = f64();
  return out;
}

std::vector<std::int32_t> BinaryReader::i32s() {
  const std::uint64_t n = u64();
  if (n > (data_.size() - pos_) / 4) throw CorruptionError("vector length exceeds remaining data");
  std::vector<std::int32_t> out(n);
  for (auto& v : out) v = i32();
  return out;
}

void BinaryReader::expect_end() const {
  if (!at_end()) throw CorruptionError("trailing bytes after payload");
}

std::string encode_container(const Magic& magic, std::uint32_t version, std::string_view payload) {
  BinaryWriter header;
  for (char c : magic) header.u8(static_cast<std::uint8_t>(c));
  header.u32(version);
  header.u64(payload.size());
  std::string out = header.bytes();
  out.append(payload);
  const auto digest = sha256_raw(payload);
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return out;
}

std::string decode_container(std::string_view bytes, const Magic& magic, std::uint32_t version) {
  if (bytes.size() < kHeaderSize) throw CorruptionError("file too short for container header");
  if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw CorruptionError("bad magic: expected " + std::string(magic.data(), magic.size()));
  }
  BinaryReader header(bytes.substr(8, 12));
  const std::uint32_t found = header.u32();
  if (found != version) {
    throw VersionError("unsupported format version " + std::to_string(found) + " (expected " +
                       std::to_string(version) + ")");
  }
  const std::uint64_t length = header.u64();
  if (bytes.size() - kHeaderSize < kDigestSize || length != bytes.size() - kHeaderSize - kDigestSize) {
    throw CorruptionError("payload length does not match file size (truncated?)");
  }
  const std::string_view payload = bytes.substr(kHeaderSize, length);
  const auto digest = sha256_raw(payload);
  if (std::memcmp(digest.data(), bytes.data() + kHeaderSize + length, kDigestSize) != 0) {
    throw CorruptionError("payload checksum mismatch");
  }
  return std::string(payload);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace atise
