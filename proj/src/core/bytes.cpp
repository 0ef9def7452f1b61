#include "core/bytes.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace deterra {
namespace {

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

static_assert(std::endian::native == std::endian::little,
              "serialized payloads assume a little-endian host");

}  // namespace

std::string encode_f64_base64(const Vec& values) {
  const std::size_t nbytes = values.size() * sizeof(double);
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  std::string out;
  out.reserve((nbytes + 2) / 3 * 4);
  for (std::size_t i = 0; i < nbytes; i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (i + 1 < nbytes) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (i + 2 < nbytes) chunk |= bytes[i + 2];
    out.push_back(kB64[(chunk >> 18) & 63]);
    out.push_back(kB64[(chunk >> 12) & 63]);
    out.push_back(i + 1 < nbytes ? kB64[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < nbytes ? kB64[chunk & 63] : '=');
  }
  return out;
}

Vec decode_f64_base64(const std::string& text) {
  std::vector<unsigned char> bytes;
  bytes.reserve(text.size() / 4 * 3);
  std::uint32_t chunk = 0;
  int have = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = b64_value(c);
    if (v < 0) throw std::invalid_argument("decode_f64_base64: invalid character");
    chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
    if (++have == 4) {
      bytes.push_back(static_cast<unsigned char>((chunk >> 16) & 0xff));
      bytes.push_back(static_cast<unsigned char>((chunk >> 8) & 0xff));
      bytes.push_back(static_cast<unsigned char>(chunk & 0xff));
      have = 0;
      chunk = 0;
    }
  }
  if (have == 2) {
    bytes.push_back(static_cast<unsigned char>((chunk >> 4) & 0xff));
  } else if (have == 3) {
    bytes.push_back(static_cast<unsigned char>((chunk >> 10) & 0xff));
    bytes.push_back(static_cast<unsigned char>((chunk >> 2) & 0xff));
  } else if (have != 0) {
    throw std::invalid_argument("decode_f64_base64: truncated input");
  }
  if (bytes.size() % sizeof(double) != 0)
    throw std::invalid_argument("decode_f64_base64: payload is not a float64 array");
  Vec out(bytes.size() / sizeof(double));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_u64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace deterra
