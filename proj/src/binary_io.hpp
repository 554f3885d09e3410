#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

// Little-endian primitives shared by the MVFT and MVIX codecs.
namespace mret::detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename U>
U byteswap_if_big(U value) noexcept {
  if constexpr (std::endian::native == std::endian::big) {
    U out{};
    auto* src = reinterpret_cast<const unsigned char*>(&value);
    auto* dst = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(U); ++i) dst[i] = src[sizeof(U) - 1 - i];
    return out;
  } else {
    return value;
  }
}

inline void put_u32(std::string& buf, std::uint32_t v) {
  v = byteswap_if_big(v);
  buf.append(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f32(std::string& buf, float f) {
  put_u32(buf, std::bit_cast<std::uint32_t>(f));
}

inline void put_f64(std::string& buf, double f) {
  auto v = byteswap_if_big(std::bit_cast<std::uint64_t>(f));
  buf.append(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t get_u32(const unsigned char* p) noexcept {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  return byteswap_if_big(v);
}

inline float get_f32(const unsigned char* p) noexcept {
  return std::bit_cast<float>(get_u32(p));
}

inline double get_f64(const unsigned char* p) noexcept {
  std::uint64_t v;
  std::memcpy(&v, p, sizeof v);
  return std::bit_cast<double>(byteswap_if_big(v));
}

/// Reads up to `count` bytes in bounded chunks so a lying length field
/// cannot force a huge allocation. Returns fewer bytes on EOF.
inline std::string read_up_to(std::istream& in, std::uint64_t count) {
  constexpr std::uint64_t kChunk = 1u << 20;
  std::string out;
  while (out.size() < count) {
    const auto want = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, count - out.size()));
    const auto old = out.size();
    out.resize(old + want);
    in.read(out.data() + old, static_cast<std::streamsize>(want));
    const auto got = static_cast<std::size_t>(in.gcount());
    out.resize(old + got);
    if (got < want) break;
  }
  return out;
}

/// True when the stream has no bytes left.
inline bool at_eof(std::istream& in) {
  return in.peek() == std::char_traits<char>::eof();
}

}  // namespace mret::detail
