#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcaptopo {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

enum class ByteOrder { LittleEndian, BigEndian };

/// Bounds-checked integer loads. Out-of-range reads return std::nullopt.
inline std::optional<std::uint16_t> load_u16(ByteView b, std::size_t at, ByteOrder order) {
  if (at > b.size() || b.size() - at < 2) return std::nullopt;
  if (order == ByteOrder::LittleEndian) return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

inline std::optional<std::uint32_t> load_u32(ByteView b, std::size_t at, ByteOrder order) {
  if (at > b.size() || b.size() - at < 4) return std::nullopt;
  std::uint32_t v = 0;
  if (order == ByteOrder::LittleEndian) {
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + i];
  } else {
    for (int i = 0; i < 4; ++i) v = (v << 8) | b[at + i];
  }
  return v;
}

inline std::optional<std::uint64_t> load_u64(ByteView b, std::size_t at, ByteOrder order) {
  auto lo = load_u32(b, at, order);
  auto hi = load_u32(b, at + 4, order);
  if (!lo || !hi) return std::nullopt;
  if (order == ByteOrder::LittleEndian) return (std::uint64_t{*hi} << 32) | *lo;
  return (std::uint64_t{*lo} << 32) | *hi;
}

/// Network-order shorthands used by the dissectors.
inline std::uint16_t be16(ByteView b, std::size_t at) { return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]); }
inline std::uint32_t be32(ByteView b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}

/// Upper-case hex with no separators, e.g. "47414C41".
std::string to_hex(ByteView bytes);

/// Little/big-endian append helpers for writers.
void put_u16(Bytes& out, std::uint16_t v, ByteOrder order);
void put_u32(Bytes& out, std::uint32_t v, ByteOrder order);

}  // namespace pcaptopo
