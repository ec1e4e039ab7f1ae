#pragma once

#include "pcaptopo/bytes.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pcaptopo {

// Declaration order is the canonical ordering between kinds.
enum class AddressKind : std::uint8_t { Ipv4, Ipv6, Mac };

/// IPv4, IPv6 or MAC address. Compares by (kind, binary form); text is only a rendering.
struct Address {
  AddressKind kind = AddressKind::Ipv4;
  std::array<std::uint8_t, 16> octets{};

  auto operator<=>(const Address&) const = default;

  std::size_t size() const;
  std::string to_string() const;

  static Address ipv4(ByteView four);
  static Address ipv4(std::uint32_t host_order);
  static Address ipv6(ByteView sixteen);
  static Address mac(ByteView six);

  /// Accepts dotted IPv4, RFC 4291 IPv6 text, and MAC with ':' or '-' separators.
  static std::optional<Address> parse(std::string_view text);
  static std::optional<Address> parse(std::string_view text, AddressKind kind);
};

std::string_view kind_name(AddressKind kind);

}  // namespace pcaptopo
