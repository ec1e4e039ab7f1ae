#include "pcaptopo/address.hpp"

#include <arpa/inet.h>
#include <fmt/format.h>

#include <algorithm>
#include <cstring>

namespace pcaptopo {

std::size_t Address::size() const {
  switch (kind) {
    case AddressKind::Ipv4: return 4;
    case AddressKind::Ipv6: return 16;
    case AddressKind::Mac: return 6;
  }
  return 0;
}

std::string Address::to_string() const {
  switch (kind) {
    case AddressKind::Ipv4:
      return fmt::format("{}.{}.{}.{}", octets[0], octets[1], octets[2], octets[3]);
    case AddressKind::Mac:
      return fmt::format("{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}", octets[0], octets[1], octets[2], octets[3],
                         octets[4], octets[5]);
    case AddressKind::Ipv6: {
      char buf[INET6_ADDRSTRLEN] = {};
      ::inet_ntop(AF_INET6, octets.data(), buf, sizeof(buf));
      return buf;
    }
  }
  return {};
}

Address Address::ipv4(ByteView four) {
  Address a{AddressKind::Ipv4, {}};
  std::copy_n(four.begin(), 4, a.octets.begin());
  return a;
}

Address Address::ipv4(std::uint32_t host_order) {
  std::uint8_t b[4] = {static_cast<std::uint8_t>(host_order >> 24), static_cast<std::uint8_t>(host_order >> 16),
                       static_cast<std::uint8_t>(host_order >> 8), static_cast<std::uint8_t>(host_order)};
  return ipv4(ByteView(b, 4));
}

Address Address::ipv6(ByteView sixteen) {
  Address a{AddressKind::Ipv6, {}};
  std::copy_n(sixteen.begin(), 16, a.octets.begin());
  return a;
}

Address Address::mac(ByteView six) {
  Address a{AddressKind::Mac, {}};
  std::copy_n(six.begin(), 6, a.octets.begin());
  return a;
}

namespace {

std::optional<Address> parse_mac(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  char sep = text[2];
  if (sep != ':' && sep != '-') return std::nullopt;
  std::uint8_t b[6];
  for (int i = 0; i < 6; ++i) {
    if (i > 0 && text[i * 3 - 1] != sep) return std::nullopt;
    unsigned v = 0;
    for (int j = 0; j < 2; ++j) {
      char c = text[i * 3 + j];
      v <<= 4;
      if (c >= '0' && c <= '9') v |= c - '0';
      else if (c >= 'a' && c <= 'f') v |= c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') v |= c - 'A' + 10;
      else return std::nullopt;
    }
    b[i] = static_cast<std::uint8_t>(v);
  }
  return Address::mac(ByteView(b, 6));
}

}  // namespace

std::optional<Address> Address::parse(std::string_view text, AddressKind kind) {
  if (text.empty() || text.size() > 64) return std::nullopt;
  std::string s(text);
  switch (kind) {
    case AddressKind::Ipv4: {
      std::uint8_t b[4];
      if (::inet_pton(AF_INET, s.c_str(), b) != 1) return std::nullopt;
      return ipv4(ByteView(b, 4));
    }
    case AddressKind::Ipv6: {
      std::uint8_t b[16];
      if (::inet_pton(AF_INET6, s.c_str(), b) != 1) return std::nullopt;
      return ipv6(ByteView(b, 16));
    }
    case AddressKind::Mac: return parse_mac(text);
  }
  return std::nullopt;
}

std::optional<Address> Address::parse(std::string_view text) {
  for (auto kind : {AddressKind::Ipv4, AddressKind::Mac, AddressKind::Ipv6}) {
    if (auto a = parse(text, kind)) return a;
  }
  return std::nullopt;
}

std::string_view kind_name(AddressKind kind) {
  switch (kind) {
    case AddressKind::Ipv4: return "ipv4";
    case AddressKind::Ipv6: return "ipv6";
    case AddressKind::Mac: return "mac";
  }
  return "unknown";
}

}  // namespace pcaptopo
