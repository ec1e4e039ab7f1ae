#pragma once

#include "pcaptopo/address.hpp"
#include "pcaptopo/bytes.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

// Builders for well-formed wire frames. Used by the demo generator and by tests.
namespace pcaptopo::frames {

namespace tcp_flag {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
inline constexpr std::uint8_t urg = 0x20;
}  // namespace tcp_flag

inline constexpr std::uint16_t kEtherIpv4 = 0x0800;
inline constexpr std::uint16_t kEtherArp = 0x0806;
inline constexpr std::uint16_t kEtherIpv6 = 0x86DD;
inline constexpr std::uint16_t kEtherVlan = 0x8100;

Bytes ethernet(const Address& dst, const Address& src, std::uint16_t ethertype, ByteView payload);
Bytes vlan(std::uint16_t id, std::uint16_t ethertype, ByteView payload);

/// IPv4 header with a valid checksum. `payload` is the transport segment.
Bytes ipv4(const Address& src, const Address& dst, std::uint8_t protocol, ByteView payload, std::uint8_t ttl = 64,
           std::uint16_t id = 0, bool dont_fragment = true);
Bytes ipv6(const Address& src, const Address& dst, std::uint8_t next_header, ByteView payload,
           std::uint8_t hop_limit = 64);

/// UDP and TCP checksums use the pseudo-header of src/dst (IPv4 or IPv6).
Bytes udp(const Address& src, const Address& dst, std::uint16_t sport, std::uint16_t dport, ByteView payload);
Bytes tcp(const Address& src, const Address& dst, std::uint16_t sport, std::uint16_t dport, std::uint32_t seq,
          std::uint32_t ack, std::uint8_t flags, ByteView payload, std::uint16_t window = 64240);

Bytes icmp_echo(bool request, std::uint16_t ident, std::uint16_t seq, ByteView data);
Bytes arp(std::uint16_t opcode, const Address& sender_mac, const Address& sender_ip, const Address& target_mac,
          const Address& target_ip);

Bytes dns_query(std::uint16_t id, std::string_view name, std::uint16_t qtype = 1);
/// Response echoing the question, with one A record per answer (empty means NXDOMAIN).
Bytes dns_response(std::uint16_t id, std::string_view name, const std::vector<Address>& answers,
                   std::uint16_t qtype = 1);

/// BOOTP/DHCP message with the magic cookie and option 53.
Bytes dhcp(bool reply, std::uint32_t xid, const Address& client_mac, const Address& client_ip,
           const Address& your_ip, std::uint8_t message_type);
Bytes ntp(std::uint8_t mode, std::uint8_t stratum, std::uint64_t transmit_timestamp);
Bytes tls_record(std::uint8_t content_type, ByteView body);
Bytes text(std::string_view s);

std::uint16_t internet_checksum(ByteView data, std::uint32_t initial = 0);

/// Locally administered MAC derived from an IPv4 address (02:00:a:b:c:d).
Address mac_for(const Address& ip);

}  // namespace pcaptopo::frames
