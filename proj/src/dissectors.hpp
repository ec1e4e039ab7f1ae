#pragma once

// Built-in dissectors. Each takes the layer's byte range and returns the
// decoded layer plus the next table to consult, or nullopt when malformed.

#include "pcaptopo/dissect.hpp"

namespace pcaptopo::dissectors {

// Pseudo ethertypes outside the 16-bit space for 802.3 frames.
inline constexpr std::uint32_t kEtherTypeLlc = 0x10000;
inline constexpr std::uint32_t kEtherTypeStp = 0x10042;

// link and network
std::optional<LayerOutput> ethernet(const LayerInput& in);
std::optional<LayerOutput> vlan(const LayerInput& in);
std::optional<LayerOutput> llc(const LayerInput& in);
std::optional<LayerOutput> null_loopback(const LayerInput& in);
std::optional<LayerOutput> linux_sll(const LayerInput& in);
std::optional<LayerOutput> linux_sll2(const LayerInput& in);
std::optional<LayerOutput> raw_ip(const LayerInput& in);
std::optional<LayerOutput> arp(const LayerInput& in);
std::optional<LayerOutput> ipv4(const LayerInput& in);
std::optional<LayerOutput> ipv6(const LayerInput& in);
std::optional<LayerOutput> icmp(const LayerInput& in);
std::optional<LayerOutput> icmpv6(const LayerInput& in);
std::optional<LayerOutput> tcp(const LayerInput& in);
std::optional<LayerOutput> udp(const LayerInput& in);

// application
std::optional<LayerOutput> dns(const LayerInput& in);
std::optional<LayerOutput> dns_tcp(const LayerInput& in);
std::optional<LayerOutput> dhcp(const LayerInput& in);
std::optional<LayerOutput> dhcpv6(const LayerInput& in);
std::optional<LayerOutput> ntp(const LayerInput& in);
std::optional<LayerOutput> http(const LayerInput& in);
std::optional<LayerOutput> tls(const LayerInput& in);
std::optional<LayerOutput> ssh(const LayerInput& in);
std::optional<LayerOutput> ftp(const LayerInput& in);
std::optional<LayerOutput> smtp(const LayerInput& in);
std::optional<LayerOutput> snmp(const LayerInput& in);
/// Names the payload after the registered protocol without extracting fields.
std::optional<LayerOutput> label_only(const LayerInput& in);

bool probe_http(ByteView payload);
bool probe_tls(ByteView payload);
bool probe_ssh(ByteView payload);

/// Leaf layer covering the whole input range.
LayerOutput leaf(const LayerInput& in, std::vector<Field> fields);

}  // namespace pcaptopo::dissectors
