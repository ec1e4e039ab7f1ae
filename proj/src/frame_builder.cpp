#include "pcaptopo/frame_builder.hpp"

#include <algorithm>

namespace pcaptopo::frames {

namespace {

constexpr auto BE = ByteOrder::BigEndian;

void put(Bytes& out, const Address& a) { out.insert(out.end(), a.octets.begin(), a.octets.begin() + a.size()); }
void put(Bytes& out, ByteView b) { out.insert(out.end(), b.begin(), b.end()); }

std::uint32_t pseudo_sum(const Address& src, const Address& dst, std::uint8_t protocol, std::size_t length) {
  Bytes p;
  put(p, src);
  put(p, dst);
  if (src.kind == AddressKind::Ipv6) {
    put_u32(p, static_cast<std::uint32_t>(length), BE);
    put_u32(p, protocol, BE);
  } else {
    p.push_back(0);
    p.push_back(protocol);
    put_u16(p, static_cast<std::uint16_t>(length), BE);
  }
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < p.size(); i += 2) sum += be16(p, i);
  return sum;
}

void set_u16(Bytes& b, std::size_t at, std::uint16_t v) {
  b[at] = static_cast<std::uint8_t>(v >> 8);
  b[at + 1] = static_cast<std::uint8_t>(v);
}

void put_name(Bytes& out, std::string_view name) {
  while (!name.empty()) {
    auto dot = name.find('.');
    auto label = name.substr(0, dot);
    out.push_back(static_cast<std::uint8_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
    if (dot == std::string_view::npos) break;
    name.remove_prefix(dot + 1);
  }
  out.push_back(0);
}

}  // namespace

std::uint16_t internet_checksum(ByteView data, std::uint32_t initial) {
  std::uint64_t sum = initial;
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2) sum += be16(data, i);
  if (i < data.size()) sum += std::uint32_t{data[i]} << 8;
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

Bytes ethernet(const Address& dst, const Address& src, std::uint16_t ethertype, ByteView payload) {
  Bytes out;
  out.reserve(14 + payload.size());
  put(out, dst);
  put(out, src);
  put_u16(out, ethertype, BE);
  put(out, payload);
  return out;
}

Bytes vlan(std::uint16_t id, std::uint16_t ethertype, ByteView payload) {
  Bytes out;
  put_u16(out, id & 0x0FFF, BE);
  put_u16(out, ethertype, BE);
  put(out, payload);
  return out;
}

Bytes ipv4(const Address& src, const Address& dst, std::uint8_t protocol, ByteView payload, std::uint8_t ttl,
           std::uint16_t id, bool dont_fragment) {
  Bytes out;
  out.reserve(20 + payload.size());
  out.push_back(0x45);
  out.push_back(0);
  put_u16(out, static_cast<std::uint16_t>(20 + payload.size()), BE);
  put_u16(out, id, BE);
  put_u16(out, dont_fragment ? 0x4000 : 0, BE);
  out.push_back(ttl);
  out.push_back(protocol);
  put_u16(out, 0, BE);
  put(out, src);
  put(out, dst);
  set_u16(out, 10, internet_checksum(ByteView(out)));
  put(out, payload);
  return out;
}

Bytes ipv6(const Address& src, const Address& dst, std::uint8_t next_header, ByteView payload, std::uint8_t hop_limit) {
  Bytes out;
  put_u32(out, 0x60000000, BE);
  put_u16(out, static_cast<std::uint16_t>(payload.size()), BE);
  out.push_back(next_header);
  out.push_back(hop_limit);
  put(out, src);
  put(out, dst);
  put(out, payload);
  return out;
}

Bytes udp(const Address& src, const Address& dst, std::uint16_t sport, std::uint16_t dport, ByteView payload) {
  Bytes out;
  put_u16(out, sport, BE);
  put_u16(out, dport, BE);
  put_u16(out, static_cast<std::uint16_t>(8 + payload.size()), BE);
  put_u16(out, 0, BE);
  put(out, payload);
  auto sum = internet_checksum(ByteView(out), pseudo_sum(src, dst, 17, out.size()));
  set_u16(out, 6, sum == 0 ? 0xFFFF : sum);
  return out;
}

Bytes tcp(const Address& src, const Address& dst, std::uint16_t sport, std::uint16_t dport, std::uint32_t seq,
          std::uint32_t ack, std::uint8_t flags, ByteView payload, std::uint16_t window) {
  Bytes out;
  put_u16(out, sport, BE);
  put_u16(out, dport, BE);
  put_u32(out, seq, BE);
  put_u32(out, ack, BE);
  out.push_back(5 << 4);
  out.push_back(flags);
  put_u16(out, window, BE);
  put_u16(out, 0, BE);
  put_u16(out, 0, BE);
  put(out, payload);
  set_u16(out, 16, internet_checksum(ByteView(out), pseudo_sum(src, dst, 6, out.size())));
  return out;
}

Bytes icmp_echo(bool request, std::uint16_t ident, std::uint16_t seq, ByteView data) {
  Bytes out;
  out.push_back(request ? 8 : 0);
  out.push_back(0);
  put_u16(out, 0, BE);
  put_u16(out, ident, BE);
  put_u16(out, seq, BE);
  put(out, data);
  set_u16(out, 2, internet_checksum(ByteView(out)));
  return out;
}

Bytes arp(std::uint16_t opcode, const Address& sender_mac, const Address& sender_ip, const Address& target_mac,
          const Address& target_ip) {
  Bytes out;
  put_u16(out, 1, BE);
  put_u16(out, 0x0800, BE);
  out.push_back(6);
  out.push_back(4);
  put_u16(out, opcode, BE);
  put(out, sender_mac);
  put(out, sender_ip);
  put(out, target_mac);
  put(out, target_ip);
  return out;
}

Bytes dns_query(std::uint16_t id, std::string_view name, std::uint16_t qtype) {
  Bytes out;
  put_u16(out, id, BE);
  put_u16(out, 0x0100, BE);
  put_u16(out, 1, BE);
  put_u16(out, 0, BE);
  put_u16(out, 0, BE);
  put_u16(out, 0, BE);
  put_name(out, name);
  put_u16(out, qtype, BE);
  put_u16(out, 1, BE);
  return out;
}

Bytes dns_response(std::uint16_t id, std::string_view name, const std::vector<Address>& answers, std::uint16_t qtype) {
  Bytes out;
  put_u16(out, id, BE);
  put_u16(out, answers.empty() ? 0x8183 : 0x8180, BE);
  put_u16(out, 1, BE);
  put_u16(out, static_cast<std::uint16_t>(answers.size()), BE);
  put_u16(out, 0, BE);
  put_u16(out, 0, BE);
  put_name(out, name);
  put_u16(out, qtype, BE);
  put_u16(out, 1, BE);
  for (const auto& a : answers) {
    put_u16(out, 0xC00C, BE);  // pointer to the question name
    put_u16(out, a.kind == AddressKind::Ipv6 ? 28 : 1, BE);
    put_u16(out, 1, BE);
    put_u32(out, 300, BE);
    put_u16(out, static_cast<std::uint16_t>(a.size()), BE);
    put(out, a);
  }
  return out;
}

Bytes dhcp(bool reply, std::uint32_t xid, const Address& client_mac, const Address& client_ip, const Address& your_ip,
           std::uint8_t message_type) {
  Bytes out(236, 0);
  out[0] = reply ? 2 : 1;
  out[1] = 1;
  out[2] = 6;
  out[4] = static_cast<std::uint8_t>(xid >> 24);
  out[5] = static_cast<std::uint8_t>(xid >> 16);
  out[6] = static_cast<std::uint8_t>(xid >> 8);
  out[7] = static_cast<std::uint8_t>(xid);
  std::copy_n(client_ip.octets.begin(), 4, out.begin() + 12);
  std::copy_n(your_ip.octets.begin(), 4, out.begin() + 16);
  std::copy_n(client_mac.octets.begin(), 6, out.begin() + 28);
  put_u32(out, 0x63825363, BE);
  out.insert(out.end(), {53, 1, message_type, 255});
  return out;
}

Bytes ntp(std::uint8_t mode, std::uint8_t stratum, std::uint64_t transmit_timestamp) {
  Bytes out(48, 0);
  out[0] = static_cast<std::uint8_t>((4 << 3) | (mode & 0x7));
  out[1] = stratum;
  out[2] = 6;
  out[3] = 0xEC;
  for (int i = 0; i < 8; ++i) out[40 + i] = static_cast<std::uint8_t>(transmit_timestamp >> (56 - 8 * i));
  return out;
}

Bytes tls_record(std::uint8_t content_type, ByteView body) {
  Bytes out;
  out.push_back(content_type);
  put_u16(out, 0x0303, BE);
  put_u16(out, static_cast<std::uint16_t>(body.size()), BE);
  put(out, body);
  return out;
}

Bytes text(std::string_view s) { return Bytes(s.begin(), s.end()); }

Address mac_for(const Address& ip) {
  std::uint8_t m[6] = {0x02, 0x00, ip.octets[0], ip.octets[1], ip.octets[2], ip.octets[3]};
  return Address::mac(ByteView(m, 6));
}

}  // namespace pcaptopo::frames
