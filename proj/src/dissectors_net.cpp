#include "dissectors.hpp"

#include <algorithm>

namespace pcaptopo::dissectors {

namespace {

constexpr std::uint32_t kEtherIpv4 = 0x0800;
constexpr std::uint32_t kEtherIpv6 = 0x86DD;

Address mac_at(ByteView b, std::size_t at) { return Address::mac(b.subspan(at, 6)); }

LayerOutput make(std::string_view protocol, ByteRange payload, Handoff next) {
  LayerOutput out;
  out.layer.protocol = protocol;
  out.layer.payload = payload;
  out.next = next;
  return out;
}

void add(LayerOutput& out, std::string_view name, FieldValue value) {
  out.layer.fields.push_back(Field{name, std::move(value)});
}

std::int64_t i64(std::uint64_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

LayerOutput leaf(const LayerInput& in, std::vector<Field> fields) {
  LayerOutput out;
  out.layer.protocol = in.protocol;
  out.layer.fields = std::move(fields);
  out.layer.payload = in.range;
  return out;
}

std::optional<LayerOutput> ethernet(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 14) return std::nullopt;
  std::uint16_t type = be16(b, 12);
  std::size_t payload_len = b.size() - 14;
  std::uint32_t next_key = type;
  if (type <= 1500) {
    payload_len = std::min<std::size_t>(payload_len, type);
    next_key = kEtherTypeLlc;
  }
  auto out = make(in.protocol, {in.range.offset + 14, payload_len}, {Table::EtherType, next_key});
  add(out, "eth.dst", mac_at(b, 0));
  add(out, "eth.src", mac_at(b, 6));
  if (type <= 1500) {
    add(out, "eth.len", i64(type));
  } else {
    add(out, "eth.type", i64(type));
  }
  return out;
}

std::optional<LayerOutput> vlan(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 4) return std::nullopt;
  std::uint16_t tci = be16(b, 0);
  std::uint16_t type = be16(b, 2);
  auto out = make(in.protocol, {in.range.offset + 4, b.size() - 4}, {Table::EtherType, type});
  add(out, "vlan.priority", i64(tci >> 13));
  add(out, "vlan.id", i64(tci & 0x0FFF));
  add(out, "vlan.etype", i64(type));
  return out;
}

std::optional<LayerOutput> llc(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 3) return std::nullopt;
  std::uint8_t dsap = b[0];
  std::uint8_t ssap = b[1];
  std::size_t hdr = (b[2] & 0x03) == 0x03 ? 3 : 4;
  if (b.size() < hdr) return std::nullopt;
  Handoff next;
  if (dsap == 0x42 && ssap == 0x42) next = {Table::EtherType, kEtherTypeStp};
  auto out = make(in.protocol, {in.range.offset + hdr, b.size() - hdr}, next);
  add(out, "llc.dsap", i64(dsap));
  add(out, "llc.ssap", i64(ssap));
  return out;
}

std::optional<LayerOutput> null_loopback(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 4) return std::nullopt;
  // Family is in the writer's host byte order for DLT_NULL; accept either.
  std::uint32_t le = b[0] | (b[1] << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
  std::uint32_t family = le <= 0xFFFF ? le : be32(b, 0);
  std::uint32_t ether = 0;
  if (family == 2) ether = kEtherIpv4;
  if (family == 10 || family == 24 || family == 28 || family == 30) ether = kEtherIpv6;
  auto out = make(in.protocol, {in.range.offset + 4, b.size() - 4}, {Table::EtherType, ether});
  add(out, "null.family", i64(family));
  return out;
}

std::optional<LayerOutput> linux_sll(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 16) return std::nullopt;
  std::uint16_t pkttype = be16(b, 0);
  std::uint16_t addrlen = be16(b, 4);
  std::uint16_t proto = be16(b, 14);
  auto out = make(in.protocol, {in.range.offset + 16, b.size() - 16}, {Table::EtherType, proto});
  add(out, "sll.pkttype", i64(pkttype));
  if (addrlen == 6) add(out, "sll.src.eth", mac_at(b, 6));
  add(out, "sll.etype", i64(proto));
  return out;
}

std::optional<LayerOutput> linux_sll2(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 20) return std::nullopt;
  std::uint16_t proto = be16(b, 0);
  std::uint8_t pkttype = b[10];
  std::uint8_t addrlen = b[11];
  auto out = make(in.protocol, {in.range.offset + 20, b.size() - 20}, {Table::EtherType, proto});
  add(out, "sll.pkttype", i64(pkttype));
  if (addrlen == 6) add(out, "sll.src.eth", mac_at(b, 12));
  add(out, "sll.etype", i64(proto));
  return out;
}

std::optional<LayerOutput> raw_ip(const LayerInput& in) {
  auto b = in.bytes();
  if (b.empty()) return std::nullopt;
  std::uint32_t ether = 0;
  if ((b[0] >> 4) == 4) ether = kEtherIpv4;
  if ((b[0] >> 4) == 6) ether = kEtherIpv6;
  LayerOutput out;  // pass-through: raw link types carry no header of their own
  out.layer.payload = in.range;
  out.next = {Table::EtherType, ether};
  return out;
}

std::optional<LayerOutput> arp(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 8) return std::nullopt;
  std::uint16_t htype = be16(b, 0);
  std::uint16_t ptype = be16(b, 2);
  std::size_t hlen = b[4];
  std::size_t plen = b[5];
  std::uint16_t op = be16(b, 6);
  std::size_t need = 8 + 2 * (hlen + plen);
  if (b.size() < need) return std::nullopt;
  auto out = leaf(in, {});
  out.layer.payload = {in.range.offset, need};
  add(out, "arp.hw.type", i64(htype));
  add(out, "arp.proto.type", i64(ptype));
  add(out, "arp.opcode", i64(op));
  if (hlen == 6 && plen == 4) {
    add(out, "arp.src.hw_mac", mac_at(b, 8));
    add(out, "arp.src.proto_ipv4", Address::ipv4(b.subspan(14, 4)));
    add(out, "arp.dst.hw_mac", mac_at(b, 18));
    add(out, "arp.dst.proto_ipv4", Address::ipv4(b.subspan(24, 4)));
  }
  return out;
}

std::optional<LayerOutput> ipv4(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 20) return std::nullopt;
  if ((b[0] >> 4) != 4) return std::nullopt;
  std::size_t ihl = std::size_t{b[0] & 0x0Fu} * 4;
  if (ihl < 20 || ihl > b.size()) return std::nullopt;
  std::size_t total = be16(b, 2);
  if (total < ihl) return std::nullopt;
  std::size_t end = std::min(total, b.size());
  std::uint16_t flags_frag = be16(b, 6);
  std::uint16_t frag_offset = flags_frag & 0x1FFF;
  std::uint8_t proto = b[9];
  Handoff next{Table::IpProto, proto};
  if (frag_offset != 0) next = {};
  auto out = make(in.protocol, {in.range.offset + ihl, end - ihl}, next);
  add(out, "ip.version", i64(4));
  add(out, "ip.hdr_len", i64(ihl));
  add(out, "ip.dsfield", i64(b[1]));
  add(out, "ip.len", i64(total));
  add(out, "ip.id", i64(be16(b, 4)));
  add(out, "ip.flags.df", bool(flags_frag & 0x4000));
  add(out, "ip.flags.mf", bool(flags_frag & 0x2000));
  add(out, "ip.frag_offset", i64(std::uint64_t{frag_offset} * 8));
  add(out, "ip.ttl", i64(b[8]));
  add(out, "ip.proto", i64(proto));
  add(out, "ip.src", Address::ipv4(b.subspan(12, 4)));
  add(out, "ip.dst", Address::ipv4(b.subspan(16, 4)));
  return out;
}

std::optional<LayerOutput> ipv6(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 40) return std::nullopt;
  if ((b[0] >> 4) != 6) return std::nullopt;
  std::size_t plen = be16(b, 4);
  std::size_t end = plen == 0 ? b.size() : std::min(b.size(), 40 + plen);
  std::uint8_t next_header = b[6];
  std::size_t off = 40;
  bool fragment_tail = false;
  // Walk extension headers to the upper-layer protocol.
  for (int guard = 0; guard < 8; ++guard) {
    if (next_header == 0 || next_header == 43 || next_header == 60) {
      if (off + 8 > end) return std::nullopt;
      std::size_t len = (std::size_t{b[off + 1]} + 1) * 8;
      if (off + len > end) return std::nullopt;
      next_header = b[off];
      off += len;
    } else if (next_header == 44) {
      if (off + 8 > end) return std::nullopt;
      fragment_tail = (be16(b, off + 2) & 0xFFF8) != 0;
      next_header = b[off];
      off += 8;
    } else {
      break;
    }
  }
  Handoff next{Table::IpProto, next_header};
  if (fragment_tail) next = {};
  auto out = make(in.protocol, {in.range.offset + off, end - off}, next);
  add(out, "ipv6.version", i64(6));
  add(out, "ipv6.plen", i64(plen));
  add(out, "ipv6.nxt", i64(next_header));
  add(out, "ipv6.hlim", i64(b[7]));
  add(out, "ipv6.src", Address::ipv6(b.subspan(8, 16)));
  add(out, "ipv6.dst", Address::ipv6(b.subspan(24, 16)));
  return out;
}

std::optional<LayerOutput> icmp(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 4) return std::nullopt;
  auto out = leaf(in, {});
  add(out, "icmp.type", i64(b[0]));
  add(out, "icmp.code", i64(b[1]));
  if ((b[0] == 0 || b[0] == 8) && b.size() >= 8) {
    add(out, "icmp.ident", i64(be16(b, 4)));
    add(out, "icmp.seq", i64(be16(b, 6)));
  }
  return out;
}

std::optional<LayerOutput> icmpv6(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 4) return std::nullopt;
  auto out = leaf(in, {});
  add(out, "icmpv6.type", i64(b[0]));
  add(out, "icmpv6.code", i64(b[1]));
  if ((b[0] == 135 || b[0] == 136) && b.size() >= 24) {
    add(out, "icmpv6.nd.target", Address::ipv6(b.subspan(8, 16)));
  }
  return out;
}

std::optional<LayerOutput> tcp(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 20) return std::nullopt;
  std::size_t doff = static_cast<std::size_t>(b[12] >> 4) * 4;
  if (doff < 20 || doff > b.size()) return std::nullopt;
  std::uint16_t sport = be16(b, 0);
  std::uint16_t dport = be16(b, 2);
  std::uint16_t flags = be16(b, 12) & 0x01FF;
  auto out = make(in.protocol, {in.range.offset + doff, b.size() - doff}, {Table::TcpPort, 0, sport, dport});
  add(out, "tcp.srcport", i64(sport));
  add(out, "tcp.dstport", i64(dport));
  add(out, "tcp.seq", i64(be32(b, 4)));
  add(out, "tcp.ack", i64(be32(b, 8)));
  add(out, "tcp.hdr_len", i64(doff));
  add(out, "tcp.flags", i64(flags));
  add(out, "tcp.flags.fin", bool(flags & 0x01));
  add(out, "tcp.flags.syn", bool(flags & 0x02));
  add(out, "tcp.flags.reset", bool(flags & 0x04));
  add(out, "tcp.flags.push", bool(flags & 0x08));
  add(out, "tcp.flags.ack", bool(flags & 0x10));
  add(out, "tcp.flags.urg", bool(flags & 0x20));
  add(out, "tcp.window_size", i64(be16(b, 14)));
  add(out, "tcp.len", i64(b.size() - doff));
  return out;
}

std::optional<LayerOutput> udp(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 8) return std::nullopt;
  std::size_t len = be16(b, 4);
  if (len < 8) return std::nullopt;
  std::size_t end = std::min(len, b.size());
  std::uint16_t sport = be16(b, 0);
  std::uint16_t dport = be16(b, 2);
  auto out = make(in.protocol, {in.range.offset + 8, end - 8}, {Table::UdpPort, 0, sport, dport});
  add(out, "udp.srcport", i64(sport));
  add(out, "udp.dstport", i64(dport));
  add(out, "udp.length", i64(len));
  return out;
}

}  // namespace pcaptopo::dissectors
