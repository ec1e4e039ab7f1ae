#include "pcaptopo/dissect.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace pcaptopo {

namespace {

std::string addr_text(const ProtocolLayer& l, std::string_view name) {
  auto* v = l.find(name);
  return v && std::holds_alternative<Address>(*v) ? std::get<Address>(*v).to_string() : "?";
}

std::int64_t num(const ProtocolLayer& l, std::string_view name) { return l.integer(name).value_or(0); }

std::string_view dns_type_name(std::int64_t t) {
  switch (t) {
    case 1: return "A";
    case 2: return "NS";
    case 5: return "CNAME";
    case 6: return "SOA";
    case 12: return "PTR";
    case 15: return "MX";
    case 16: return "TXT";
    case 28: return "AAAA";
    case 33: return "SRV";
    case 65: return "HTTPS";
    case 255: return "ANY";
    default: return "";
  }
}

std::string summarize_dns(const ProtocolLayer& l) {
  std::string type(dns_type_name(num(l, "dns.qry.type")));
  if (type.empty()) type = fmt::format("TYPE{}", num(l, "dns.qry.type"));
  std::string name = l.text("dns.qry.name").value_or("");
  bool response = l.flag("dns.flags.response");
  std::string s = fmt::format("Standard query{} 0x{:04x} {} {}", response ? " response" : "", num(l, "dns.id"), type, name);
  if (response) {
    static constexpr std::string_view kRcodes[] = {"", "Format error", "Server failure", "No such name",
                                                   "Not implemented", "Refused"};
    auto rcode = num(l, "dns.flags.rcode");
    if (rcode > 0 && rcode < 6) s += fmt::format(" {}", kRcodes[rcode]);
    for (const auto& f : l.fields) {
      if (f.name == "dns.a") s += " A " + std::get<Address>(f.value).to_string();
      if (f.name == "dns.aaaa") s += " AAAA " + std::get<Address>(f.value).to_string();
      if (f.name == "dns.cname") s += " CNAME " + std::get<std::string>(f.value);
    }
  }
  return s;
}

std::string summarize_tcp(const ProtocolLayer& l) {
  static constexpr std::pair<std::string_view, std::string_view> kFlags[] = {
      {"tcp.flags.fin", "FIN"}, {"tcp.flags.syn", "SYN"}, {"tcp.flags.reset", "RST"},
      {"tcp.flags.push", "PSH"}, {"tcp.flags.ack", "ACK"}, {"tcp.flags.urg", "URG"}};
  std::string flags;
  for (auto [field, name] : kFlags) {
    if (!l.flag(field)) continue;
    if (!flags.empty()) flags += ", ";
    flags += name;
  }
  std::string s = fmt::format("{} -> {} [{}] Seq={}", num(l, "tcp.srcport"), num(l, "tcp.dstport"), flags,
                              num(l, "tcp.seq"));
  if (l.flag("tcp.flags.ack")) s += fmt::format(" Ack={}", num(l, "tcp.ack"));
  s += fmt::format(" Win={} Len={}", num(l, "tcp.window_size"), num(l, "tcp.len"));
  return s;
}

std::string summarize_icmp(const ProtocolLayer& l) {
  auto type = num(l, "icmp.type");
  auto code = num(l, "icmp.code");
  switch (type) {
    case 0:
    case 8:
      return fmt::format("Echo (ping) {} id=0x{:04x}, seq={}", type == 8 ? "request" : "reply", num(l, "icmp.ident"),
                         num(l, "icmp.seq"));
    case 3: return fmt::format("Destination unreachable (code {})", code);
    case 5: return fmt::format("Redirect (code {})", code);
    case 11: return fmt::format("Time-to-live exceeded (code {})", code);
    default: return fmt::format("ICMP type {} code {}", type, code);
  }
}

std::string summarize_icmpv6(const ProtocolLayer& l) {
  auto type = num(l, "icmpv6.type");
  switch (type) {
    case 128: return "Echo (ping) request";
    case 129: return "Echo (ping) reply";
    case 133: return "Router Solicitation";
    case 134: return "Router Advertisement";
    case 135: return "Neighbor Solicitation for " + addr_text(l, "icmpv6.nd.target");
    case 136: return "Neighbor Advertisement " + addr_text(l, "icmpv6.nd.target");
    default: return fmt::format("ICMPv6 type {} code {}", type, num(l, "icmpv6.code"));
  }
}

std::string summarize_arp(const ProtocolLayer& l) {
  auto op = num(l, "arp.opcode");
  if (!l.find("arp.src.proto_ipv4")) return fmt::format("ARP opcode {}", op);
  std::string sender = addr_text(l, "arp.src.proto_ipv4");
  std::string target = addr_text(l, "arp.dst.proto_ipv4");
  if (op == 1) {
    if (sender == target) return "Gratuitous ARP for " + sender + " (Request)";
    return fmt::format("Who has {}? Tell {}", target, sender);
  }
  if (op == 2) {
    if (sender == target) return "Gratuitous ARP for " + sender + " (Reply)";
    return fmt::format("{} is at {}", sender, addr_text(l, "arp.src.hw_mac"));
  }
  return fmt::format("ARP opcode {}", op);
}

std::string summarize_dhcp(const ProtocolLayer& l) {
  static constexpr std::string_view kTypes[] = {"",        "Discover", "Offer", "Request", "Decline",
                                                "ACK",     "NAK",      "Release", "Inform"};
  auto t = l.integer("dhcp.option.dhcp");
  std::string_view name = t && *t > 0 && *t < 9 ? kTypes[*t] : (num(l, "dhcp.type") == 1 ? "Boot Request" : "Boot Reply");
  return fmt::format("DHCP {} - Transaction ID 0x{:08x}", name, num(l, "dhcp.id"));
}

std::string summarize_dhcpv6(const ProtocolLayer& l) {
  static constexpr std::string_view kTypes[] = {"",        "Solicit", "Advertise", "Request", "Confirm", "Renew",
                                                "Rebind",  "Reply",   "Release",   "Decline", "Reconfigure",
                                                "Information-request"};
  auto t = num(l, "dhcpv6.msgtype");
  std::string name = t > 0 && t < 12 ? std::string(kTypes[t]) : fmt::format("Type {}", t);
  return fmt::format("{} XID: 0x{:06x}", name, num(l, "dhcpv6.xid"));
}

std::string summarize_ntp(const ProtocolLayer& l) {
  static constexpr std::string_view kModes[] = {"reserved", "symmetric active", "symmetric passive", "client",
                                                "server",   "broadcast",        "control",           "private"};
  return fmt::format("NTP Version {}, {}", num(l, "ntp.flags.vn"), kModes[num(l, "ntp.flags.mode") & 7]);
}

std::string summarize_snmp(const ProtocolLayer& l) {
  static constexpr std::string_view kPdus[] = {"get-request", "get-next-request", "get-response", "set-request",
                                               "trap",        "getBulkRequest",   "inform-request", "snmpV2-trap",
                                               "report"};
  auto pdu = l.integer("snmp.pdu_type");
  if (!pdu || *pdu < 0 || *pdu > 8) return fmt::format("SNMP version {}", num(l, "snmp.version"));
  return std::string(kPdus[*pdu]);
}

std::string summarize_http(const ProtocolLayer& l) {
  if (auto m = l.text("http.request.method")) {
    return fmt::format("{} {} {}", *m, l.text("http.request.uri").value_or(""),
                       l.text("http.request.version").value_or(""));
  }
  if (auto v = l.text("http.response.version")) {
    return fmt::format("{} {} {}", *v, num(l, "http.response.code"), l.text("http.response.phrase").value_or(""));
  }
  return fmt::format("Continuation ({} bytes)", l.payload.length);
}

std::string summarize_tls(const ProtocolLayer& l) {
  std::vector<std::string> parts;
  for (const auto& f : l.fields) {
    if (f.name == "tls.handshake.type") {
      switch (std::get<std::int64_t>(f.value)) {
        case 1: parts.emplace_back("Client Hello"); break;
        case 2: parts.emplace_back("Server Hello"); break;
        case 4: parts.emplace_back("New Session Ticket"); break;
        case 11: parts.emplace_back("Certificate"); break;
        case 12: parts.emplace_back("Server Key Exchange"); break;
        case 14: parts.emplace_back("Server Hello Done"); break;
        case 16: parts.emplace_back("Client Key Exchange"); break;
        case 20: parts.emplace_back("Finished"); break;
        default: parts.emplace_back("Handshake"); break;
      }
    } else if (f.name == "tls.record.content_type") {
      switch (std::get<std::int64_t>(f.value)) {
        case 20: parts.emplace_back("Change Cipher Spec"); break;
        case 21: parts.emplace_back("Alert"); break;
        case 23: parts.emplace_back("Application Data"); break;
        case 24: parts.emplace_back("Heartbeat"); break;
        default: break;
      }
    }
  }
  if (parts.empty()) return "TLS record";
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += ", ";
    s += p;
  }
  return s;
}

std::string summarize_ssh(const ProtocolLayer& l, const DissectedPacket& p) {
  const auto* tcp = p.layer("tcp");
  bool from_server = tcp && num(*tcp, "tcp.srcport") == 22;
  if (auto banner = l.text("ssh.protocol")) return fmt::format("{}: {}", from_server ? "Server" : "Client", *banner);
  return fmt::format("{}: Encrypted packet (len={})", from_server ? "Server" : "Client", l.payload.length);
}

std::string summarize_lines(const ProtocolLayer& l, std::string_view cmd, std::string_view arg, std::string_view code,
                            std::string_view resp) {
  if (auto c = l.text(cmd)) {
    auto a = l.text(arg).value_or("");
    return a.empty() ? fmt::format("Request: {}", *c) : fmt::format("Request: {} {}", *c, a);
  }
  if (auto c = l.integer(code)) return fmt::format("Response: {} {}", *c, l.text(resp).value_or(""));
  return fmt::format("Data ({} bytes)", l.payload.length);
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

}  // namespace

std::string summarize(const DissectedPacket& packet) {
  if (packet.layers.empty()) return "Data (0 bytes)";
  const auto& top = packet.layers.back();
  const auto proto = top.protocol;
  if (proto == "data") return fmt::format("Data ({} bytes)", top.payload.length);
  if (proto == "dns" || proto == "mdns") return summarize_dns(top);
  if (proto == "tcp") return summarize_tcp(top);
  if (proto == "udp") {
    return fmt::format("{} -> {} Len={}", num(top, "udp.srcport"), num(top, "udp.dstport"), top.payload.length);
  }
  if (proto == "icmp") return summarize_icmp(top);
  if (proto == "icmpv6") return summarize_icmpv6(top);
  if (proto == "arp") return summarize_arp(top);
  if (proto == "dhcp") return summarize_dhcp(top);
  if (proto == "dhcpv6") return summarize_dhcpv6(top);
  if (proto == "ntp") return summarize_ntp(top);
  if (proto == "snmp") return summarize_snmp(top);
  if (proto == "http") return summarize_http(top);
  if (proto == "tls") return summarize_tls(top);
  if (proto == "ssh") return summarize_ssh(top, packet);
  if (proto == "ftp") return summarize_lines(top, "ftp.request.command", "ftp.request.arg", "ftp.response.code", "ftp.response.arg");
  if (proto == "smtp") {
    return summarize_lines(top, "smtp.req.command", "smtp.req.parameter", "smtp.response.code", "smtp.rsp.parameter");
  }
  if (proto == "ip") {
    return fmt::format("Fragmented IP protocol (proto={}, off={})", num(top, "ip.proto"), num(top, "ip.frag_offset"));
  }
  if (proto == "ipv6") return fmt::format("IPv6 fragment (next header {})", num(top, "ipv6.nxt"));
  if (proto == "eth") return fmt::format("Ethernet II, {} -> {}", addr_text(top, "eth.src"), addr_text(top, "eth.dst"));
  if (proto == "vlan") return fmt::format("802.1Q VLAN, ID: {}", num(top, "vlan.id"));
  return fmt::format("{} ({} bytes)", upper(proto), top.payload.length);
}

}  // namespace pcaptopo
