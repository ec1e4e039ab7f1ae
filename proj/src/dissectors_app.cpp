#include "dissectors.hpp"

#include <algorithm>
#include <cctype>

namespace pcaptopo::dissectors {

namespace {

std::int64_t i64(std::uint64_t v) { return static_cast<std::int64_t>(v); }

void add(LayerOutput& out, std::string_view name, FieldValue value) {
  out.layer.fields.push_back(Field{name, std::move(value)});
}

std::string printable(ByteView b) {
  std::string s;
  s.reserve(b.size());
  for (auto c : b) s.push_back(c >= 0x20 && c < 0x7F ? static_cast<char>(c) : '.');
  return s;
}

/// First line of a text payload without its terminator, or nullopt if the
/// bytes before the terminator are not printable text.
std::optional<std::string> first_line(ByteView b, std::size_t max = 1024) {
  std::size_t n = 0;
  while (n < b.size() && n < max && b[n] != '\n') {
    if (b[n] != '\r' && b[n] != '\t' && (b[n] < 0x20 || b[n] >= 0x7F)) return std::nullopt;
    ++n;
  }
  std::size_t len = n;
  if (len > 0 && b[len - 1] == '\r') --len;
  return std::string(reinterpret_cast<const char*>(b.data()), len);
}

std::pair<std::string, std::string> split_word(const std::string& line) {
  auto sp = line.find(' ');
  if (sp == std::string::npos) return {line, ""};
  return {line.substr(0, sp), line.substr(sp + 1)};
}

bool is_status_code(std::string_view w) {
  return w.size() == 3 && std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// ---- DNS -------------------------------------------------------------------

// Decodes a possibly-compressed name starting at `at`. On success `after`
// is the offset just past the name in the original (uncompressed) position.
bool read_dns_name(ByteView msg, std::size_t at, std::string& name, std::size_t& after) {
  name.clear();
  std::size_t pos = at;
  bool jumped = false;
  int hops = 0;
  while (true) {
    if (pos >= msg.size()) return false;
    std::uint8_t len = msg[pos];
    if ((len & 0xC0) == 0xC0) {
      if (pos + 1 >= msg.size() || ++hops > 16) return false;
      if (!jumped) after = pos + 2;
      jumped = true;
      pos = ((len & 0x3F) << 8) | msg[pos + 1];
      continue;
    }
    if (len & 0xC0) return false;
    if (len == 0) {
      if (!jumped) after = pos + 1;
      break;
    }
    if (pos + 1 + len > msg.size()) return false;
    if (!name.empty()) name.push_back('.');
    name += printable(msg.subspan(pos + 1, len));
    if (name.size() > 255) return false;
    pos += 1 + len;
  }
  if (name.empty()) name = "<Root>";
  return true;
}

std::optional<LayerOutput> dns_message(const LayerInput& in, ByteView msg) {
  if (msg.size() < 12) return std::nullopt;
  std::uint16_t id = be16(msg, 0);
  std::uint16_t flags = be16(msg, 2);
  std::uint16_t qdcount = be16(msg, 4);
  std::uint16_t ancount = be16(msg, 6);
  auto out = leaf(in, {});
  add(out, "dns.id", i64(id));
  add(out, "dns.flags.response", bool(flags & 0x8000));
  add(out, "dns.flags.opcode", i64((flags >> 11) & 0xF));
  add(out, "dns.flags.rcode", i64(flags & 0xF));
  add(out, "dns.count.queries", i64(qdcount));
  add(out, "dns.count.answers", i64(ancount));
  std::size_t pos = 12;
  for (std::uint16_t q = 0; q < qdcount; ++q) {
    std::string name;
    std::size_t after = 0;
    if (!read_dns_name(msg, pos, name, after) || after + 4 > msg.size()) return std::nullopt;
    add(out, "dns.qry.name", name);
    add(out, "dns.qry.type", i64(be16(msg, after)));
    add(out, "dns.qry.class", i64(be16(msg, after + 2)));
    pos = after + 4;
  }
  // Answers are decoded best-effort; a damaged answer section keeps the question.
  for (std::uint16_t a = 0; a < ancount; ++a) {
    std::string name;
    std::size_t after = 0;
    if (!read_dns_name(msg, pos, name, after) || after + 10 > msg.size()) break;
    std::uint16_t type = be16(msg, after);
    std::uint16_t rdlen = be16(msg, after + 8);
    std::size_t rdata = after + 10;
    if (rdata + rdlen > msg.size()) break;
    if (type == 1 && rdlen == 4) add(out, "dns.a", Address::ipv4(msg.subspan(rdata, 4)));
    if (type == 28 && rdlen == 16) add(out, "dns.aaaa", Address::ipv6(msg.subspan(rdata, 16)));
    if (type == 5) {
      std::string cname;
      std::size_t ignored = 0;
      if (read_dns_name(msg, rdata, cname, ignored)) add(out, "dns.cname", cname);
    }
    pos = rdata + rdlen;
  }
  return out;
}

}  // namespace

std::optional<LayerOutput> dns(const LayerInput& in) { return dns_message(in, in.bytes()); }

std::optional<LayerOutput> dns_tcp(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 2) return std::nullopt;
  std::size_t len = be16(b, 0);
  auto msg = b.subspan(2, std::min(len, b.size() - 2));
  return dns_message(in, msg);
}

// ---- DHCP / DHCPv6 / NTP / SNMP ---------------------------------------------

std::optional<LayerOutput> dhcp(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 236) return std::nullopt;
  if (b[0] != 1 && b[0] != 2) return std::nullopt;
  auto out = leaf(in, {});
  add(out, "dhcp.type", i64(b[0]));
  add(out, "dhcp.id", i64(be32(b, 4)));
  add(out, "dhcp.ip.client", Address::ipv4(b.subspan(12, 4)));
  add(out, "dhcp.ip.your", Address::ipv4(b.subspan(16, 4)));
  add(out, "dhcp.ip.server", Address::ipv4(b.subspan(20, 4)));
  if (b[1] == 1 && b[2] == 6) add(out, "dhcp.hw.mac_addr", Address::mac(b.subspan(28, 6)));
  if (b.size() >= 240 && be32(b, 236) == 0x63825363) {
    std::size_t pos = 240;
    while (pos < b.size()) {
      std::uint8_t code = b[pos];
      if (code == 255) break;
      if (code == 0) {
        ++pos;
        continue;
      }
      if (pos + 1 >= b.size()) break;
      std::size_t len = b[pos + 1];
      if (pos + 2 + len > b.size()) break;
      if (code == 53 && len == 1) add(out, "dhcp.option.dhcp", i64(b[pos + 2]));
      if (code == 12) add(out, "dhcp.option.hostname", printable(b.subspan(pos + 2, len)));
      pos += 2 + len;
    }
  }
  return out;
}

std::optional<LayerOutput> dhcpv6(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 4) return std::nullopt;
  auto out = leaf(in, {});
  add(out, "dhcpv6.msgtype", i64(b[0]));
  add(out, "dhcpv6.xid", i64((std::uint32_t{b[1]} << 16) | (b[2] << 8) | b[3]));
  return out;
}

std::optional<LayerOutput> ntp(const LayerInput& in) {
  auto b = in.bytes();
  if (b.size() < 48) return std::nullopt;
  auto out = leaf(in, {});
  add(out, "ntp.flags.li", i64(b[0] >> 6));
  add(out, "ntp.flags.vn", i64((b[0] >> 3) & 0x7));
  add(out, "ntp.flags.mode", i64(b[0] & 0x7));
  add(out, "ntp.stratum", i64(b[1]));
  return out;
}

namespace {

// Minimal BER reader: tag + definite length.
bool ber_header(ByteView b, std::size_t& pos, std::uint8_t& tag, std::size_t& len) {
  if (pos + 2 > b.size()) return false;
  tag = b[pos++];
  std::uint8_t first = b[pos++];
  if (first < 0x80) {
    len = first;
  } else {
    std::size_t n = first & 0x7F;
    if (n == 0 || n > 4 || pos + n > b.size()) return false;
    len = 0;
    for (std::size_t i = 0; i < n; ++i) len = (len << 8) | b[pos++];
  }
  return len <= b.size() - pos;
}

}  // namespace

std::optional<LayerOutput> snmp(const LayerInput& in) {
  auto b = in.bytes();
  std::size_t pos = 0;
  std::uint8_t tag = 0;
  std::size_t len = 0;
  if (!ber_header(b, pos, tag, len) || tag != 0x30) return std::nullopt;
  if (!ber_header(b, pos, tag, len) || tag != 0x02 || len == 0 || len > 4) return std::nullopt;
  std::int64_t version = 0;
  for (std::size_t i = 0; i < len; ++i) version = (version << 8) | b[pos + i];
  pos += len;
  auto out = leaf(in, {});
  add(out, "snmp.version", version);
  if (ber_header(b, pos, tag, len) && tag == 0x04) {
    add(out, "snmp.community", printable(b.subspan(pos, len)));
    pos += len;
    if (ber_header(b, pos, tag, len) && tag >= 0xA0 && tag <= 0xA8) add(out, "snmp.pdu_type", i64(tag - 0xA0));
  }
  return out;
}

// ---- text protocols ---------------------------------------------------------

bool probe_http(ByteView payload) {
  static constexpr std::string_view kStarts[] = {"GET ",     "POST ",  "HEAD ",    "PUT ",  "DELETE ",
                                                 "OPTIONS ", "PATCH ", "CONNECT ", "TRACE ", "HTTP/1."};
  std::string_view s(reinterpret_cast<const char*>(payload.data()), std::min<std::size_t>(payload.size(), 16));
  return std::any_of(std::begin(kStarts), std::end(kStarts), [&](std::string_view p) { return s.starts_with(p); });
}

std::optional<LayerOutput> http(const LayerInput& in) {
  auto b = in.bytes();
  auto out = leaf(in, {});
  if (!probe_http(b)) return out;  // body continuation
  std::size_t pos = 0;
  bool first = true;
  while (pos < b.size()) {
    auto line = first_line(b.subspan(pos), 8192);
    if (!line) break;
    std::size_t consumed = line->size();
    while (pos + consumed < b.size() && b[pos + consumed] != '\n') ++consumed;
    pos += consumed + 1;
    if (first) {
      first = false;
      auto [head, rest] = split_word(*line);
      if (head.starts_with("HTTP/")) {
        auto [code, phrase] = split_word(rest);
        add(out, "http.response.version", head);
        if (is_status_code(code)) add(out, "http.response.code", i64(std::stoi(code)));
        add(out, "http.response.phrase", phrase);
      } else {
        auto sp = rest.rfind(' ');
        add(out, "http.request.method", head);
        add(out, "http.request.uri", sp == std::string::npos ? rest : rest.substr(0, sp));
        if (sp != std::string::npos) add(out, "http.request.version", rest.substr(sp + 1));
      }
      continue;
    }
    if (line->empty()) break;
    auto colon = line->find(':');
    if (colon == std::string::npos) continue;
    std::string key = line->substr(0, colon);
    std::string value = line->substr(colon + 1);
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    if (key == "host") add(out, "http.host", value);
    if (key == "user-agent") add(out, "http.user_agent", value);
    if (key == "server") add(out, "http.server", value);
    if (key == "content-type") add(out, "http.content_type", value);
    if (key == "content-length" && !value.empty() && std::all_of(value.begin(), value.end(), [](unsigned char c) { return std::isdigit(c); }) &&
        value.size() < 12) {
      add(out, "http.content_length", i64(std::stoull(value)));
    }
  }
  return out;
}

bool probe_tls(ByteView b) {
  if (b.size() < 5) return false;
  if (b[0] < 20 || b[0] > 24) return false;
  if (b[1] != 3 || b[2] > 4) return false;
  return be16(b, 3) <= (1 << 14) + 2048;
}

std::optional<LayerOutput> tls(const LayerInput& in) {
  auto b = in.bytes();
  if (!probe_tls(b)) return std::nullopt;
  auto out = leaf(in, {});
  std::size_t pos = 0;
  while (pos + 5 <= b.size()) {
    std::uint8_t type = b[pos];
    if (type < 20 || type > 24 || b[pos + 1] != 3) break;
    std::size_t len = be16(b, pos + 3);
    add(out, "tls.record.content_type", i64(type));
    add(out, "tls.record.version", i64(be16(b, pos + 1)));
    add(out, "tls.record.length", i64(len));
    if (type == 22 && pos + 5 < b.size() && len > 0) add(out, "tls.handshake.type", i64(b[pos + 5]));
    pos += 5 + len;
  }
  return out;
}

bool probe_ssh(ByteView b) {
  return b.size() >= 4 && b[0] == 'S' && b[1] == 'S' && b[2] == 'H' && b[3] == '-';
}

std::optional<LayerOutput> ssh(const LayerInput& in) {
  auto b = in.bytes();
  auto out = leaf(in, {});
  if (probe_ssh(b)) {
    if (auto line = first_line(b, 255)) add(out, "ssh.protocol", *line);
  } else if (b.size() >= 5) {
    add(out, "ssh.packet_length", i64(be32(b, 0)));
  }
  return out;
}

namespace {

// Request/response line protocols (FTP, SMTP). Server side is the one
// sending from the service port.
std::optional<LayerOutput> command_response(const LayerInput& in, std::string_view req_cmd, std::string_view req_arg,
                                            std::string_view resp_code, std::string_view resp_arg) {
  auto b = in.bytes();
  auto out = leaf(in, {});
  auto line = first_line(b);
  if (!line) return out;
  bool from_server = in.service_port != 0 && in.src_port == in.service_port;
  std::string_view text = *line;
  bool coded = text.size() >= 3 && is_status_code(text.substr(0, 3)) && (text.size() == 3 || text[3] == ' ' || text[3] == '-');
  if (coded) {
    add(out, resp_code, i64(std::stoi(std::string(text.substr(0, 3)))));
    add(out, resp_arg, std::string(text.size() > 4 ? text.substr(4) : ""));
  } else if (!from_server && !text.empty()) {
    auto [head, rest] = split_word(*line);
    std::transform(head.begin(), head.end(), head.begin(), [](unsigned char c) { return std::toupper(c); });
    add(out, req_cmd, head);
    add(out, req_arg, rest);
  }
  return out;
}

}  // namespace

std::optional<LayerOutput> ftp(const LayerInput& in) {
  return command_response(in, "ftp.request.command", "ftp.request.arg", "ftp.response.code", "ftp.response.arg");
}

std::optional<LayerOutput> smtp(const LayerInput& in) {
  return command_response(in, "smtp.req.command", "smtp.req.parameter", "smtp.response.code",
                          "smtp.rsp.parameter");
}

std::optional<LayerOutput> label_only(const LayerInput& in) { return leaf(in, {}); }

}  // namespace pcaptopo::dissectors
