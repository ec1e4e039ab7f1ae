#include "support.hpp"

#include "pcaptopo/frame_builder.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <stdexcept>

#ifndef PCAPTOPO_FIXTURE_DIR
#error "PCAPTOPO_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace testsupport {

namespace f = pcaptopo::frames;
using pcaptopo::AddressKind;
using pcaptopo::ByteView;

Bytes read_fixture(const std::string& name) {
  std::ifstream in(std::string(PCAPTOPO_FIXTURE_DIR) + "/" + name, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

nlohmann::json manifest() {
  auto bytes = read_fixture("manifest.json");
  return nlohmann::json::parse(bytes.begin(), bytes.end());
}

namespace {

void append(Bytes& out, std::uint64_t v, int width, bool big_endian) {
  for (int i = 0; i < width; ++i) {
    int shift = big_endian ? 8 * (width - 1 - i) : 8 * i;
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

}  // namespace

Bytes pcap_file(const std::vector<RawPacketRecord>& records, const PcapLayout& layout) {
  Bytes out;
  bool be = layout.big_endian;
  append(out, layout.nanosecond ? 0xA1B23C4D : 0xA1B2C3D4, 4, be);
  append(out, 2, 2, be);
  append(out, 4, 2, be);
  append(out, 0, 4, be);
  append(out, 0, 4, be);
  append(out, 65535, 4, be);
  append(out, layout.link_type, 4, be);
  for (const auto& r : records) {
    append(out, static_cast<std::uint64_t>(r.timestamp.seconds), 4, be);
    append(out, layout.nanosecond ? r.timestamp.nanos : r.timestamp.nanos / 1000, 4, be);
    append(out, r.data.size(), 4, be);
    append(out, r.original_length, 4, be);
    out.insert(out.end(), r.data.begin(), r.data.end());
  }
  return out;
}

void NgWriter::u16(std::uint16_t v) { append(out, v, 2, big_endian); }
void NgWriter::u32(std::uint32_t v) { append(out, v, 4, big_endian); }

void NgWriter::raw_block(std::uint32_t type, const Bytes& body) {
  Bytes padded = body;
  while (padded.size() % 4) padded.push_back(0);
  auto total = static_cast<std::uint32_t>(12 + padded.size());
  u32(type);
  u32(total);
  out.insert(out.end(), padded.begin(), padded.end());
  u32(total);
}

void NgWriter::section() {
  Bytes body;
  append(body, 0x1A2B3C4D, 4, big_endian);
  append(body, 1, 2, big_endian);
  append(body, 0, 2, big_endian);
  append(body, ~std::uint64_t{0}, 8, big_endian);
  raw_block(0x0A0D0D0A, body);
}

void NgWriter::interface(std::uint16_t link_type, std::optional<std::uint8_t> tsresol,
                         std::optional<std::int64_t> tsoffset) {
  Bytes body;
  append(body, link_type, 2, big_endian);
  append(body, 0, 2, big_endian);
  append(body, 65535, 4, big_endian);
  if (tsresol) {
    append(body, 9, 2, big_endian);
    append(body, 1, 2, big_endian);
    body.insert(body.end(), {*tsresol, 0, 0, 0});
  }
  if (tsoffset) {
    append(body, 14, 2, big_endian);
    append(body, 8, 2, big_endian);
    append(body, static_cast<std::uint64_t>(*tsoffset), 8, big_endian);
  }
  append(body, 0, 4, big_endian);  // opt_endofopt
  raw_block(1, body);
}

void NgWriter::enhanced(std::uint32_t interface_id, std::uint64_t ticks, const Bytes& data,
                        std::optional<std::uint32_t> original) {
  Bytes body;
  append(body, interface_id, 4, big_endian);
  append(body, ticks >> 32, 4, big_endian);
  append(body, ticks & 0xFFFFFFFF, 4, big_endian);
  append(body, data.size(), 4, big_endian);
  append(body, original.value_or(static_cast<std::uint32_t>(data.size())), 4, big_endian);
  body.insert(body.end(), data.begin(), data.end());
  raw_block(6, body);
}

void NgWriter::simple(const Bytes& data, std::uint32_t original) {
  Bytes body;
  append(body, original, 4, big_endian);
  body.insert(body.end(), data.begin(), data.end());
  raw_block(3, body);
}

std::vector<RawPacketRecord> random_records(Rng& rng, std::size_t count, std::uint32_t link_type) {
  std::vector<RawPacketRecord> out;
  std::uniform_int_distribution<std::uint32_t> len(0, 300);
  std::uniform_int_distribution<std::uint32_t> byte(0, 255);
  for (std::size_t i = 0; i < count; ++i) {
    RawPacketRecord r;
    r.index = i;
    r.timestamp.seconds = static_cast<std::int64_t>(rng() & 0xFFFFFFFF);
    r.timestamp.nanos = static_cast<std::uint32_t>(rng() % 1'000'000'000);
    r.data.resize(len(rng));
    for (auto& b : r.data) b = static_cast<std::uint8_t>(byte(rng));
    r.captured_length = static_cast<std::uint32_t>(r.data.size());
    r.original_length = rng() % 8 == 0 ? static_cast<std::uint32_t>(rng() % 70000) : r.captured_length;
    r.link_type = link_type;
    out.push_back(std::move(r));
  }
  return out;
}

Address host_ip(std::uint32_t n) { return Address::ipv4(0x0A000000u | ((n + 1) & 0x00FFFFFF)); }

namespace {

const char* kNames[] = {"alpha.example", "beta.example", "gamma.corp", "mail.gamma.corp", "cdn.example.net",
                        "intranet.corp"};

Bytes filler(Rng& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

Bytes frame_of(Rng& rng, const Address& src, const Address& dst, std::size_t payload_size) {
  auto ephemeral = static_cast<std::uint16_t>(49152 + rng() % 16000);
  auto ttl = static_cast<std::uint8_t>(rng() % 2 ? 64 : 128);
  Bytes segment;
  std::uint8_t proto = 17;
  switch (rng() % 9) {
    case 0: {
      auto name = kNames[rng() % std::size(kNames)];
      segment = f::udp(src, dst, ephemeral, 53, f::dns_query(static_cast<std::uint16_t>(rng()), name));
      break;
    }
    case 1: {
      auto name = kNames[rng() % std::size(kNames)];
      segment = f::udp(src, dst, 53, ephemeral,
                       f::dns_response(static_cast<std::uint16_t>(rng()), name, {Address::ipv4(static_cast<std::uint32_t>(rng()))}));
      break;
    }
    case 2:
      proto = 6;
      segment = f::tcp(src, dst, ephemeral, 80, static_cast<std::uint32_t>(rng()), 0, f::tcp_flag::syn, {});
      break;
    case 3: {
      proto = 6;
      std::string req = std::string(rng() % 2 ? "GET" : "POST") + " /p" + std::to_string(rng() % 100) +
                        " HTTP/1.1\r\nHost: h\r\n\r\n" + std::string(payload_size, 'x');
      segment = f::tcp(src, dst, ephemeral, 80, 1, 1, f::tcp_flag::psh | f::tcp_flag::ack, f::text(req));
      break;
    }
    case 4:
      proto = 6;
      segment = f::tcp(src, dst, ephemeral, 443, 1, 1, f::tcp_flag::psh | f::tcp_flag::ack,
                       f::tls_record(23, filler(rng, payload_size + 1)));
      break;
    case 5:
      proto = 6;
      segment = f::tcp(src, dst, 22, ephemeral, 1, 1, f::tcp_flag::ack, filler(rng, payload_size));
      break;
    case 6:
      proto = 1;
      segment = f::icmp_echo(rng() % 2, static_cast<std::uint16_t>(rng()), static_cast<std::uint16_t>(rng()),
                             filler(rng, payload_size % 1400));
      break;
    case 7: segment = f::udp(src, dst, 123, 123, f::ntp(3, 0, rng())); break;
    default: segment = f::udp(src, dst, ephemeral, 40000, filler(rng, payload_size)); break;
  }
  return f::ethernet(f::mac_for(dst), f::mac_for(src), f::kEtherIpv4, f::ipv4(src, dst, proto, segment, ttl));
}

}  // namespace

Bytes random_frame(Rng& rng, const Address& src, const Address& dst) { return frame_of(rng, src, dst, rng() % 200); }

std::vector<DissectedPacket> synthetic_packets(Rng& rng, std::size_t packets, std::size_t hosts) {
  std::vector<DissectedPacket> out;
  out.reserve(packets);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&] { return static_cast<std::uint32_t>(static_cast<double>(hosts) * u(rng) * u(rng)); };
  for (std::size_t i = 0; i < packets; ++i) {
    // First pass touches every host once so the host count is exact.
    std::uint32_t a = i < hosts ? static_cast<std::uint32_t>(i) : pick();
    std::uint32_t b = pick();
    if (b == a) b = (a + 1) % static_cast<std::uint32_t>(hosts);
    RawPacketRecord r;
    r.index = i;
    r.timestamp = pcaptopo::Timestamp{1'700'000'000 + static_cast<std::int64_t>(i / 100),
                                      static_cast<std::uint32_t>((i % 100) * 10'000'000)};
    r.link_type = 1;
    r.data = rng() % 3 ? frame_of(rng, host_ip(a), host_ip(b), rng() % 64) : frame_of(rng, host_ip(b), host_ip(a), rng() % 64);
    r.captured_length = r.original_length = static_cast<std::uint32_t>(r.data.size());
    auto p = pcaptopo::dissect(r);
    p.time_relative = pcaptopo::Duration(r.timestamp.nanos_since(pcaptopo::Timestamp{1'700'000'000, 0}));
    out.push_back(std::move(p));
  }
  return out;
}

Bytes benchmark_capture(std::size_t packets, std::size_t target_bytes, std::uint64_t seed) {
  const std::size_t hosts = 300;
  auto generate = [&](double mean_payload) {
    Rng rng(seed);
    std::vector<RawPacketRecord> records;
    records.reserve(packets);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < packets; ++i) {
      auto a = static_cast<std::uint32_t>(hosts * u(rng) * u(rng));
      auto b = static_cast<std::uint32_t>(hosts * u(rng));
      if (a == b) b = (b + 1) % hosts;
      RawPacketRecord r;
      r.index = i;
      r.timestamp = pcaptopo::Timestamp{1'700'000'000 + static_cast<std::int64_t>(i / 1000),
                                        static_cast<std::uint32_t>((i % 1000) * 1'000'000)};
      auto spread = static_cast<std::uint64_t>(2 * mean_payload) + 1;
      r.data = frame_of(rng, host_ip(a), host_ip(b), rng() % spread);
      r.captured_length = r.original_length = static_cast<std::uint32_t>(r.data.size());
      r.link_type = 1;
      records.push_back(std::move(r));
    }
    return pcap_file(records, PcapLayout{false, false, 1});
  };
  // Only some frame kinds carry a variable payload; size is close to linear in the mean, so use secant steps.
  const double target = static_cast<double>(target_bytes);
  double m0 = 0.0;
  double s0 = static_cast<double>(generate(m0).size());
  double m1 = target / static_cast<double>(std::max<std::size_t>(packets, 1));
  Bytes out = generate(m1);
  for (int round = 0; round < 8; ++round) {
    double s1 = static_cast<double>(out.size());
    if (std::abs(s1 - target) <= 0.005 * target || s1 == s0) break;
    double next = std::max(0.0, m1 + (target - s1) * (m1 - m0) / (s1 - s0));
    m0 = m1;
    s0 = s1;
    m1 = next;
    out = generate(m1);
  }
  return out;
}

Bytes many_records_capture(std::size_t count) {
  auto frame = f::ethernet(Address::parse("ff:ff:ff:ff:ff:ff").value(), Address::parse("02:00:00:00:00:01").value(),
                           f::kEtherArp,
                           f::arp(1, Address::parse("02:00:00:00:00:01").value(), host_ip(1),
                                  Address::parse("00:00:00:00:00:00").value(), host_ip(2)));
  Bytes out;
  out.reserve(24 + count * (16 + frame.size()));
  append(out, 0xA1B2C3D4, 4, false);
  append(out, 2, 2, false);
  append(out, 4, 2, false);
  append(out, 0, 8, false);
  append(out, 65535, 4, false);
  append(out, 1, 4, false);
  for (std::size_t i = 0; i < count; ++i) {
    append(out, 1'700'000'000 + i / 1000, 4, false);
    append(out, (i % 1000) * 1000, 4, false);
    append(out, frame.size(), 4, false);
    append(out, frame.size(), 4, false);
    out.insert(out.end(), frame.begin(), frame.end());
  }
  return out;
}

std::vector<HostTotals> brute_force_hosts(const std::vector<const DissectedPacket*>& packets) {
  std::map<Address, HostTotals> totals;
  for (const auto* p : packets) {
    std::set<Address> ends;
    if (p->src_addr) ends.insert(*p->src_addr);
    if (p->dst_addr) ends.insert(*p->dst_addr);
    for (const auto& a : ends) {
      auto& t = totals[a];
      t.key = a;
      t.packets += 1;
      t.bytes += p->length;
    }
  }
  std::vector<HostTotals> out;
  for (auto& [k, t] : totals) out.push_back(t);
  return out;
}

std::vector<Address> brute_force_top(const std::vector<const DissectedPacket*>& packets, std::size_t n) {
  auto all = brute_force_hosts(packets);
  // Full sort on a composite key, then the first n.
  std::vector<std::tuple<std::int64_t, std::int64_t, Address>> keyed;
  for (const auto& t : all) {
    keyed.emplace_back(-static_cast<std::int64_t>(t.packets), -static_cast<std::int64_t>(t.bytes), t.key);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<Address> out;
  for (std::size_t i = 0; i < keyed.size() && i < n; ++i) out.push_back(std::get<2>(keyed[i]));
  return out;
}

// ---- random filters -----------------------------------------------------

namespace {

enum class VType { Int, Bool, Text, Ip, Mac };

struct OracleField {
  const char* name;
  VType type;
  std::vector<const char*> sources;  // empty for frame fields
};

const std::vector<OracleField>& oracle_fields() {
  static const std::vector<OracleField> fields = {
      {"frame.len", VType::Int, {}},
      {"frame.number", VType::Int, {}},
      {"ip.ttl", VType::Int, {"ip.ttl"}},
      {"ip.proto", VType::Int, {"ip.proto"}},
      {"tcp.port", VType::Int, {"tcp.srcport", "tcp.dstport"}},
      {"tcp.dstport", VType::Int, {"tcp.dstport"}},
      {"udp.port", VType::Int, {"udp.srcport", "udp.dstport"}},
      {"udp.srcport", VType::Int, {"udp.srcport"}},
      {"dns.qry.type", VType::Int, {"dns.qry.type"}},
      {"ip.addr", VType::Ip, {"ip.src", "ip.dst"}},
      {"ip.src", VType::Ip, {"ip.src"}},
      {"ip.dst", VType::Ip, {"ip.dst"}},
      {"eth.addr", VType::Mac, {"eth.src", "eth.dst"}},
      {"eth.src", VType::Mac, {"eth.src"}},
      {"tcp.flags.syn", VType::Bool, {"tcp.flags.syn"}},
      {"tcp.flags.ack", VType::Bool, {"tcp.flags.ack"}},
      {"dns.flags.response", VType::Bool, {"dns.flags.response"}},
      {"dns.qry.name", VType::Text, {"dns.qry.name"}},
      {"http.request.method", VType::Text, {"http.request.method"}},
  };
  return fields;
}

const OracleField& field_named(const std::string& name) {
  for (const auto& f : oracle_fields()) {
    if (name == f.name) return f;
  }
  throw std::logic_error("oracle field " + name);
}

const char* kProtocols[] = {"eth", "ip", "arp", "tcp", "udp", "dns", "http", "tls", "ssh", "icmp", "ntp", "data", "frame"};

// Instance values as JSON: integers, booleans, strings, and addresses as text.
std::vector<nlohmann::json> instances(const OracleField& f, const DissectedPacket& p) {
  std::vector<nlohmann::json> out;
  if (std::string_view(f.name) == "frame.len") return {p.length};
  if (std::string_view(f.name) == "frame.number") return {p.index + 1};
  for (const auto& layer : p.layers) {
    for (const auto& field : layer.fields) {
      for (const char* src : f.sources) {
        if (field.name != src) continue;
        if (auto* i = std::get_if<std::int64_t>(&field.value)) out.emplace_back(*i);
        else if (auto* b = std::get_if<bool>(&field.value)) out.emplace_back(*b);
        else if (auto* s = std::get_if<std::string>(&field.value)) out.emplace_back(*s);
        else if (auto* a = std::get_if<Address>(&field.value)) out.emplace_back(a->to_string());
      }
    }
  }
  return out;
}

bool compare(VType type, const std::string& op, const nlohmann::json& v, const nlohmann::json& lit) {
  if (type == VType::Ip || type == VType::Mac) {
    auto x = Address::parse(v.get<std::string>());
    auto y = Address::parse(lit.get<std::string>());
    bool eq = x && y && *x == *y;
    return op == "==" ? eq : !eq;
  }
  if (type == VType::Text) {
    auto x = v.get<std::string>();
    auto y = lit.get<std::string>();
    if (op == "contains") return x.find(y) != std::string::npos;
    return op == "==" ? x == y : x != y;
  }
  if (type == VType::Bool) return op == "==" ? v.get<bool>() == lit.get<bool>() : v.get<bool>() != lit.get<bool>();
  auto x = v.get<std::int64_t>();
  auto y = lit.get<std::int64_t>();
  if (op == "==") return x == y;
  if (op == "!=") return x != y;
  if (op == "<") return x < y;
  if (op == "<=") return x <= y;
  if (op == ">") return x > y;
  return x >= y;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

TExprPtr random_expr(Rng& rng, const std::vector<DissectedPacket>& packets, int depth) {
  auto e = std::make_shared<TExpr>();
  if (depth > 0 && rng() % 3 != 0) {
    switch (rng() % 3) {
      case 0:
        e->kind = TExpr::Not;
        e->a = random_expr(rng, packets, depth - 1);
        return e;
      case 1: e->kind = TExpr::And; break;
      default: e->kind = TExpr::Or; break;
    }
    e->a = random_expr(rng, packets, depth - 1);
    e->b = random_expr(rng, packets, depth - 1);
    return e;
  }
  if (rng() % 3 == 0) {
    e->kind = TExpr::Proto;
    e->name = kProtocols[rng() % std::size(kProtocols)];
    return e;
  }
  const auto& fields = oracle_fields();
  const auto& field = fields[rng() % fields.size()];
  e->kind = TExpr::Cmp;
  e->name = field.name;
  // Prefer a literal that occurs in the capture so comparisons are not vacuous.
  std::optional<nlohmann::json> seen;
  if (!packets.empty() && rng() % 5 != 0) {
    for (int tries = 0; tries < 8 && !seen; ++tries) {
      auto vals = instances(field, packets[rng() % packets.size()]);
      if (!vals.empty()) seen = vals[rng() % vals.size()];
    }
  }
  switch (field.type) {
    case VType::Int: {
      static const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
      e->op = ops[rng() % 6];
      e->literal = seen ? *seen : nlohmann::json(static_cast<std::int64_t>(rng() % 70000));
      auto v = e->literal.get<std::int64_t>();
      e->literal_text = rng() % 4 == 0 ? fmt::format("0x{:x}", v) : std::to_string(v);
      break;
    }
    case VType::Bool:
      e->op = rng() % 2 ? "==" : "!=";
      e->literal = seen ? *seen : nlohmann::json(rng() % 2 == 0);
      e->literal_text = e->literal.get<bool>() ? (rng() % 2 ? "1" : "true") : (rng() % 2 ? "0" : "false");
      break;
    case VType::Text: {
      static const char* ops[] = {"==", "!=", "contains"};
      e->op = ops[rng() % 3];
      std::string s = seen ? seen->get<std::string>() : std::string("zzz");
      if (e->op == "contains" && s.size() > 2) s = s.substr(rng() % (s.size() / 2), 1 + rng() % (s.size() / 2));
      e->literal = s;
      e->literal_text = quote(s);
      break;
    }
    case VType::Ip:
    case VType::Mac:
      e->op = rng() % 2 ? "==" : "!=";
      if (seen) {
        e->literal = *seen;
      } else if (field.type == VType::Ip) {
        e->literal = host_ip(static_cast<std::uint32_t>(rng() % 600)).to_string();
      } else {
        e->literal = "02:00:0a:00:00:01";
      }
      e->literal_text = e->literal.get<std::string>();
      break;
  }
  return e;
}

std::string to_text(const TExpr& e) {
  switch (e.kind) {
    case TExpr::Proto: return e.name;
    case TExpr::Cmp: return e.name + " " + e.op + " " + e.literal_text;
    case TExpr::Not: return "!(" + to_text(*e.a) + ")";
    case TExpr::And: return "(" + to_text(*e.a) + ") && (" + to_text(*e.b) + ")";
    case TExpr::Or: return "(" + to_text(*e.a) + ") or (" + to_text(*e.b) + ")";
  }
  return "";
}

bool oracle_eval(const TExpr& e, const DissectedPacket& p) {
  switch (e.kind) {
    case TExpr::Proto:
      if (e.name == "frame") return true;
      return std::any_of(p.layers.begin(), p.layers.end(), [&](const auto& l) { return l.protocol == e.name; });
    case TExpr::Cmp: {
      const auto& f = field_named(e.name);
      auto vals = instances(f, p);
      return std::any_of(vals.begin(), vals.end(), [&](const auto& v) { return compare(f.type, e.op, v, e.literal); });
    }
    case TExpr::Not: return !oracle_eval(*e.a, p);
    case TExpr::And: return oracle_eval(*e.a, p) && oracle_eval(*e.b, p);
    case TExpr::Or: return oracle_eval(*e.a, p) || oracle_eval(*e.b, p);
  }
  return false;
}

std::vector<std::size_t> oracle_filter(const std::vector<DissectedPacket>& packets, const TExpr& e) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (oracle_eval(e, packets[i])) out.push_back(i);
  }
  return out;
}

}  // namespace testsupport
