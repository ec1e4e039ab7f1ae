#include "pcaptopo/demo.hpp"

#include "pcaptopo/frame_builder.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace pcaptopo {

namespace {

namespace f = frames;
using f::tcp_flag::ack;
using f::tcp_flag::fin;
using f::tcp_flag::psh;
using f::tcp_flag::syn;

constexpr std::int64_t kMs = 1'000'000;
constexpr std::int64_t kSec = 1'000 * kMs;

Address ip(std::string_view text) { return *Address::parse(text, AddressKind::Ipv4); }
Address mac(std::string_view text) { return *Address::parse(text, AddressKind::Mac); }

// Address plan. Every host here appears in the generated topology.
const Address kDnsServer = ip("10.0.1.200");
const Address kClient50 = ip("10.0.1.50");
const Address kClient51 = ip("10.0.1.51");
const Address kClient52 = ip("10.0.1.52");
const Address kGoogleDns = ip("8.8.8.8");
const Address kCloudflareDns = ip("1.1.1.1");
const Address kGateway = ip("10.0.1.1");
const Address kDhcpServer = ip("10.0.1.2");
const Address kWeb = ip("10.0.1.10");
const Address kFtp = ip("10.0.1.21");
const Address kBastion = ip("10.0.1.22");
const Address kNtp = ip("10.0.1.123");
const Address kWork60 = ip("10.0.1.60");
const Address kWork61 = ip("10.0.1.61");
const Address kWork62 = ip("10.0.1.62");
const Address kExternalWeb = ip("93.184.216.34");
const Address kExternalPing = ip("203.0.113.80");
const Address kUpstreamNtp = ip("198.51.100.25");
const Address kArpSpeaker = mac("02:00:00:00:01:01");
const Address kBroadcast = mac("ff:ff:ff:ff:ff:ff");

class Builder {
 public:
  std::uint32_t next() { return rng_(); }
  std::int64_t jitter(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint32_t>(hi - lo + 1));
  }
  std::uint16_t ephemeral() { return static_cast<std::uint16_t>(49152 + next() % 16000); }

  void frame(std::int64_t t, Bytes bytes) { frames_.push_back({t, frames_.size(), std::move(bytes)}); }

  void ip_frame(std::int64_t t, const Address& src, const Address& dst, std::uint8_t proto, const Bytes& segment) {
    auto& id = ip_ids_[src];
    auto packet = f::ipv4(src, dst, proto, segment, src.octets[0] == 10 ? 64 : 54, id++);
    frame(t, f::ethernet(f::mac_for(dst), f::mac_for(src), f::kEtherIpv4, packet));
  }

  void udp(std::int64_t t, const Address& src, const Address& dst, std::uint16_t sport, std::uint16_t dport,
           const Bytes& payload) {
    ip_frame(t, src, dst, 17, f::udp(src, dst, sport, dport, payload));
  }

  RawCapture finish() {
    std::stable_sort(frames_.begin(), frames_.end(),
                     [](const Pending& x, const Pending& y) { return x.t < y.t; });
    RawCapture c;
    c.format = CaptureFormat{CaptureKind::PcapNanoseconds, ByteOrder::LittleEndian};
    std::int64_t last = -1;
    for (auto& p : frames_) {
      // Streams are scheduled independently; nudge collisions so timestamps stay strictly increasing.
      const std::int64_t t = std::max(p.t, last + 1'000);
      last = t;
      RawPacketRecord r;
      r.index = c.records.size();
      r.timestamp = Timestamp{kDemoEpoch + t / kSec, static_cast<std::uint32_t>(t % kSec)};
      r.captured_length = static_cast<std::uint32_t>(p.bytes.size());
      r.original_length = r.captured_length;
      r.link_type = 1;
      r.data = std::move(p.bytes);
      c.records.push_back(std::move(r));
    }
    return c;
  }

 private:
  struct Pending {
    std::int64_t t;
    std::size_t order;
    Bytes bytes;
  };
  std::mt19937 rng_{0x5EED1234u};
  std::vector<Pending> frames_;
  std::map<Address, std::uint16_t> ip_ids_;
};

// One TCP connection from client a to server b.
class TcpSession {
 public:
  TcpSession(Builder& b, Address client, Address server, std::uint16_t port, std::int64_t t)
      : b_(b), client_(client), server_(server), cport_(b.ephemeral()), sport_(port), t_(t) {
    cseq_ = b.next();
    sseq_ = b.next();
    segment(true, syn, {});
    cseq_ += 1;
    segment(false, syn | ack, {});
    sseq_ += 1;
    segment(true, ack, {});
  }

  void send(bool from_client, const Bytes& payload, std::int64_t gap_lo = 2, std::int64_t gap_hi = 40) {
    t_ += b_.jitter(gap_lo, gap_hi) * kMs;
    segment(from_client, psh | ack, payload);
    (from_client ? cseq_ : sseq_) += static_cast<std::uint32_t>(payload.size());
  }

  void close() {
    t_ += b_.jitter(5, 60) * kMs;
    segment(true, fin | ack, {});
    cseq_ += 1;
    segment(false, fin | ack, {});
    sseq_ += 1;
    segment(true, ack, {});
  }

 private:
  void segment(bool from_client, std::uint8_t flags, const Bytes& payload) {
    t_ += b_.jitter(1, 3) * kMs / 2;
    const auto& src = from_client ? client_ : server_;
    const auto& dst = from_client ? server_ : client_;
    auto sp = from_client ? cport_ : sport_;
    auto dp = from_client ? sport_ : cport_;
    auto seq = from_client ? cseq_ : sseq_;
    auto ackno = (flags & ack) ? (from_client ? sseq_ : cseq_) : 0;
    b_.ip_frame(t_, src, dst, 6, f::tcp(src, dst, sp, dp, seq, ackno, flags, payload));
  }

  Builder& b_;
  Address client_, server_;
  std::uint16_t cport_, sport_;
  std::uint32_t cseq_ = 0, sseq_ = 0;
  std::int64_t t_;
};

void dns_conversation(Builder& b, const Address& client, const Address& server, std::int64_t t, int queries,
                      int unanswered, const std::vector<std::string_view>& names) {
  std::uint16_t port = b.ephemeral();
  for (int i = 0; i < queries; ++i) {
    auto id = static_cast<std::uint16_t>(b.next());
    auto name = names[static_cast<std::size_t>(i) % names.size()];
    bool internal = name.size() >= 5 && name.substr(name.size() - 5) == ".corp";
    b.udp(t, client, server, port, 53, f::dns_query(id, name));
    if (i < queries - unanswered) {
      std::vector<Address> answers{internal ? kWeb : kExternalWeb};
      b.udp(t + b.jitter(1, 25) * kMs, server, client, 53, port, f::dns_response(id, name, answers));
    }
    t += b.jitter(900, 3200) * kMs;
  }
}

void http_conversation(Builder& b, const Address& client, std::int64_t t, const std::vector<std::string>& paths) {
  TcpSession s(b, client, kWeb, 80, t);
  for (const auto& path : paths) {
    s.send(true, f::text("GET " + path + " HTTP/1.1\r\nHost: intranet.corp\r\nUser-Agent: curl/8.4.0\r\n"
                         "Accept: */*\r\n\r\n"));
    std::string body = "<html><body>" + path + "</body></html>";
    s.send(false, f::text("HTTP/1.1 200 OK\r\nServer: nginx/1.24.0\r\nContent-Type: text/html\r\nContent-Length: " +
                          std::to_string(body.size()) + "\r\n\r\n" + body));
  }
  s.close();
}

Bytes filler(Builder& b, std::size_t n) {
  Bytes out(n);
  for (auto& x : out) x = static_cast<std::uint8_t>(b.next());
  return out;
}

void tls_conversation(Builder& b, const Address& client, std::int64_t t, int app_records) {
  TcpSession s(b, client, kExternalWeb, 443, t);
  auto hello = filler(b, 180);
  hello[0] = 0x01;
  s.send(true, f::tls_record(22, hello));
  auto server_hello = filler(b, 90);
  server_hello[0] = 0x02;
  s.send(false, f::tls_record(22, server_hello), 20, 90);
  s.send(true, f::tls_record(20, Bytes{1}));
  for (int i = 0; i < app_records; ++i) {
    s.send(true, f::tls_record(23, filler(b, 120 + b.next() % 200)));
    s.send(false, f::tls_record(23, filler(b, 400 + b.next() % 900)), 15, 120);
  }
  s.close();
}

void ssh_conversation(Builder& b, const Address& client, std::int64_t t, int exchanges) {
  TcpSession s(b, client, kBastion, 22, t);
  s.send(false, f::text("SSH-2.0-OpenSSH_9.3\r\n"));
  s.send(true, f::text("SSH-2.0-OpenSSH_9.6p1 Ubuntu-3ubuntu13\r\n"));
  for (int i = 0; i < exchanges; ++i) {
    for (bool from_client : {true, false}) {
      auto body = filler(b, 44 + b.next() % 60);
      std::uint32_t len = static_cast<std::uint32_t>(body.size());
      Bytes packet{static_cast<std::uint8_t>(len >> 24), static_cast<std::uint8_t>(len >> 16),
                   static_cast<std::uint8_t>(len >> 8), static_cast<std::uint8_t>(len)};
      packet.insert(packet.end(), body.begin(), body.end());
      s.send(from_client, packet, 30, 400);
    }
  }
  s.close();
}

void ftp_conversation(Builder& b, const Address& client, std::int64_t t, std::string_view user) {
  TcpSession s(b, client, kFtp, 21, t);
  s.send(false, f::text("220 (vsFTPd 3.0.5)\r\n"));
  s.send(true, f::text("USER " + std::string(user) + "\r\n"));
  s.send(false, f::text("331 Please specify the password.\r\n"));
  s.send(true, f::text("PASS hunter2\r\n"));
  s.send(false, f::text("230 Login successful.\r\n"));
  s.send(true, f::text("PWD\r\n"));
  s.send(false, f::text("257 \"/home/" + std::string(user) + "\" is the current directory\r\n"));
  s.send(true, f::text("QUIT\r\n"));
  s.send(false, f::text("221 Goodbye.\r\n"));
  s.close();
}

void dhcp_renewals(Builder& b, const Address& client, std::int64_t t, int renewals) {
  for (int i = 0; i < renewals; ++i) {
    auto xid = b.next();
    b.udp(t, client, kDhcpServer, 68, 67, f::dhcp(false, xid, f::mac_for(client), client, ip("0.0.0.0"), 3));
    b.udp(t + b.jitter(2, 12) * kMs, kDhcpServer, client, 67, 68,
          f::dhcp(true, xid, f::mac_for(client), client, client, 5));
    t += b.jitter(15, 25) * kSec;
  }
}

void ntp_polls(Builder& b, const Address& client, const Address& server, std::uint8_t server_stratum, std::int64_t t,
               int polls) {
  for (int i = 0; i < polls; ++i) {
    auto stamp = (std::uint64_t{static_cast<std::uint32_t>(kDemoEpoch + 2'208'988'800)} << 32) | b.next();
    b.udp(t, client, server, 123, 123, f::ntp(3, 0, stamp));
    b.udp(t + b.jitter(1, 20) * kMs, server, client, 123, 123, f::ntp(4, server_stratum, stamp + 1));
    t += b.jitter(14, 18) * kSec;
  }
}

void pings(Builder& b, const Address& from, const Address& to, std::int64_t t, int count) {
  auto ident = static_cast<std::uint16_t>(b.next());
  auto data = filler(b, 48);
  for (int seq = 1; seq <= count; ++seq) {
    b.ip_frame(t, from, to, 1, f::icmp_echo(true, ident, static_cast<std::uint16_t>(seq), data));
    b.ip_frame(t + b.jitter(1, 30) * kMs, to, from, 1, f::icmp_echo(false, ident, static_cast<std::uint16_t>(seq), data));
    t += kSec + b.jitter(0, 5) * kMs;
  }
}

void arp_chatter(Builder& b, std::int64_t t) {
  const Address self = ip("10.0.1.99");
  const Address zero_mac = mac("00:00:00:00:00:00");
  const char* targets[] = {"10.0.1.1", "10.0.1.2", "10.0.1.200", "10.0.1.1", "10.0.1.10", "10.0.1.1"};
  for (const char* target : targets) {
    b.frame(t, f::ethernet(kBroadcast, kArpSpeaker, f::kEtherArp, f::arp(1, kArpSpeaker, self, zero_mac, ip(target))));
    t += b.jitter(4, 9) * kSec;
  }
  for (int i = 0; i < 2; ++i) {
    b.frame(t, f::ethernet(kBroadcast, kArpSpeaker, f::kEtherArp, f::arp(2, kArpSpeaker, self, kBroadcast, self)));
    t += b.jitter(10, 20) * kSec;
  }
}

}  // namespace

Bytes generate_demo() {
  Builder b;

  // Name resolution: three workstations ask the internal resolver, which
  // forwards external names upstream. 153 DNS packets over 5 conversations.
  const std::vector<std::string_view> client_names = {"intranet.corp",     "wiki.intranet.corp", "mail.intranet.corp",
                                                      "example.com",       "files.intranet.corp", "updates.example.net",
                                                      "cdn.example.org"};
  const std::vector<std::string_view> upstream_names = {"example.com", "updates.example.net", "cdn.example.org",
                                                        "api.example.com", "status.example.net"};
  dns_conversation(b, kClient50, kDnsServer, 200 * kMs, 20, 0, client_names);
  dns_conversation(b, kClient51, kDnsServer, 1100 * kMs, 17, 0, client_names);
  dns_conversation(b, kClient52, kDnsServer, 2300 * kMs, 15, 1, client_names);
  dns_conversation(b, kDnsServer, kGoogleDns, 600 * kMs, 14, 0, upstream_names);
  dns_conversation(b, kDnsServer, kCloudflareDns, 3100 * kMs, 11, 0, upstream_names);

  http_conversation(b, kClient50, 4 * kSec, {"/", "/static/app.css"});
  http_conversation(b, kClient51, 19 * kSec, {"/reports/q3"});
  http_conversation(b, kWork61, 33 * kSec, {"/index.html"});

  tls_conversation(b, kClient50, 9 * kSec, 3);
  tls_conversation(b, kClient52, 24 * kSec, 2);
  tls_conversation(b, kWork61, 41 * kSec, 2);

  ssh_conversation(b, kWork60, 6 * kSec, 4);
  ssh_conversation(b, kClient51, 37 * kSec, 3);

  ftp_conversation(b, kWork60, 15 * kSec, "alice");
  ftp_conversation(b, kWork61, 46 * kSec, "bob");

  dhcp_renewals(b, kWork62, 2 * kSec, 2);
  dhcp_renewals(b, kClient51, 28 * kSec, 1);

  ntp_polls(b, kWork60, kNtp, 2, 1 * kSec, 3);
  ntp_polls(b, kWork61, kNtp, 2, 12 * kSec, 2);
  ntp_polls(b, kNtp, kUpstreamNtp, 1, 5 * kSec, 3);

  pings(b, kGateway, kExternalPing, 8 * kSec, 4);
  pings(b, kWork62, kGateway, 21 * kSec, 3);
  pings(b, kClient52, kGateway, 44 * kSec, 3);

  arp_chatter(b, 3 * kSec);

  return write_pcap(b.finish());
}

Bytes write_pcap(const RawCapture& capture) {
  constexpr auto LE = ByteOrder::LittleEndian;
  std::uint32_t snaplen = 262144;
  for (const auto& r : capture.records) snaplen = std::max(snaplen, static_cast<std::uint32_t>(r.data.size()));
  std::size_t total = 24;
  for (const auto& r : capture.records) total += 16 + r.data.size();
  Bytes out;
  out.reserve(total);
  put_u32(out, 0xA1B23C4D, LE);
  put_u16(out, 2, LE);
  put_u16(out, 4, LE);
  put_u32(out, 0, LE);
  put_u32(out, 0, LE);
  put_u32(out, snaplen, LE);
  put_u32(out, capture.records.empty() ? 1 : capture.records.front().link_type, LE);
  for (const auto& r : capture.records) {
    put_u32(out, static_cast<std::uint32_t>(r.timestamp.seconds), LE);
    put_u32(out, r.timestamp.nanos, LE);
    put_u32(out, static_cast<std::uint32_t>(r.data.size()), LE);
    put_u32(out, r.original_length, LE);
    out.insert(out.end(), r.data.begin(), r.data.end());
  }
  return out;
}

}  // namespace pcaptopo
