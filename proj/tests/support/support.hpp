#pragma once

#include "pcaptopo/capture.hpp"
#include "pcaptopo/dissect.hpp"
#include "pcaptopo/topology.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using pcaptopo::Address;
using pcaptopo::Bytes;
using pcaptopo::DissectedPacket;
using pcaptopo::RawCapture;
using pcaptopo::RawPacketRecord;

using Rng = std::mt19937_64;

Bytes read_fixture(const std::string& name);
nlohmann::json manifest();

// ---- independent capture writers ---------------------------------------

struct PcapLayout {
  bool big_endian = false;
  bool nanosecond = false;
  std::uint32_t link_type = 1;
};

/// Legacy PCAP writer kept separate from the library's write_pcap.
Bytes pcap_file(const std::vector<RawPacketRecord>& records, const PcapLayout& layout);

/// Minimal PCAPNG block writer for hand-built inputs.
struct NgWriter {
  bool big_endian = false;
  Bytes out;

  void section();
  void interface(std::uint16_t link_type, std::optional<std::uint8_t> tsresol = std::nullopt,
                 std::optional<std::int64_t> tsoffset = std::nullopt);
  void enhanced(std::uint32_t interface_id, std::uint64_t ticks, const Bytes& data,
                std::optional<std::uint32_t> original = std::nullopt);
  void simple(const Bytes& data, std::uint32_t original);
  void raw_block(std::uint32_t type, const Bytes& body);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
};

std::vector<RawPacketRecord> random_records(Rng& rng, std::size_t count, std::uint32_t link_type);

// ---- synthetic traffic --------------------------------------------------

Address host_ip(std::uint32_t n);  // 10.x.y.z, distinct for distinct n

/// One frame of a random but well-formed protocol between two IPv4 hosts.
Bytes random_frame(Rng& rng, const Address& src, const Address& dst);

/// Random traffic over `hosts` hosts with skewed activity, dissected.
std::vector<DissectedPacket> synthetic_packets(Rng& rng, std::size_t packets, std::size_t hosts);

/// Legacy PCAP of mixed traffic with `packets` records and roughly `target_bytes` bytes.
Bytes benchmark_capture(std::size_t packets, std::size_t target_bytes, std::uint64_t seed = 1);

/// PCAP with `count` minimal records.
Bytes many_records_capture(std::size_t count);

// ---- oracles ------------------------------------------------------------

struct HostTotals {
  Address key;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
};

/// Brute-force host totals and top-N selection (sort everything, take N).
std::vector<HostTotals> brute_force_hosts(const std::vector<const DissectedPacket*>& packets);
std::vector<Address> brute_force_top(const std::vector<const DissectedPacket*>& packets, std::size_t n);

/// Test-side filter AST with its own evaluator.
struct TExpr {
  enum Kind { Proto, Cmp, Not, And, Or } kind = Proto;
  std::string name;  // protocol or field
  std::string op;
  std::string literal_text;
  nlohmann::json literal;  // int, bool, string, or address text
  std::shared_ptr<TExpr> a, b;
};
using TExprPtr = std::shared_ptr<TExpr>;

TExprPtr random_expr(Rng& rng, const std::vector<DissectedPacket>& packets, int depth);
std::string to_text(const TExpr& e);
bool oracle_eval(const TExpr& e, const DissectedPacket& p);

std::vector<std::size_t> oracle_filter(const std::vector<DissectedPacket>& packets, const TExpr& e);

}  // namespace testsupport
