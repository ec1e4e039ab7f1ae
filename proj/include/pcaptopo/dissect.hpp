#pragma once

#include "pcaptopo/address.hpp"
#include "pcaptopo/capture.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pcaptopo {

using Duration = std::chrono::nanoseconds;

using FieldValue = std::variant<std::int64_t, Bytes, std::string, Address, bool, Duration>;

struct Field {
  std::string_view name;  // fully qualified, e.g. "ip.src"
  FieldValue value;
};

struct ByteRange {
  std::size_t offset = 0;
  std::size_t length = 0;

  std::size_t end() const { return offset + length; }
  bool contains(const ByteRange& inner) const { return inner.offset >= offset && inner.end() <= end(); }
  bool operator==(const ByteRange&) const = default;
};

struct ProtocolLayer {
  std::string_view protocol;
  std::vector<Field> fields;
  ByteRange payload;

  const FieldValue* find(std::string_view name) const;
  std::optional<std::int64_t> integer(std::string_view name) const;
  std::optional<std::string> text(std::string_view name) const;
  bool flag(std::string_view name) const;
};

struct DissectedPacket {
  std::size_t index = 0;
  Timestamp timestamp;
  std::vector<ProtocolLayer> layers;
  std::string_view label;
  std::optional<Address> src_addr;
  std::optional<Address> dst_addr;
  std::uint32_t length = 0;
  std::uint32_t captured_length = 0;
  Duration time_relative{0};  // since the first packet of the capture
  std::string info;

  const ProtocolLayer* layer(std::string_view protocol) const;
};

std::string_view label_of(const DissectedPacket& packet);
std::string summarize(const DissectedPacket& packet);

/// Where a dissector hands its payload next.
enum class Table { None, LinkType, EtherType, IpProto, TcpPort, UdpPort };

struct Handoff {
  Table table = Table::None;
  std::uint32_t key = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
};

struct LayerInput {
  ByteView frame;
  ByteRange range;
  std::string_view protocol;  // name the dissector was registered under
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint16_t service_port = 0;  // port that selected this dissector, 0 for probes

  ByteView bytes() const { return frame.subspan(range.offset, range.length); }
};

struct LayerOutput {
  ProtocolLayer layer;  // empty protocol => pass-through, no layer recorded
  Handoff next;
};

/// Returns std::nullopt when the bytes are malformed for this protocol.
using DissectFn = std::optional<LayerOutput> (*)(const LayerInput&);
using ProbeFn = bool (*)(ByteView payload);

struct DissectorEntry {
  std::string_view protocol;
  DissectFn fn = nullptr;
};

class DissectorRegistry {
 public:
  /// Registry with the built-in dissectors and port-name table.
  static const DissectorRegistry& standard();

  void add_link_type(std::uint32_t link_type, DissectorEntry entry);
  void add_ethertype(std::uint32_t ethertype, DissectorEntry entry);
  void add_ip_protocol(std::uint32_t proto, DissectorEntry entry);
  void add_tcp_port(std::uint16_t port, DissectorEntry entry);
  void add_udp_port(std::uint16_t port, DissectorEntry entry);
  void add_payload_probe(Table transport, ProbeFn probe, DissectorEntry entry);

  /// Exact tables, then port tables (lower port first), then payload probes.
  const DissectorEntry* lookup(const Handoff& handoff, ByteView payload, std::uint16_t* matched_port = nullptr) const;

  bool knows_protocol(std::string_view protocol) const;
  std::vector<std::string_view> protocols() const;

  DissectedPacket dissect(const RawPacketRecord& record) const;

 private:
  struct Probe {
    Table transport;
    ProbeFn probe;
    DissectorEntry entry;
  };

  std::map<std::uint32_t, DissectorEntry> link_types_;
  std::map<std::uint32_t, DissectorEntry> ethertypes_;
  std::map<std::uint32_t, DissectorEntry> ip_protocols_;
  std::map<std::uint16_t, DissectorEntry> tcp_ports_;
  std::map<std::uint16_t, DissectorEntry> udp_ports_;
  std::vector<Probe> probes_;
};

/// Dissects one record with the standard registry. Never throws on malformed bytes.
DissectedPacket dissect(const RawPacketRecord& record);

std::vector<DissectedPacket> dissect_all(const RawCapture& capture, const ProgressSink& sink = {},
                                         std::size_t chunk_records = 4096);

}  // namespace pcaptopo
