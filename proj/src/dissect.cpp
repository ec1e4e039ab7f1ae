#include "pcaptopo/dissect.hpp"

#include "dissectors.hpp"

#include <algorithm>
#include <set>

namespace pcaptopo {

namespace {

constexpr std::size_t kMaxLayers = 24;
constexpr std::string_view kData = "data";

ProtocolLayer data_layer(ByteRange range) {
  ProtocolLayer layer;
  layer.protocol = kData;
  layer.payload = range;
  layer.fields.push_back(Field{"data.len", static_cast<std::int64_t>(range.length)});
  return layer;
}

void pick_addresses(DissectedPacket& p) {
  static constexpr std::pair<std::string_view, std::string_view> kNetwork[] = {{"ip.src", "ip.dst"},
                                                                               {"ipv6.src", "ipv6.dst"}};
  for (auto it = p.layers.rbegin(); it != p.layers.rend(); ++it) {
    for (auto [src, dst] : kNetwork) {
      auto* s = it->find(src);
      auto* d = it->find(dst);
      if (s && d) {
        p.src_addr = std::get<Address>(*s);
        p.dst_addr = std::get<Address>(*d);
        return;
      }
    }
  }
  for (const auto& layer : p.layers) {
    if (auto* s = layer.find("eth.src")) p.src_addr = std::get<Address>(*s);
    if (auto* d = layer.find("eth.dst")) p.dst_addr = std::get<Address>(*d);
    if (p.src_addr || p.dst_addr) return;
    if (auto* s = layer.find("sll.src.eth")) {
      p.src_addr = std::get<Address>(*s);
      return;
    }
  }
}

}  // namespace

const FieldValue* ProtocolLayer::find(std::string_view name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f.value;
  }
  return nullptr;
}

std::optional<std::int64_t> ProtocolLayer::integer(std::string_view name) const {
  auto* v = find(name);
  if (v && std::holds_alternative<std::int64_t>(*v)) return std::get<std::int64_t>(*v);
  return std::nullopt;
}

std::optional<std::string> ProtocolLayer::text(std::string_view name) const {
  auto* v = find(name);
  if (v && std::holds_alternative<std::string>(*v)) return std::get<std::string>(*v);
  return std::nullopt;
}

bool ProtocolLayer::flag(std::string_view name) const {
  auto* v = find(name);
  return v && std::holds_alternative<bool>(*v) && std::get<bool>(*v);
}

const ProtocolLayer* DissectedPacket::layer(std::string_view protocol) const {
  for (const auto& l : layers) {
    if (l.protocol == protocol) return &l;
  }
  return nullptr;
}

std::string_view label_of(const DissectedPacket& packet) {
  return packet.layers.empty() ? kData : packet.layers.back().protocol;
}

void DissectorRegistry::add_link_type(std::uint32_t link_type, DissectorEntry entry) { link_types_[link_type] = entry; }
void DissectorRegistry::add_ethertype(std::uint32_t ethertype, DissectorEntry entry) { ethertypes_[ethertype] = entry; }
void DissectorRegistry::add_ip_protocol(std::uint32_t proto, DissectorEntry entry) { ip_protocols_[proto] = entry; }
void DissectorRegistry::add_tcp_port(std::uint16_t port, DissectorEntry entry) { tcp_ports_[port] = entry; }
void DissectorRegistry::add_udp_port(std::uint16_t port, DissectorEntry entry) { udp_ports_[port] = entry; }
void DissectorRegistry::add_payload_probe(Table transport, ProbeFn probe, DissectorEntry entry) {
  probes_.push_back(Probe{transport, probe, entry});
}

const DissectorEntry* DissectorRegistry::lookup(const Handoff& handoff, ByteView payload,
                                                std::uint16_t* matched_port) const {
  auto exact = [](const auto& table, auto key) -> const DissectorEntry* {
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  };
  if (matched_port) *matched_port = 0;
  switch (handoff.table) {
    case Table::None: return nullptr;
    case Table::LinkType: return exact(link_types_, handoff.key);
    case Table::EtherType: return exact(ethertypes_, handoff.key);
    case Table::IpProto: return exact(ip_protocols_, handoff.key);
    case Table::TcpPort:
    case Table::UdpPort: {
      const auto& ports = handoff.table == Table::TcpPort ? tcp_ports_ : udp_ports_;
      auto lo = std::min(handoff.src_port, handoff.dst_port);
      auto hi = std::max(handoff.src_port, handoff.dst_port);
      for (auto port : {lo, hi}) {
        if (auto* e = exact(ports, port)) {
          if (matched_port) *matched_port = port;
          return e;
        }
      }
      for (const auto& probe : probes_) {
        if (probe.transport == handoff.table && probe.probe(payload)) return &probe.entry;
      }
      return nullptr;
    }
  }
  return nullptr;
}

bool DissectorRegistry::knows_protocol(std::string_view protocol) const {
  auto list = protocols();
  return std::find(list.begin(), list.end(), protocol) != list.end();
}

std::vector<std::string_view> DissectorRegistry::protocols() const {
  std::set<std::string_view> names{kData};
  for (const auto* table : {&link_types_, &ethertypes_, &ip_protocols_}) {
    for (const auto& [k, e] : *table) names.insert(e.protocol);
  }
  for (const auto* table : {&tcp_ports_, &udp_ports_}) {
    for (const auto& [k, e] : *table) names.insert(e.protocol);
  }
  for (const auto& p : probes_) names.insert(p.entry.protocol);
  names.erase(std::string_view{});
  return {names.begin(), names.end()};
}

DissectedPacket DissectorRegistry::dissect(const RawPacketRecord& record) const {
  DissectedPacket p;
  p.index = record.index;
  p.timestamp = record.timestamp;
  p.length = record.original_length;
  p.captured_length = static_cast<std::uint32_t>(record.data.size());
  ByteView frame(record.data);

  ByteRange range{0, frame.size()};
  Handoff next{Table::LinkType, record.link_type};
  while (true) {
    if (range.length == 0 && !p.layers.empty()) break;
    if (p.layers.size() >= kMaxLayers) {
      p.layers.push_back(data_layer(range));
      break;
    }
    auto payload = frame.subspan(range.offset, range.length);
    std::uint16_t matched_port = 0;
    const DissectorEntry* entry = lookup(next, payload, &matched_port);
    if (!entry) {
      p.layers.push_back(data_layer(range));
      break;
    }
    LayerInput in{frame, range, entry->protocol, next.src_port, next.dst_port, matched_port};
    auto out = entry->fn(in);
    // A dissector must stay inside its parent's range; anything else is treated as malformed.
    if (!out || !range.contains(out->layer.payload)) {
      p.layers.push_back(data_layer(range));
      break;
    }
    range = out->layer.payload;
    next = out->next;
    if (!out->layer.protocol.empty()) p.layers.push_back(std::move(out->layer));
    if (next.table == Table::None) break;
  }
  p.label = label_of(p);
  pick_addresses(p);
  p.info = summarize(p);
  return p;
}

DissectedPacket dissect(const RawPacketRecord& record) { return DissectorRegistry::standard().dissect(record); }

std::vector<DissectedPacket> dissect_all(const RawCapture& capture, const ProgressSink& sink,
                                         std::size_t chunk_records) {
  const auto& registry = DissectorRegistry::standard();
  std::vector<DissectedPacket> out;
  out.reserve(capture.records.size());
  std::size_t total_bytes = 0;
  for (const auto& r : capture.records) total_bytes += r.data.size();
  std::size_t bytes_done = 0;
  chunk_records = std::max<std::size_t>(chunk_records, 1);
  const Timestamp origin = capture.records.empty() ? Timestamp{} : capture.records.front().timestamp;
  for (std::size_t i = 0; i < capture.records.size(); i += chunk_records) {
    std::size_t end = std::min(capture.records.size(), i + chunk_records);
    for (std::size_t j = i; j < end; ++j) {
      const auto& rec = capture.records[j];
      auto p = registry.dissect(rec);
      p.time_relative = Duration(rec.timestamp.nanos_since(origin));
      bytes_done += rec.data.size();
      out.push_back(std::move(p));
    }
    if (sink && !sink(ParseProgress{out.size(), bytes_done, total_bytes})) break;
  }
  return out;
}

}  // namespace pcaptopo
