#pragma once

#include "pcaptopo/dissect.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaptopo {

inline constexpr std::size_t kNodeCap = 80;

using HostKey = Address;

/// A packet sequence, optionally narrowed to a subset of positions (a filter result).
class PacketSet {
 public:
  PacketSet(std::span<const DissectedPacket> packets) : packets_(packets), all_(true) {}
  PacketSet(const std::vector<DissectedPacket>& packets) : PacketSet(std::span<const DissectedPacket>(packets)) {}
  PacketSet(std::span<const DissectedPacket> packets, std::span<const std::size_t> positions)
      : packets_(packets), positions_(positions), all_(false) {}

  std::size_t size() const { return all_ ? packets_.size() : positions_.size(); }
  const DissectedPacket& operator[](std::size_t i) const { return all_ ? packets_[i] : packets_[positions_[i]]; }

 private:
  std::span<const DissectedPacket> packets_;
  std::span<const std::size_t> positions_;
  bool all_;
};

struct HostNode {
  HostKey key;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::set<std::string> protocols;
};

struct ConversationEdge {
  HostKey a;  // a < b
  HostKey b;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::map<std::string, std::uint64_t> protocols;
  Timestamp first_seen;
  Timestamp last_seen;
};

struct LegendEntry {
  std::string label;
  std::uint64_t packets = 0;
  std::size_t rank = 0;  // 1-based
};

struct TopologyGraph {
  std::vector<HostNode> nodes;  // rank order
  std::vector<ConversationEdge> edges;  // sorted by (a, b)
  std::size_t total_hosts = 0;  // before the cap
  std::vector<LegendEntry> legend;
};

struct ConversationEntry {
  HostKey peer;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::map<std::string, std::uint64_t> protocols;
  Timestamp first_seen;
  Timestamp last_seen;
};

class UnknownHost : public std::runtime_error {
 public:
  explicit UnknownHost(const std::string& key) : std::runtime_error("host not in topology: " + key) {}
};

/// Rank order: more packets first, then more bytes, then ascending key.
bool ranks_before(const HostNode& x, const HostNode& y);

std::map<std::pair<HostKey, HostKey>, ConversationEdge> host_pairs(const PacketSet& packets);
std::vector<HostNode> all_hosts(const PacketSet& packets);
std::vector<LegendEntry> legend(const PacketSet& packets);
TopologyGraph build_topology(const PacketSet& packets, std::size_t cap = kNodeCap);

/// Incident edges of `host`, most packets first, ties by ascending peer key.
std::vector<ConversationEntry> conversation_detail(const TopologyGraph& graph, const HostKey& host);

nlohmann::json to_json(const TopologyGraph& graph);
nlohmann::json to_json(const std::vector<LegendEntry>& legend);
nlohmann::json to_json(const HostKey& host, const std::vector<ConversationEntry>& detail);

/// Compact serialization shared by the CLI and the service so both emit identical bytes.
std::string topology_text(const TopologyGraph& graph);

}  // namespace pcaptopo
