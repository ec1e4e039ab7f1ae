#include "pcaptopo/topology.hpp"

#include <algorithm>
#include <unordered_map>

namespace pcaptopo {

namespace {

struct AddressHash {
  std::size_t operator()(const Address& a) const noexcept {
    std::size_t h = static_cast<std::size_t>(a.kind) * 0x9E3779B97F4A7C15ull;
    for (auto o : a.octets) h = (h ^ o) * 0x100000001B3ull;
    return h;
  }
};

void touch(HostNode& node, const DissectedPacket& p) {
  node.packets += 1;
  node.bytes += p.length;
  node.protocols.emplace(p.label);
}

std::unordered_map<Address, HostNode, AddressHash> collect_hosts(const PacketSet& packets) {
  std::unordered_map<Address, HostNode, AddressHash> hosts;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const auto& p = packets[i];
    if (p.src_addr) {
      auto& n = hosts[*p.src_addr];
      n.key = *p.src_addr;
      touch(n, p);
    }
    if (p.dst_addr && (!p.src_addr || *p.dst_addr != *p.src_addr)) {
      auto& n = hosts[*p.dst_addr];
      n.key = *p.dst_addr;
      touch(n, p);
    }
  }
  return hosts;
}

nlohmann::json protocol_counts(const std::map<std::string, std::uint64_t>& counts) {
  auto j = nlohmann::json::object();
  for (const auto& [label, n] : counts) j[label] = n;
  return j;
}

}  // namespace

bool ranks_before(const HostNode& x, const HostNode& y) {
  if (x.packets != y.packets) return x.packets > y.packets;
  if (x.bytes != y.bytes) return x.bytes > y.bytes;
  return x.key < y.key;
}

std::map<std::pair<HostKey, HostKey>, ConversationEdge> host_pairs(const PacketSet& packets) {
  std::map<std::pair<HostKey, HostKey>, ConversationEdge> edges;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const auto& p = packets[i];
    if (!p.src_addr || !p.dst_addr || *p.src_addr == *p.dst_addr) continue;
    auto a = std::min(*p.src_addr, *p.dst_addr);
    auto b = std::max(*p.src_addr, *p.dst_addr);
    auto [it, fresh] = edges.try_emplace({a, b});
    auto& e = it->second;
    if (fresh) {
      e.a = a;
      e.b = b;
      e.first_seen = e.last_seen = p.timestamp;
    }
    e.packets += 1;
    e.bytes += p.length;
    e.protocols[std::string(p.label)] += 1;
    e.first_seen = std::min(e.first_seen, p.timestamp);
    e.last_seen = std::max(e.last_seen, p.timestamp);
  }
  return edges;
}

std::vector<HostNode> all_hosts(const PacketSet& packets) {
  auto hosts = collect_hosts(packets);
  std::vector<HostNode> out;
  out.reserve(hosts.size());
  for (auto& [k, n] : hosts) out.push_back(std::move(n));
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

std::vector<LegendEntry> legend(const PacketSet& packets) {
  std::map<std::string_view, std::uint64_t> counts;
  for (std::size_t i = 0; i < packets.size(); ++i) counts[packets[i].label] += 1;
  std::vector<LegendEntry> out;
  out.reserve(counts.size());
  for (const auto& [label, n] : counts) out.push_back(LegendEntry{std::string(label), n, 0});
  std::stable_sort(out.begin(), out.end(), [](const LegendEntry& x, const LegendEntry& y) {
    return x.packets != y.packets ? x.packets > y.packets : x.label < y.label;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

TopologyGraph build_topology(const PacketSet& packets, std::size_t cap) {
  TopologyGraph g;
  auto hosts = all_hosts(packets);
  g.total_hosts = hosts.size();
  if (hosts.size() > cap) hosts.resize(cap);
  g.nodes = std::move(hosts);

  std::set<HostKey> kept;
  for (const auto& n : g.nodes) kept.insert(n.key);
  for (auto& [pair, edge] : host_pairs(packets)) {
    if (kept.count(pair.first) && kept.count(pair.second)) g.edges.push_back(std::move(edge));
  }
  g.legend = legend(packets);
  return g;
}

std::vector<ConversationEntry> conversation_detail(const TopologyGraph& graph, const HostKey& host) {
  bool present = std::any_of(graph.nodes.begin(), graph.nodes.end(), [&](const HostNode& n) { return n.key == host; });
  if (!present) throw UnknownHost(host.to_string());
  std::vector<ConversationEntry> out;
  for (const auto& e : graph.edges) {
    if (e.a != host && e.b != host) continue;
    out.push_back(ConversationEntry{e.a == host ? e.b : e.a, e.packets, e.bytes, e.protocols, e.first_seen, e.last_seen});
  }
  std::sort(out.begin(), out.end(), [](const ConversationEntry& x, const ConversationEntry& y) {
    return x.packets != y.packets ? x.packets > y.packets : x.peer < y.peer;
  });
  return out;
}

nlohmann::json to_json(const std::vector<LegendEntry>& entries) {
  auto j = nlohmann::json::array();
  for (const auto& e : entries) j.push_back({{"label", e.label}, {"packets", e.packets}});
  return j;
}

nlohmann::json to_json(const TopologyGraph& graph) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back({{"id", n.key.to_string()},
                     {"kind", kind_name(n.key.kind)},
                     {"packets", n.packets},
                     {"bytes", n.bytes},
                     {"protocols", n.protocols}});
  }
  auto edges = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"a", e.a.to_string()},
                     {"b", e.b.to_string()},
                     {"packets", e.packets},
                     {"bytes", e.bytes},
                     {"protocols", protocol_counts(e.protocols)}});
  }
  return {{"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"totalHosts", graph.total_hosts},
          {"legend", to_json(graph.legend)}};
}

nlohmann::json to_json(const HostKey& host, const std::vector<ConversationEntry>& detail) {
  auto peers = nlohmann::json::array();
  std::uint64_t total = 0;
  for (const auto& c : detail) {
    total += c.packets;
    peers.push_back({{"peer", c.peer.to_string()},
                     {"kind", kind_name(c.peer.kind)},
                     {"packets", c.packets},
                     {"bytes", c.bytes},
                     {"protocols", protocol_counts(c.protocols)},
                     {"firstSeen", c.first_seen.to_double()},
                     {"lastSeen", c.last_seen.to_double()}});
  }
  return {{"host", host.to_string()}, {"packets", total}, {"conversations", std::move(peers)}};
}

std::string topology_text(const TopologyGraph& graph) { return to_json(graph).dump(); }

}  // namespace pcaptopo
