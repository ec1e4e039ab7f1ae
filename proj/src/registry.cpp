#include "pcaptopo/dissect.hpp"

#include "dissectors.hpp"

namespace pcaptopo {

namespace {

namespace d = dissectors;

// Well-known ports that map to a protocol name only. Both transports unless noted.
struct PortName {
  std::uint16_t port;
  std::string_view protocol;
  bool tcp = true;
  bool udp = true;
};

constexpr PortName kPortNames[] = {
    {7, "echo"},           {9, "discard"},         {13, "daytime"},        {19, "chargen"},
    {20, "ftp-data", true, false},                 {23, "telnet", true, false},
    {37, "time"},          {43, "whois", true, false},                     {49, "tacacs"},
    {69, "tftp", false, true},                     {70, "gopher", true, false},
    {79, "finger", true, false},                   {88, "kerberos"},       {102, "cotp", true, false},
    {110, "pop", true, false},                     {111, "portmap"},       {113, "ident", true, false},
    {119, "nntp", true, false},                    {135, "dcerpc"},        {137, "nbns", false, true},
    {138, "nbdgm", false, true},                   {139, "nbss", true, false},
    {143, "imap", true, false},                    {179, "bgp", true, false},
    {194, "irc", true, false},                     {389, "ldap"},          {427, "srvloc"},
    {445, "smb", true, false},                     {464, "kpasswd"},       {500, "isakmp", false, true},
    {502, "modbus", true, false},                  {513, "rlogin", true, false},
    {514, "syslog", false, true},                  {515, "lpd", true, false},
    {520, "rip", false, true},                     {521, "ripng", false, true},
    {554, "rtsp", true, false},                    {631, "ipp", true, false},
    {873, "rsync", true, false},                   {1080, "socks", true, false},
    {1194, "openvpn"},     {1433, "tds", true, false},                     {1521, "tns", true, false},
    {1701, "l2tp", false, true},                   {1723, "pptp", true, false},
    {1812, "radius", false, true},                 {1813, "radius", false, true},
    {1883, "mqtt", true, false},                   {1900, "ssdp", false, true},
    {2049, "nfs"},         {2055, "netflow", false, true},                 {2152, "gtp", false, true},
    {2181, "zookeeper", true, false},              {3260, "iscsi", true, false},
    {3306, "mysql", true, false},                  {3389, "rdp", true, false},
    {3478, "stun"},        {4500, "isakmp", false, true},                  {4739, "ipfix"},
    {4789, "vxlan", false, true},                  {5060, "sip"},          {5222, "xmpp", true, false},
    {5355, "llmnr", false, true},                  {5432, "pgsql", true, false},
    {5672, "amqp", true, false},                   {5683, "coap", false, true},
    {5900, "vnc", true, false},                    {6343, "sflow", false, true},
    {6379, "redis", true, false},                  {6653, "openflow", true, false},
    {6667, "irc", true, false},                    {9092, "kafka", true, false},
    {11211, "memcache"},   {20000, "dnp3", true, false},                   {27017, "mongo", true, false},
    {47808, "bacnet", false, true},
};

struct NumberName {
  std::uint32_t key;
  std::string_view protocol;
};

constexpr NumberName kIpProtoNames[] = {
    {2, "igmp"}, {8, "egp"}, {47, "gre"}, {50, "esp"}, {51, "ah"}, {89, "ospf"}, {103, "pim"}, {112, "vrrp"}, {132, "sctp"},
};

constexpr NumberName kEtherTypeNames[] = {
    {0x8035, "rarp"}, {0x8137, "ipx"},   {0x8847, "mpls"},  {0x8848, "mpls"}, {0x8863, "pppoed"},
    {0x8864, "pppoes"}, {0x888E, "eapol"}, {0x88CC, "lldp"}, {0x88F7, "ptp"},
};

DissectorRegistry build_standard() {
  DissectorRegistry r;

  r.add_link_type(0, {"null", d::null_loopback});
  r.add_link_type(1, {"eth", d::ethernet});
  r.add_link_type(12, {"", d::raw_ip});
  r.add_link_type(14, {"", d::raw_ip});
  r.add_link_type(101, {"", d::raw_ip});
  r.add_link_type(108, {"null", d::null_loopback});
  r.add_link_type(113, {"sll", d::linux_sll});
  r.add_link_type(228, {"", d::raw_ip});
  r.add_link_type(229, {"", d::raw_ip});
  r.add_link_type(276, {"sll", d::linux_sll2});

  r.add_ethertype(0x0800, {"ip", d::ipv4});
  r.add_ethertype(0x0806, {"arp", d::arp});
  r.add_ethertype(0x8100, {"vlan", d::vlan});
  r.add_ethertype(0x88A8, {"vlan", d::vlan});
  r.add_ethertype(0x86DD, {"ipv6", d::ipv6});
  r.add_ethertype(d::kEtherTypeLlc, {"llc", d::llc});
  r.add_ethertype(d::kEtherTypeStp, {"stp", d::label_only});
  for (const auto& e : kEtherTypeNames) r.add_ethertype(e.key, {e.protocol, d::label_only});

  r.add_ip_protocol(1, {"icmp", d::icmp});
  r.add_ip_protocol(4, {"ip", d::ipv4});
  r.add_ip_protocol(6, {"tcp", d::tcp});
  r.add_ip_protocol(17, {"udp", d::udp});
  r.add_ip_protocol(41, {"ipv6", d::ipv6});
  r.add_ip_protocol(58, {"icmpv6", d::icmpv6});
  for (const auto& e : kIpProtoNames) r.add_ip_protocol(e.key, {e.protocol, d::label_only});

  for (const auto& p : kPortNames) {
    if (p.tcp) r.add_tcp_port(p.port, {p.protocol, d::label_only});
    if (p.udp) r.add_udp_port(p.port, {p.protocol, d::label_only});
  }

  r.add_udp_port(53, {"dns", d::dns});
  r.add_tcp_port(53, {"dns", d::dns_tcp});
  r.add_udp_port(5353, {"mdns", d::dns});
  r.add_udp_port(67, {"dhcp", d::dhcp});
  r.add_udp_port(68, {"dhcp", d::dhcp});
  r.add_udp_port(546, {"dhcpv6", d::dhcpv6});
  r.add_udp_port(547, {"dhcpv6", d::dhcpv6});
  r.add_udp_port(123, {"ntp", d::ntp});
  r.add_udp_port(161, {"snmp", d::snmp});
  r.add_udp_port(162, {"snmp", d::snmp});
  for (std::uint16_t port : {80, 8000, 8080}) r.add_tcp_port(port, {"http", d::http});
  for (std::uint16_t port : {443, 465, 636, 853, 993, 995, 8443}) r.add_tcp_port(port, {"tls", d::tls});
  r.add_udp_port(443, {"quic", d::label_only});
  r.add_tcp_port(22, {"ssh", d::ssh});
  r.add_tcp_port(21, {"ftp", d::ftp});
  r.add_tcp_port(25, {"smtp", d::smtp});
  r.add_tcp_port(587, {"smtp", d::smtp});

  r.add_payload_probe(Table::TcpPort, d::probe_tls, {"tls", d::tls});
  r.add_payload_probe(Table::TcpPort, d::probe_http, {"http", d::http});
  r.add_payload_probe(Table::TcpPort, d::probe_ssh, {"ssh", d::ssh});
  return r;
}

}  // namespace

const DissectorRegistry& DissectorRegistry::standard() {
  static const DissectorRegistry registry = build_standard();
  return registry;
}

}  // namespace pcaptopo
