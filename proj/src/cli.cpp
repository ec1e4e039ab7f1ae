#include "pcaptopo/cli.hpp"

#include "pcaptopo/http_api.hpp"
#include "pcaptopo/session.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

namespace pcaptopo {

namespace {

std::string format_name(const CaptureFormat& f) {
  switch (f.kind) {
    case CaptureKind::PcapNg: return "pcapng";
    case CaptureKind::PcapMicroseconds:
      return f.byte_order == ByteOrder::LittleEndian ? "pcap (microsecond, little-endian)"
                                                     : "pcap (microsecond, big-endian)";
    case CaptureKind::PcapNanoseconds:
      return f.byte_order == ByteOrder::LittleEndian ? "pcap (nanosecond, little-endian)"
                                                     : "pcap (nanosecond, big-endian)";
  }
  return "unknown";
}

std::string printable(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) > 0x7E) c = '.';
  }
  return out;
}

Bytes read_file(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) throw std::runtime_error(fmt::format("{}: file not found", path));
  if (std::filesystem::is_directory(path, ec)) throw std::runtime_error(fmt::format("{}: is a directory", path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("{}: cannot open: {}", path, std::strerror(errno)));
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_packets_table(const Snapshot& s, std::size_t limit, std::ostream& out) {
  out << fmt::format("{:>7} {:>12} {:<24} {:<24} {:<9} {:>6} {}\n", "No.", "Time", "Source", "Destination",
                     "Protocol", "Length", "Info");
  std::size_t shown = std::min(limit, s.filtered.size());
  for (std::size_t i = 0; i < shown; ++i) {
    auto r = packet_row(s.data->packets[s.filtered[i]]);
    out << fmt::format("{:>7} {:>12} {:<24} {:<24} {:<9} {:>6} {}\n", r.number, r.time, r.src, r.dst, r.protocol,
                       r.length, printable(r.info));
  }
  if (shown < s.filtered.size()) out << fmt::format("({} of {} packets shown)\n", shown, s.filtered.size());
}

void write_stats(const Snapshot& s, std::ostream& out) {
  const auto& d = *s.data;
  out << fmt::format("source: {}\n", d.source);
  out << fmt::format("format: {}\n", format_name(d.format));
  out << fmt::format("packets: {}\n", d.packets.size());
  out << fmt::format("filter: {}\n", s.filter_text.empty() ? "(none)" : s.filter_text);
  out << fmt::format("filtered: {}\n", s.filtered.size());
  out << fmt::format("hosts: {}\n", s.topology.total_hosts);
  out << fmt::format("nodes: {}\n", s.topology.nodes.size());
  out << fmt::format("conversations: {}\n", s.topology.edges.size());
  out << fmt::format("protocols: {}\n", s.topology.legend.size());
  out << fmt::format("truncated_at_safeguard: {}\n", d.truncated_at_safeguard);
  if (d.malformed_tail) {
    out << fmt::format("malformed_tail: offset {}: {}\n", d.malformed_tail->offset, d.malformed_tail->reason);
  } else {
    out << "malformed_tail: none\n";
  }
  out << fmt::format("warnings: {}\n", d.warnings);
}

int serve(const CliConfig& config, std::ostream& err) {
  Session session;
  if (config.input) {
    session.load_capture(read_file(*config.input), std::filesystem::path(*config.input).filename().string());
    session.wait_idle(std::chrono::hours(1));
  }
  if (!config.filter.empty()) session.set_filter(config.filter);
  ServerOptions options;
  options.port = config.port ? config.port : port_from_env();
  options.static_dir = config.static_dir;
  ApiServer server(session, options);
  int port = server.bind();
  err << fmt::format("serving on http://{}:{}\n", options.host, port) << std::flush;
  server.listen();
  return kExitOk;
}

}  // namespace

int run(const CliConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.serve) return serve(config, err);
    std::shared_ptr<const Dataset> data;
    if (config.input) {
      auto bytes = read_file(*config.input);
      data = analyze(bytes, std::filesystem::path(*config.input).filename().string());
    } else {
      data = demo_dataset();
    }
    auto snap = derive(data, parse_filter(config.filter), 1);
    switch (config.mode) {
      case OutputMode::TopologyJson: out << topology_text(snap.topology) << "\n"; break;
      case OutputMode::LegendTable:
        for (const auto& e : snap.topology.legend) out << fmt::format("{} {}\n", e.label, e.packets);
        break;
      case OutputMode::PacketsTable: write_packets_table(snap, config.limit, out); break;
      case OutputMode::Stats: write_stats(snap, out); break;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitFailure;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig config;
  CLI::App app{"Topology-first packet capture explorer"};
  app.name("pcaptopo");
  std::string input;
  app.add_option("capture", input, "PCAP or PCAPNG file (the built-in demo when omitted)");
  app.add_option("--filter,-f", config.filter, "Display filter, e.g. \"dns && ip.addr == 10.0.1.200\"");
  const std::map<std::string, OutputMode> modes{{"topology-json", OutputMode::TopologyJson},
                                                {"legend-table", OutputMode::LegendTable},
                                                {"packets-table", OutputMode::PacketsTable},
                                                {"stats", OutputMode::Stats}};
  auto* mode = app.add_option("--mode,-m", config.mode, "Output: topology-json, legend-table, packets-table, stats")
                   ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  auto* limit = app.add_option("--limit,-n", config.limit, "Rows for packets-table")->check(CLI::Range(1, 100'000'000));
  auto* serve_flag = app.add_flag("--serve", config.serve, "Run the HTTP/JSON service instead of printing");
  app.add_option("--port,-p", config.port, "Service port (default: PCAPTOPO_PORT or 8080)")
      ->check(CLI::Range(1, 65535))
      ->needs(serve_flag);
  app.add_option("--static", config.static_dir, "Directory served at / by the service")
      ->check(CLI::ExistingDirectory)
      ->needs(serve_flag);
  serve_flag->excludes(mode)->excludes(limit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  if (!input.empty()) config.input = input;
  return run(config, out, err);
}

}  // namespace pcaptopo
