#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

namespace pcaptopo {

enum class OutputMode { TopologyJson, LegendTable, PacketsTable, Stats };

struct CliConfig {
  std::optional<std::string> input;  // demo when absent
  std::string filter;
  OutputMode mode = OutputMode::TopologyJson;
  std::size_t limit = 100;
  bool serve = false;
  int port = 0;  // 0 means PCAPTOPO_PORT or the default
  std::optional<std::string> static_dir;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Executes one configured command. Returns the process exit code.
int run(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and runs. Unknown or invalid flags exit with kExitUsage.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcaptopo
