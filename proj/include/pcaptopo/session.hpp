#pragma once

#include "pcaptopo/capture.hpp"
#include "pcaptopo/dissect.hpp"
#include "pcaptopo/filter.hpp"
#include "pcaptopo/topology.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pcaptopo {

inline constexpr std::size_t kMaxCaptureBytes = 500ull * 1024 * 1024;
inline constexpr std::size_t kMaxPageRows = 1000;

/// A parsed and dissected capture. Immutable once built.
struct Dataset {
  std::string source;  // "demo" or a caller-supplied name
  bool demo = false;
  CaptureFormat format;
  bool truncated_at_safeguard = false;
  std::optional<Diagnostic> malformed_tail;
  std::size_t warnings = 0;
  std::vector<DissectedPacket> packets;
};

/// (dataset, filter) plus everything derived from them, tagged with one generation.
struct Snapshot {
  std::shared_ptr<const Dataset> data;
  ExprPtr filter;
  std::string filter_text;  // canonical rendering
  std::vector<std::size_t> filtered;
  TopologyGraph topology;
  std::uint64_t generation = 0;

  PacketSet filtered_packets() const { return PacketSet(data->packets, filtered); }
};

/// Parse + dissect in one call. Throws FormatError or HeaderError.
std::shared_ptr<const Dataset> analyze(ByteView bytes, std::string source);
std::shared_ptr<const Dataset> demo_dataset();

/// Applies `filter` to `data` and derives the topology.
Snapshot derive(std::shared_ptr<const Dataset> data, ExprPtr filter, std::uint64_t generation);

struct PacketRow {
  std::size_t number = 0;  // 1-based capture ordinal
  std::string time;        // seconds since the first packet, 6 decimals
  std::string src;
  std::string dst;
  std::string protocol;
  std::uint32_t length = 0;
  std::string info;
};

struct PacketPage {
  std::vector<PacketRow> rows;
  std::size_t offset = 0;
  std::size_t total_filtered = 0;
  std::uint64_t generation = 0;
};

PacketRow packet_row(const DissectedPacket& p);
/// Throws std::invalid_argument unless 1 <= count <= kMaxPageRows.
PacketPage packet_page(const Snapshot& s, std::size_t offset, std::size_t count);

enum class Phase { Empty, Parsing, Ready };
std::string_view phase_name(Phase p);

struct Status {
  Phase phase = Phase::Empty;
  double progress = 0.0;  // of the running load, in [0, 1]
  std::size_t packet_count = 0;
  bool truncated_at_safeguard = false;
  bool demo = false;
  std::string source;
  std::uint64_t generation = 0;
  std::uint64_t job = 0;  // id of the most recent accepted load
};

/// set_filter was called while a load is in flight.
class SessionBusy : public std::runtime_error {
 public:
  SessionBusy() : std::runtime_error("a capture is being loaded") {}
};

struct SessionOptions {
  ParseOptions parse;
  std::size_t dissect_chunk = 4096;
  bool start_with_demo = true;
};

/// The single shared analytic state. Writers (load_capture, set_filter) are
/// serialized; readers get immutable snapshots.
class Session {
 public:
  explicit Session(SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Validates the header synchronously (throws FormatError/HeaderError and
  /// leaves state untouched), then parses and dissects on a worker thread.
  /// Cancels any load still running. Returns the job id.
  std::uint64_t load_capture(Bytes bytes, std::string source = "upload");

  /// Returns the new generation. Throws ParseError or SessionBusy; state is unchanged then.
  std::uint64_t set_filter(std::string_view text);

  std::shared_ptr<const Snapshot> snapshot() const;
  Status status() const;

  /// Blocks until no load is running. Returns false on timeout.
  bool wait_idle(std::chrono::milliseconds timeout) const;

 private:
  void run_job(std::stop_token stop, std::uint64_t job, std::shared_ptr<const Bytes> bytes, CaptureReader reader,
               std::string source);
  void set_progress(std::uint64_t job, double progress);

  SessionOptions options_;
  std::mutex writer_;
  mutable std::mutex state_;
  mutable std::condition_variable idle_;
  std::shared_ptr<const Snapshot> snapshot_;
  Phase phase_ = Phase::Empty;
  double progress_ = 0.0;
  std::uint64_t job_ = 0;
  std::jthread worker_;
};

nlohmann::json to_json(const PacketRow& row);
nlohmann::json to_json(const PacketPage& page);
nlohmann::json to_json(const Status& status);

}  // namespace pcaptopo
