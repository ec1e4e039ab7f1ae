#include "pcaptopo/session.hpp"

#include "pcaptopo/demo.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>

namespace pcaptopo {

namespace {

std::shared_ptr<Dataset> to_dataset(RawCapture raw, std::vector<DissectedPacket> packets, std::string source) {
  auto d = std::make_shared<Dataset>();
  d->source = std::move(source);
  d->format = raw.format;
  d->truncated_at_safeguard = raw.truncated_at_safeguard;
  d->malformed_tail = std::move(raw.malformed_tail);
  d->warnings = raw.warnings.size();
  d->packets = std::move(packets);
  return d;
}

std::string address_text(const std::optional<Address>& a) { return a ? a->to_string() : std::string(); }

}  // namespace

std::shared_ptr<const Dataset> analyze(ByteView bytes, std::string source) {
  auto raw = parse_capture(bytes);
  auto packets = dissect_all(raw, {});
  return to_dataset(std::move(raw), std::move(packets), std::move(source));
}

std::shared_ptr<const Dataset> demo_dataset() {
  static const std::shared_ptr<const Dataset> demo = [] {
    auto bytes = generate_demo();
    auto raw = parse_capture(bytes);
    auto packets = dissect_all(raw, {});
    auto d = to_dataset(std::move(raw), std::move(packets), "demo");
    d->demo = true;
    return std::shared_ptr<const Dataset>(std::move(d));
  }();
  return demo;
}

Snapshot derive(std::shared_ptr<const Dataset> data, ExprPtr filter, std::uint64_t generation) {
  Snapshot s;
  s.data = std::move(data);
  s.filter = filter ? std::move(filter) : make_match_all();
  s.filter_text = render(*s.filter);
  s.filtered = apply_filter(s.data->packets, *s.filter);
  s.topology = build_topology(PacketSet(s.data->packets, s.filtered));
  s.generation = generation;
  return s;
}

PacketRow packet_row(const DissectedPacket& p) {
  PacketRow r;
  r.number = p.index + 1;
  auto ns = p.time_relative.count();
  r.time = fmt::format("{}{}.{:06d}", ns < 0 ? "-" : "", std::abs(ns) / 1'000'000'000,
                       (std::abs(ns) % 1'000'000'000) / 1000);
  r.src = address_text(p.src_addr);
  r.dst = address_text(p.dst_addr);
  r.protocol = std::string(p.label);
  r.length = p.length;
  r.info = p.info;
  return r;
}

PacketPage packet_page(const Snapshot& s, std::size_t offset, std::size_t count) {
  if (count < 1 || count > kMaxPageRows) {
    throw std::invalid_argument(fmt::format("count must be between 1 and {}", kMaxPageRows));
  }
  PacketPage page;
  page.offset = offset;
  page.total_filtered = s.filtered.size();
  page.generation = s.generation;
  for (std::size_t i = offset; i < s.filtered.size() && i < offset + count; ++i) {
    page.rows.push_back(packet_row(s.data->packets[s.filtered[i]]));
  }
  return page;
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Empty: return "empty";
    case Phase::Parsing: return "parsing";
    case Phase::Ready: return "ready";
  }
  return "unknown";
}

Session::Session(SessionOptions options) : options_(options) {
  auto data = options_.start_with_demo ? demo_dataset() : std::make_shared<const Dataset>();
  snapshot_ = std::make_shared<const Snapshot>(derive(data, make_match_all(), 1));
  phase_ = options_.start_with_demo ? Phase::Ready : Phase::Empty;
}

Session::~Session() {
  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
  }
}

std::uint64_t Session::load_capture(Bytes bytes, std::string source) {
  if (bytes.size() > kMaxCaptureBytes) throw HeaderError("capture exceeds the 500 MB request limit");
  std::lock_guard writer(writer_);
  auto owned = std::make_shared<const Bytes>(std::move(bytes));
  CaptureReader reader(ByteView(*owned), options_.parse);  // throws before any state changes

  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
  }
  std::uint64_t job;
  {
    std::lock_guard lock(state_);
    job = ++job_;
    phase_ = Phase::Parsing;
    progress_ = 0.0;
  }
  worker_ = std::jthread([this, job, owned, r = std::move(reader), source = std::move(source)](
                             std::stop_token stop) mutable { run_job(stop, job, owned, std::move(r), std::move(source)); });
  return job;
}

void Session::set_progress(std::uint64_t job, double progress) {
  std::lock_guard lock(state_);
  if (job == job_) progress_ = std::clamp(progress, 0.0, 1.0);
}

void Session::run_job(std::stop_token stop, std::uint64_t job, std::shared_ptr<const Bytes> bytes,
                      CaptureReader reader, std::string source) {
  const double total = static_cast<double>(std::max<std::size_t>(bytes->size(), 1));
  auto abandon = [&] {
    std::lock_guard lock(state_);
    // A cancelled job is always superseded by the load that cancelled it, or by shutdown.
    if (job == job_) {
      phase_ = snapshot_->data->packets.empty() && !snapshot_->data->demo ? Phase::Empty : Phase::Ready;
      idle_.notify_all();
    }
  };
  while (!reader.done()) {
    if (stop.stop_requested()) return abandon();
    reader.read_some(options_.parse.chunk_records);
    set_progress(job, 0.5 * static_cast<double>(reader.progress().bytes_consumed) / total);
    std::this_thread::yield();
  }
  auto raw = std::move(reader).finish();
  const double records = static_cast<double>(std::max<std::size_t>(raw.records.size(), 1));
  auto packets = dissect_all(
      raw,
      [&](const ParseProgress& p) {
        if (stop.stop_requested()) return false;
        set_progress(job, 0.5 + 0.5 * static_cast<double>(p.records_parsed) / records);
        std::this_thread::yield();
        return true;
      },
      options_.dissect_chunk);
  if (stop.stop_requested()) return abandon();

  auto data = to_dataset(std::move(raw), std::move(packets), std::move(source));
  auto snap = derive(std::move(data), make_match_all(), 0);

  std::lock_guard lock(state_);
  if (job != job_) return;
  snap.generation = snapshot_->generation + 1;
  snapshot_ = std::make_shared<const Snapshot>(std::move(snap));
  phase_ = Phase::Ready;
  progress_ = 1.0;
  idle_.notify_all();
}

std::uint64_t Session::set_filter(std::string_view text) {
  std::lock_guard writer(writer_);
  std::shared_ptr<const Snapshot> current;
  {
    std::lock_guard lock(state_);
    if (phase_ == Phase::Parsing) throw SessionBusy();
    current = snapshot_;
  }
  auto expr = parse_filter(text);
  auto next = std::make_shared<const Snapshot>(derive(current->data, expr, current->generation + 1));
  std::lock_guard lock(state_);
  snapshot_ = next;
  return next->generation;
}

std::shared_ptr<const Snapshot> Session::snapshot() const {
  std::lock_guard lock(state_);
  return snapshot_;
}

Status Session::status() const {
  std::lock_guard lock(state_);
  Status s;
  s.phase = phase_;
  s.progress = phase_ == Phase::Parsing ? progress_ : (job_ ? 1.0 : 0.0);
  s.packet_count = snapshot_->data->packets.size();
  s.truncated_at_safeguard = snapshot_->data->truncated_at_safeguard;
  s.demo = snapshot_->data->demo;
  s.source = snapshot_->data->source;
  s.generation = snapshot_->generation;
  s.job = job_;
  return s;
}

bool Session::wait_idle(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(state_);
  return idle_.wait_for(lock, timeout, [&] { return phase_ != Phase::Parsing; });
}

nlohmann::json to_json(const PacketRow& r) {
  return {{"number", r.number}, {"time", r.time},         {"src", r.src},  {"dst", r.dst},
          {"protocol", r.protocol}, {"length", r.length}, {"info", r.info}};
}

nlohmann::json to_json(const PacketPage& page) {
  auto rows = nlohmann::json::array();
  for (const auto& r : page.rows) rows.push_back(to_json(r));
  return {{"rows", std::move(rows)},
          {"offset", page.offset},
          {"totalFiltered", page.total_filtered},
          {"generation", page.generation}};
}

nlohmann::json to_json(const Status& s) {
  return {{"phase", phase_name(s.phase)},
          {"progress", s.progress},
          {"packetCount", s.packet_count},
          {"truncatedAtSafeguard", s.truncated_at_safeguard},
          {"demo", s.demo},
          {"source", s.source},
          {"generation", s.generation},
          {"job", s.job}};
}

}  // namespace pcaptopo
