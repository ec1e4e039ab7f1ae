#pragma once

#include "pcaptopo/bytes.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaptopo {

/// Hard cap on records ingested from one capture file.
inline constexpr std::size_t kPacketSafeguard = 100'000;

/// Absolute capture time at nanosecond precision.
struct Timestamp {
  std::int64_t seconds = 0;
  std::uint32_t nanos = 0;  // always < 1e9

  auto operator<=>(const Timestamp&) const = default;

  static Timestamp from_ticks(std::uint64_t ticks, std::uint64_t ticks_per_second);
  double to_double() const { return static_cast<double>(seconds) + nanos * 1e-9; }
  std::int64_t nanos_since(const Timestamp& origin) const;
};

enum class CaptureKind { PcapMicroseconds, PcapNanoseconds, PcapNg };

struct CaptureFormat {
  CaptureKind kind = CaptureKind::PcapMicroseconds;
  // Legacy PCAP only; PCAPNG byte order is taken per section.
  ByteOrder byte_order = ByteOrder::LittleEndian;

  bool operator==(const CaptureFormat&) const = default;
};

struct InterfaceDescription {
  std::uint32_t interface_id = 0;
  std::uint32_t section = 0;
  std::uint32_t link_type = 0;
  std::uint64_t timestamp_resolution = 1'000'000;  // ticks per second
  std::int64_t timestamp_offset = 0;               // seconds, if_tsoffset
  std::uint32_t snaplen = 0;                       // 0 means unlimited
  std::optional<std::string> name;
};

struct RawPacketRecord {
  std::size_t index = 0;
  Timestamp timestamp;
  std::uint32_t captured_length = 0;
  std::uint32_t original_length = 0;
  std::uint32_t link_type = 0;
  std::uint32_t interface_id = 0;
  Bytes data;

  /// Real captures sometimes record captured_length > original_length.
  bool length_anomaly() const { return captured_length > original_length; }
};

/// A byte offset plus a reason. Used both for the malformed tail and for warnings.
struct Diagnostic {
  std::size_t offset = 0;
  std::string reason;
};

struct RawCapture {
  CaptureFormat format;
  std::vector<RawPacketRecord> records;
  std::vector<InterfaceDescription> interfaces;
  bool truncated_at_safeguard = false;
  bool cancelled = false;
  std::optional<Diagnostic> malformed_tail;
  std::vector<Diagnostic> warnings;
};

/// The leading magic matched no supported capture format.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(std::string magic_hex);
  const std::string& magic_hex() const { return magic_hex_; }

 private:
  std::string magic_hex_;
};

/// File or section header is truncated or inconsistent.
class HeaderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseProgress {
  std::size_t records_parsed = 0;
  std::size_t bytes_consumed = 0;
  std::size_t total_bytes = 0;
};

/// Called between chunks. Returning false cancels the job.
using ProgressSink = std::function<bool(const ParseProgress&)>;

struct ParseOptions {
  std::size_t chunk_records = 4096;
  std::size_t safeguard = kPacketSafeguard;
};

CaptureFormat detect_format(ByteView prefix);

RawCapture parse_pcap(ByteView bytes, const CaptureFormat& format, const ParseOptions& options = {});
RawCapture parse_pcapng(ByteView bytes, const ParseOptions& options = {});
RawCapture parse_capture(ByteView bytes, const ProgressSink& sink = {}, const ParseOptions& options = {});

/// Incremental reader behind the parse_* entry points. Format and header
/// validation happen in the constructor; records are decoded by read_some.
class CaptureReader {
 public:
  explicit CaptureReader(ByteView bytes, ParseOptions options = {});
  CaptureReader(ByteView bytes, const CaptureFormat& format, ParseOptions options = {});
  ~CaptureReader();
  CaptureReader(CaptureReader&&) noexcept;
  CaptureReader& operator=(CaptureReader&&) noexcept;

  const CaptureFormat& format() const;
  bool done() const;
  /// Decodes up to max_records further records. Returns the number decoded.
  std::size_t read_some(std::size_t max_records);
  ParseProgress progress() const;
  /// Marks the partial result as cancelled and stops reading.
  void cancel();
  RawCapture finish() &&;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pcaptopo
