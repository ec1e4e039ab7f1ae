#include "pcaptopo/capture.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>

namespace pcaptopo {

namespace {

constexpr std::uint32_t kPcapMagicMicro = 0xA1B2C3D4;
constexpr std::uint32_t kPcapMagicNano = 0xA1B23C4D;
constexpr std::uint32_t kPcapngShb = 0x0A0D0D0A;
constexpr std::uint32_t kPcapngByteOrderMagic = 0x1A2B3C4D;

constexpr std::uint32_t kBlockIdb = 0x00000001;
constexpr std::uint32_t kBlockOpb = 0x00000002;
constexpr std::uint32_t kBlockSpb = 0x00000003;
constexpr std::uint32_t kBlockEpb = 0x00000006;

constexpr std::size_t kPcapHeaderLen = 24;
constexpr std::size_t kPcapRecordHeaderLen = 16;

// Link type assumed for packets that reference an interface the section never described.
constexpr std::uint32_t kFallbackLinkType = 1;

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
}

std::size_t pad4(std::size_t n) { return (n + 3) & ~std::size_t{3}; }

}  // namespace

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

void put_u16(Bytes& out, std::uint16_t v, ByteOrder order) {
  if (order == ByteOrder::LittleEndian) {
    out.push_back(v & 0xFF);
    out.push_back(v >> 8);
  } else {
    out.push_back(v >> 8);
    out.push_back(v & 0xFF);
  }
}

void put_u32(Bytes& out, std::uint32_t v, ByteOrder order) {
  if (order == ByteOrder::LittleEndian) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
  } else {
    for (int i = 3; i >= 0; --i) out.push_back((v >> (8 * i)) & 0xFF);
  }
}

Timestamp Timestamp::from_ticks(std::uint64_t ticks, std::uint64_t ticks_per_second) {
  if (ticks_per_second == 0) ticks_per_second = 1'000'000;
  Timestamp ts;
  std::uint64_t secs = ticks / ticks_per_second;
  std::uint64_t rem = ticks % ticks_per_second;
  ts.seconds = static_cast<std::int64_t>(std::min<std::uint64_t>(secs, std::numeric_limits<std::int64_t>::max()));
  ts.nanos = static_cast<std::uint32_t>(static_cast<unsigned __int128>(rem) * 1'000'000'000u / ticks_per_second);
  return ts;
}

std::int64_t Timestamp::nanos_since(const Timestamp& origin) const {
  return (seconds - origin.seconds) * 1'000'000'000 + (static_cast<std::int64_t>(nanos) - origin.nanos);
}

FormatError::FormatError(std::string magic_hex)
    : std::runtime_error(fmt::format("unsupported capture format (magic bytes: {})",
                                     magic_hex.empty() ? std::string("<none>") : magic_hex)),
      magic_hex_(std::move(magic_hex)) {}

CaptureFormat detect_format(ByteView prefix) {
  if (prefix.size() < 4) throw FormatError(to_hex(prefix));
  std::uint32_t magic = *load_u32(prefix, 0, ByteOrder::LittleEndian);
  switch (magic) {
    case kPcapMagicMicro: return {CaptureKind::PcapMicroseconds, ByteOrder::LittleEndian};
    case kPcapMagicNano: return {CaptureKind::PcapNanoseconds, ByteOrder::LittleEndian};
    case kPcapngShb: return {CaptureKind::PcapNg, ByteOrder::LittleEndian};
    default: break;
  }
  if (magic == byteswap32(kPcapMagicMicro)) return {CaptureKind::PcapMicroseconds, ByteOrder::BigEndian};
  if (magic == byteswap32(kPcapMagicNano)) return {CaptureKind::PcapNanoseconds, ByteOrder::BigEndian};
  throw FormatError(to_hex(prefix.first(4)));
}

struct CaptureReader::Impl {
  ByteView bytes;
  ParseOptions options;
  RawCapture out;
  std::size_t pos = 0;
  bool finished = false;

  // PCAP state
  std::uint32_t pcap_link_type = 0;
  std::uint64_t pcap_ticks_per_second = 1'000'000;

  // PCAPNG state
  ByteOrder section_order = ByteOrder::LittleEndian;
  std::uint32_t section_index = 0;
  bool seen_section = false;
  std::vector<std::size_t> section_interfaces;  // indices into out.interfaces

  void stop_malformed(std::size_t offset, std::string reason) {
    out.malformed_tail = Diagnostic{offset, std::move(reason)};
    finished = true;
  }

  bool at_safeguard() const { return out.records.size() >= options.safeguard; }

  // ---- legacy PCAP -------------------------------------------------------

  void open_pcap(const CaptureFormat& format) {
    out.format = format;
    if (bytes.size() < kPcapHeaderLen)
      throw HeaderError(fmt::format("pcap global header truncated: {} of {} bytes", bytes.size(), kPcapHeaderLen));
    CaptureFormat actual = detect_format(bytes.first(4));
    if (actual != format) throw HeaderError("pcap magic does not match the requested format");
    auto order = format.byte_order;
    auto major = *load_u16(bytes, 4, order);
    auto minor = *load_u16(bytes, 6, order);
    if (major != 2) throw HeaderError(fmt::format("unsupported pcap version {}.{}", major, minor));
    pcap_link_type = *load_u32(bytes, 20, order) & 0x0FFFFFFF;
    pcap_ticks_per_second = format.kind == CaptureKind::PcapNanoseconds ? 1'000'000'000 : 1'000'000;
    InterfaceDescription iface;
    iface.link_type = pcap_link_type;
    iface.timestamp_resolution = pcap_ticks_per_second;
    iface.snaplen = *load_u32(bytes, 16, order);
    out.interfaces.push_back(iface);
    pos = kPcapHeaderLen;
  }

  std::size_t read_pcap(std::size_t max_records) {
    std::size_t n = 0;
    auto order = out.format.byte_order;
    while (n < max_records && !finished) {
      std::size_t remaining = bytes.size() - pos;
      if (remaining == 0) {
        finished = true;
        break;
      }
      if (remaining < kPcapRecordHeaderLen) {
        stop_malformed(pos, fmt::format("truncated record header ({} of {} bytes)", remaining, kPcapRecordHeaderLen));
        break;
      }
      if (at_safeguard()) {
        out.truncated_at_safeguard = true;
        finished = true;
        break;
      }
      std::uint32_t ts_sec = *load_u32(bytes, pos, order);
      std::uint32_t ts_frac = *load_u32(bytes, pos + 4, order);
      std::uint32_t incl_len = *load_u32(bytes, pos + 8, order);
      std::uint32_t orig_len = *load_u32(bytes, pos + 12, order);
      if (incl_len > remaining - kPcapRecordHeaderLen) {
        stop_malformed(pos, fmt::format("record data ({} bytes) extends past end of file", incl_len));
        break;
      }
      RawPacketRecord rec;
      rec.index = out.records.size();
      rec.timestamp = Timestamp::from_ticks(std::uint64_t{ts_sec} * pcap_ticks_per_second + ts_frac, pcap_ticks_per_second);
      rec.captured_length = incl_len;
      rec.original_length = orig_len;
      rec.link_type = pcap_link_type;
      auto data = bytes.subspan(pos + kPcapRecordHeaderLen, incl_len);
      rec.data.assign(data.begin(), data.end());
      out.records.push_back(std::move(rec));
      pos += kPcapRecordHeaderLen + incl_len;
      ++n;
    }
    return n;
  }

  // ---- PCAPNG ------------------------------------------------------------

  void open_pcapng() {
    out.format = CaptureFormat{CaptureKind::PcapNg, ByteOrder::LittleEndian};
    if (bytes.size() < 28) throw HeaderError("pcapng section header block truncated");
    if (auto err = check_section_header(0)) throw HeaderError(*err);
    out.format.byte_order = section_order;
  }

  // Validates the SHB at `at` and, on success, starts a new section.
  std::optional<std::string> check_section_header(std::size_t at) {
    auto bom_le = load_u32(bytes, at + 8, ByteOrder::LittleEndian);
    if (!bom_le) return "section header block truncated";
    ByteOrder order;
    if (*bom_le == kPcapngByteOrderMagic) {
      order = ByteOrder::LittleEndian;
    } else if (*bom_le == byteswap32(kPcapngByteOrderMagic)) {
      order = ByteOrder::BigEndian;
    } else {
      return fmt::format("invalid byte-order magic {:08X}", *bom_le);
    }
    auto total = *load_u32(bytes, at + 4, order);
    if (total < 28 || total % 4 != 0) return fmt::format("invalid section header block length {}", total);
    if (total > bytes.size() - at) return "section header block extends past end of file";
    auto major = load_u16(bytes, at + 12, order);
    if (!major || *major != 1) return fmt::format("unsupported pcapng major version {}", major.value_or(0));
    if (*load_u32(bytes, at + total - 4, order) != total) return "section header block trailing length mismatch";
    section_order = order;
    if (seen_section) ++section_index;
    seen_section = true;
    section_interfaces.clear();
    return std::nullopt;
  }

  void read_interface(std::size_t at, std::uint32_t total) {
    auto order = section_order;
    InterfaceDescription idb;
    idb.section = section_index;
    idb.interface_id = static_cast<std::uint32_t>(section_interfaces.size());
    idb.link_type = *load_u16(bytes, at + 8, order);
    idb.snaplen = *load_u32(bytes, at + 12, order);
    std::size_t o = at + 16;
    std::size_t end = at + total - 4;
    while (o + 4 <= end) {
      std::uint16_t code = *load_u16(bytes, o, order);
      std::uint16_t len = *load_u16(bytes, o + 2, order);
      if (code == 0) break;
      if (len > end - (o + 4)) {
        out.warnings.push_back({o, "interface option extends past block end"});
        break;
      }
      auto value = bytes.subspan(o + 4, len);
      if (code == 2) {
        idb.name = std::string(value.begin(), value.end());
      } else if (code == 9 && len >= 1) {
        std::uint8_t v = value[0];
        bool base2 = v & 0x80;
        unsigned exp = v & 0x7F;
        if ((base2 && exp > 63) || (!base2 && exp > 19)) {
          out.warnings.push_back({o, fmt::format("unrepresentable if_tsresol 0x{:02X}, using microseconds", v)});
        } else if (base2) {
          idb.timestamp_resolution = std::uint64_t{1} << exp;
        } else {
          std::uint64_t r = 1;
          for (unsigned i = 0; i < exp; ++i) r *= 10;
          idb.timestamp_resolution = r;
        }
      } else if (code == 14 && len >= 8) {
        idb.timestamp_offset = static_cast<std::int64_t>(*load_u64(value, 0, order));
      }
      o += 4 + pad4(len);
    }
    section_interfaces.push_back(out.interfaces.size());
    out.interfaces.push_back(std::move(idb));
  }

  const InterfaceDescription* interface_for(std::uint32_t id) const {
    if (id >= section_interfaces.size()) return nullptr;
    return &out.interfaces[section_interfaces[id]];
  }

  void emit_packet(std::size_t block_at, std::uint32_t iface_id, std::uint64_t ticks, ByteView data,
                   std::uint32_t orig_len, bool has_timestamp) {
    RawPacketRecord rec;
    rec.index = out.records.size();
    rec.interface_id = iface_id;
    const auto* iface = interface_for(iface_id);
    std::uint64_t resolution = 1'000'000;
    if (iface) {
      rec.link_type = iface->link_type;
      resolution = iface->timestamp_resolution;
    } else {
      rec.link_type = kFallbackLinkType;
      out.warnings.push_back({block_at, fmt::format("packet references undefined interface {}", iface_id)});
    }
    if (has_timestamp) {
      rec.timestamp = Timestamp::from_ticks(ticks, resolution);
      if (iface) rec.timestamp.seconds += iface->timestamp_offset;
    }
    rec.captured_length = static_cast<std::uint32_t>(data.size());
    rec.original_length = orig_len;
    rec.data.assign(data.begin(), data.end());
    out.records.push_back(std::move(rec));
  }

  std::size_t read_pcapng(std::size_t max_records) {
    std::size_t n = 0;
    while (n < max_records && !finished) {
      std::size_t remaining = bytes.size() - pos;
      if (remaining == 0) {
        finished = true;
        break;
      }
      if (remaining < 12) {
        stop_malformed(pos, fmt::format("truncated block header ({} bytes left)", remaining));
        break;
      }
      std::uint32_t type = *load_u32(bytes, pos, section_order);
      if (type == kPcapngShb) {
        if (pos != 0) {
          if (auto err = check_section_header(pos)) {
            stop_malformed(pos, *err);
            break;
          }
        }
        pos += *load_u32(bytes, pos + 4, section_order);
        continue;
      }
      std::uint32_t total = *load_u32(bytes, pos + 4, section_order);
      if (total < 12 || total % 4 != 0) {
        stop_malformed(pos, fmt::format("invalid block length {} at offset {}", total, pos));
        break;
      }
      if (total > remaining) {
        stop_malformed(pos, fmt::format("block of {} bytes extends past end of file", total));
        break;
      }
      if (*load_u32(bytes, pos + total - 4, section_order) != total) {
        stop_malformed(pos, "block trailing length mismatch");
        break;
      }
      bool is_packet = type == kBlockEpb || type == kBlockSpb || type == kBlockOpb;
      if (is_packet && at_safeguard()) {
        out.truncated_at_safeguard = true;
        finished = true;
        break;
      }
      auto order = section_order;
      if (type == kBlockIdb) {
        if (total < 20) {
          stop_malformed(pos, "interface description block too short");
          break;
        }
        read_interface(pos, total);
      } else if (type == kBlockEpb || type == kBlockOpb) {
        if (total < 32) {
          stop_malformed(pos, "packet block too short");
          break;
        }
        std::uint32_t iface = type == kBlockEpb ? *load_u32(bytes, pos + 8, order) : *load_u16(bytes, pos + 8, order);
        std::uint64_t ticks = (std::uint64_t{*load_u32(bytes, pos + 12, order)} << 32) | *load_u32(bytes, pos + 16, order);
        std::uint32_t caplen = *load_u32(bytes, pos + 20, order);
        std::uint32_t origlen = *load_u32(bytes, pos + 24, order);
        if (caplen > total - 32) {
          stop_malformed(pos, fmt::format("captured length {} exceeds packet block", caplen));
          break;
        }
        emit_packet(pos, iface, ticks, bytes.subspan(pos + 28, caplen), origlen, true);
        ++n;
      } else if (type == kBlockSpb) {
        if (total < 16) {
          stop_malformed(pos, "simple packet block too short");
          break;
        }
        std::uint32_t origlen = *load_u32(bytes, pos + 8, order);
        // Simple packets carry no captured length: min(original, snaplen of interface 0), within the block.
        std::size_t caplen = std::min<std::size_t>(origlen, total - 16);
        if (const auto* iface = interface_for(0); iface && iface->snaplen > 0) {
          caplen = std::min<std::size_t>(caplen, iface->snaplen);
        }
        emit_packet(pos, 0, 0, bytes.subspan(pos + 12, caplen), origlen, false);
        ++n;
      }
      pos += total;
    }
    return n;
  }
};

CaptureReader::CaptureReader(ByteView bytes, ParseOptions options)
    : CaptureReader(bytes, detect_format(bytes.first(std::min<std::size_t>(bytes.size(), 4))), options) {}

CaptureReader::CaptureReader(ByteView bytes, const CaptureFormat& format, ParseOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->bytes = bytes;
  impl_->options = options;
  if (format.kind == CaptureKind::PcapNg) {
    impl_->open_pcapng();
  } else {
    impl_->open_pcap(format);
  }
}

CaptureReader::~CaptureReader() = default;
CaptureReader::CaptureReader(CaptureReader&&) noexcept = default;
CaptureReader& CaptureReader::operator=(CaptureReader&&) noexcept = default;

const CaptureFormat& CaptureReader::format() const { return impl_->out.format; }
bool CaptureReader::done() const { return impl_->finished; }

std::size_t CaptureReader::read_some(std::size_t max_records) {
  if (impl_->finished) return 0;
  if (impl_->out.format.kind == CaptureKind::PcapNg) return impl_->read_pcapng(max_records);
  return impl_->read_pcap(max_records);
}

ParseProgress CaptureReader::progress() const {
  return {impl_->out.records.size(), impl_->pos, impl_->bytes.size()};
}

void CaptureReader::cancel() {
  if (impl_->finished) return;
  impl_->out.cancelled = true;
  impl_->finished = true;
}

RawCapture CaptureReader::finish() && { return std::move(impl_->out); }

namespace {

RawCapture drain(CaptureReader reader, const ProgressSink& sink, const ParseOptions& options) {
  std::size_t chunk = std::max<std::size_t>(options.chunk_records, 1);
  while (!reader.done()) {
    reader.read_some(chunk);
    if (sink && !sink(reader.progress())) reader.cancel();
  }
  return std::move(reader).finish();
}

}  // namespace

RawCapture parse_pcap(ByteView bytes, const CaptureFormat& format, const ParseOptions& options) {
  if (format.kind == CaptureKind::PcapNg) throw HeaderError("parse_pcap called with a pcapng format");
  return drain(CaptureReader(bytes, format, options), {}, options);
}

RawCapture parse_pcapng(ByteView bytes, const ParseOptions& options) {
  return drain(CaptureReader(bytes, CaptureFormat{CaptureKind::PcapNg, ByteOrder::LittleEndian}, options), {}, options);
}

RawCapture parse_capture(ByteView bytes, const ProgressSink& sink, const ParseOptions& options) {
  return drain(CaptureReader(bytes, options), sink, options);
}

}  // namespace pcaptopo
