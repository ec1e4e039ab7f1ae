#include "pcaptopo/capture.hpp"
#include "pcaptopo/demo.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace pcaptopo;
using testsupport::NgWriter;
using testsupport::PcapLayout;

namespace {

RawPacketRecord record(std::int64_t sec, std::uint32_t ns, Bytes data) {
  RawPacketRecord r;
  r.timestamp = {sec, ns};
  r.data = std::move(data);
  r.captured_length = static_cast<std::uint32_t>(r.data.size());
  r.original_length = r.captured_length;
  r.link_type = 1;
  return r;
}

void check_same_records(const std::vector<RawPacketRecord>& got, const std::vector<RawPacketRecord>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].index == i);
    CHECK(got[i].timestamp == want[i].timestamp);
    CHECK(got[i].captured_length == want[i].data.size());
    CHECK(got[i].original_length == want[i].original_length);
    CHECK(got[i].data == want[i].data);
  }
}

}  // namespace

TEST_CASE("detect_format recognises every magic in both byte orders") {
  auto detect = [](std::initializer_list<std::uint8_t> b) {
    Bytes v(b);
    return detect_format(v);
  };
  CHECK(detect({0xD4, 0xC3, 0xB2, 0xA1}) == CaptureFormat{CaptureKind::PcapMicroseconds, ByteOrder::LittleEndian});
  CHECK(detect({0xA1, 0xB2, 0xC3, 0xD4}) == CaptureFormat{CaptureKind::PcapMicroseconds, ByteOrder::BigEndian});
  CHECK(detect({0x4D, 0x3C, 0xB2, 0xA1}) == CaptureFormat{CaptureKind::PcapNanoseconds, ByteOrder::LittleEndian});
  CHECK(detect({0xA1, 0xB2, 0x3C, 0x4D}) == CaptureFormat{CaptureKind::PcapNanoseconds, ByteOrder::BigEndian});
  CHECK(detect({0x0A, 0x0D, 0x0D, 0x0A}).kind == CaptureKind::PcapNg);
}

TEST_CASE("unknown magic reports the leading bytes as hex") {
  Bytes garbage{'G', 'A', 'R', 'B', 'A', 'G', 'E'};
  try {
    detect_format(garbage);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.magic_hex() == "47415242");
    CHECK(std::string(e.what()).find("47415242") != std::string::npos);
  }
  Bytes two{0x01, 0xFF};
  try {
    parse_capture(two);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.magic_hex() == "01FF");
  }
  CHECK_THROWS_AS(parse_capture(Bytes{}), FormatError);
}

TEST_CASE("pcap in all four layouts yields identical records") {
  std::vector<RawPacketRecord> recs{record(1'600'000'000, 123'456'000, {1, 2, 3}), record(1'600'000'001, 0, {}),
                                    record(1'600'000'002, 999'999'000, Bytes(70, 0xAB))};
  for (bool be : {false, true}) {
    for (bool ns : {false, true}) {
      CAPTURE(be);
      CAPTURE(ns);
      auto file = testsupport::pcap_file(recs, PcapLayout{be, ns, 1});
      auto cap = parse_capture(file);
      CHECK(cap.format.kind == (ns ? CaptureKind::PcapNanoseconds : CaptureKind::PcapMicroseconds));
      CHECK(cap.format.byte_order == (be ? ByteOrder::BigEndian : ByteOrder::LittleEndian));
      CHECK_FALSE(cap.malformed_tail);
      CHECK_FALSE(cap.truncated_at_safeguard);
      check_same_records(cap.records, recs);
    }
  }
}

TEST_CASE("pcap link type masks the FCS bits") {
  auto file = testsupport::pcap_file({record(1, 0, {0})}, PcapLayout{false, false, 0x10000000 | 113});
  auto cap = parse_capture(file);
  REQUIRE(cap.records.size() == 1);
  CHECK(cap.records[0].link_type == 113);
}

TEST_CASE("pcap header problems are HeaderErrors") {
  auto file = testsupport::pcap_file({}, PcapLayout{});
  CHECK(parse_capture(file).records.empty());
  Bytes short_header(file.begin(), file.begin() + 20);
  CHECK_THROWS_AS(parse_capture(short_header), HeaderError);
  Bytes bad_version = file;
  bad_version[4] = 3;
  CHECK_THROWS_AS(parse_capture(bad_version), HeaderError);
}

TEST_CASE("truncated pcap tails keep earlier records and report the offset") {
  std::vector<RawPacketRecord> recs{record(10, 0, Bytes(40, 1)), record(11, 0, Bytes(40, 2))};
  auto file = testsupport::pcap_file(recs, PcapLayout{});
  SUBCASE("record data cut short") {
    Bytes cut(file.begin(), file.end() - 5);
    auto cap = parse_capture(cut);
    REQUIRE(cap.records.size() == 1);
    REQUIRE(cap.malformed_tail);
    CHECK(cap.malformed_tail->offset == 24 + 16 + 40);
  }
  SUBCASE("partial record header") {
    Bytes cut(file.begin(), file.begin() + 24 + 16 + 40 + 7);
    auto cap = parse_capture(cut);
    CHECK(cap.records.size() == 1);
    REQUIRE(cap.malformed_tail);
    CHECK(cap.malformed_tail->offset == 24 + 56);
  }
}

TEST_CASE("safeguard flag is set only when a further record exists") {
  ParseOptions opts;
  opts.safeguard = 5;
  testsupport::Rng rng(7);
  auto exact = testsupport::pcap_file(testsupport::random_records(rng, 5, 1), PcapLayout{});
  auto cap = parse_capture(exact, {}, opts);
  CHECK(cap.records.size() == 5);
  CHECK_FALSE(cap.truncated_at_safeguard);

  auto over = testsupport::pcap_file(testsupport::random_records(rng, 6, 1), PcapLayout{});
  cap = parse_capture(over, {}, opts);
  CHECK(cap.records.size() == 5);
  CHECK(cap.truncated_at_safeguard);
}

TEST_CASE("progress sink sees chunks and can cancel") {
  testsupport::Rng rng(3);
  auto file = testsupport::pcap_file(testsupport::random_records(rng, 100, 1), PcapLayout{});
  ParseOptions opts;
  opts.chunk_records = 10;
  std::vector<ParseProgress> seen;
  auto cap = parse_capture(
      file, [&](const ParseProgress& p) { seen.push_back(p); return true; }, opts);
  CHECK(cap.records.size() == 100);
  REQUIRE(seen.size() >= 10);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i].bytes_consumed >= seen[i - 1].bytes_consumed);
  CHECK(seen.back().bytes_consumed == file.size());
  CHECK(seen.back().total_bytes == file.size());

  int calls = 0;
  cap = parse_capture(file, [&](const ParseProgress&) { return ++calls < 3; }, opts);
  CHECK(cap.cancelled);
  CHECK(cap.records.size() == 30);
  CHECK_FALSE(cap.truncated_at_safeguard);
}

TEST_CASE("CaptureReader in small steps equals a one-shot parse") {
  testsupport::Rng rng(11);
  auto file = testsupport::pcap_file(testsupport::random_records(rng, 57, 1), PcapLayout{true, true, 1});
  CaptureReader reader(file);
  while (!reader.done()) reader.read_some(4);
  auto stepped = std::move(reader).finish();
  auto whole = parse_capture(file);
  check_same_records(stepped.records, whole.records);
}

TEST_CASE("pcapng with if_tsresol, if_tsoffset and several interfaces") {
  NgWriter w;
  w.section();
  w.interface(1);                      // microseconds
  w.interface(101, std::uint8_t{9});   // nanoseconds, raw IP
  w.interface(1, std::uint8_t{0x80 | 10}, 100);  // 2^-10 s, offset 100 s
  w.enhanced(0, 1'700'000'000'123'456ull, {1, 2, 3});
  w.enhanced(1, 1'700'000'000'123'456'789ull, {4});
  w.enhanced(2, 1024 * 5 + 512, {5, 6});
  auto cap = parse_capture(w.out);
  CHECK(cap.format.kind == CaptureKind::PcapNg);
  REQUIRE(cap.records.size() == 3);
  CHECK(cap.records[0].timestamp == Timestamp{1'700'000'000, 123'456'000});
  CHECK(cap.records[0].link_type == 1);
  CHECK(cap.records[1].timestamp == Timestamp{1'700'000'000, 123'456'789});
  CHECK(cap.records[1].link_type == 101);
  CHECK(cap.records[1].interface_id == 1);
  CHECK(cap.records[2].timestamp == Timestamp{105, 500'000'000});
  REQUIRE(cap.interfaces.size() == 3);
  CHECK(cap.interfaces[1].timestamp_resolution == 1'000'000'000);
  CHECK(cap.warnings.empty());
}

TEST_CASE("pcapng big-endian section, simple packets and unknown blocks") {
  NgWriter w;
  w.big_endian = true;
  w.section();
  w.interface(1);
  w.raw_block(0x0000ABCD, {1, 2, 3, 4, 5});
  w.simple({9, 9, 9}, 3);
  w.enhanced(0, 2'000'000, {7});
  auto cap = parse_capture(w.out);
  CHECK(cap.format.byte_order == ByteOrder::BigEndian);
  REQUIRE(cap.records.size() == 2);
  CHECK(cap.records[0].original_length == 3);
  CHECK(cap.records[0].data == Bytes{9, 9, 9});  // block padding excluded
  CHECK(cap.records[1].timestamp == Timestamp{2, 0});
  CHECK_FALSE(cap.malformed_tail);
}

TEST_CASE("simple packets are cut to the interface snaplen") {
  NgWriter w;
  w.section();
  auto idb = w.out.size();
  w.interface(1);
  // Little-endian snaplen field at block offset 12: 65535 -> 4.
  w.out[idb + 12] = 4;
  w.out[idb + 13] = 0;
  w.simple({1, 2, 3, 4}, 60);
  auto cap = parse_capture(w.out);
  REQUIRE(cap.records.size() == 1);
  REQUIRE(cap.interfaces.size() == 1);
  CHECK(cap.interfaces[0].snaplen == 4);
  CHECK(cap.records[0].data == Bytes{1, 2, 3, 4});
  CHECK(cap.records[0].original_length == 60);
  CHECK(cap.records[0].length_anomaly() == false);
}

TEST_CASE("a new section resets the interface table and may switch byte order") {
  NgWriter first;
  first.section();
  first.interface(1);
  first.interface(113);
  first.enhanced(1, 0, {1});
  NgWriter second;
  second.big_endian = true;
  second.section();
  second.interface(101);
  second.enhanced(0, 0, {2});
  second.enhanced(1, 0, {3});  // interface 1 does not exist in this section
  Bytes file = first.out;
  file.insert(file.end(), second.out.begin(), second.out.end());
  auto cap = parse_capture(file);
  REQUIRE(cap.records.size() == 3);
  CHECK(cap.records[0].link_type == 113);
  CHECK(cap.records[1].link_type == 101);
  CHECK(cap.records[2].link_type == 1);
  CHECK(cap.warnings.size() == 1);
  CHECK(cap.interfaces.size() == 3);
  CHECK(cap.interfaces[2].section == 1);
}

TEST_CASE("pcapng block length violations stop parsing with a malformed tail") {
  NgWriter w;
  w.section();
  w.interface(1);
  w.enhanced(0, 0, {1, 2, 3, 4});
  auto good = w.out;
  SUBCASE("length not a multiple of four") {
    auto bad = good;
    w.out.clear();
    w.enhanced(0, 0, {5});
    auto at = bad.size();
    bad.insert(bad.end(), w.out.begin(), w.out.end());
    bad[at + 4] = 33;
    auto cap = parse_capture(bad);
    CHECK(cap.records.size() == 1);
    REQUIRE(cap.malformed_tail);
    CHECK(cap.malformed_tail->offset == at);
  }
  SUBCASE("length below the minimum") {
    auto bad = good;
    auto at = bad.size();
    bad.insert(bad.end(), {6, 0, 0, 0, 8, 0, 0, 0, 8, 0, 0, 0});
    auto cap = parse_capture(bad);
    CHECK(cap.records.size() == 1);
    REQUIRE(cap.malformed_tail);
    CHECK(cap.malformed_tail->offset == at);
  }
  SUBCASE("block runs past the end") {
    Bytes bad(good.begin(), good.end() - 4);
    auto cap = parse_capture(bad);
    CHECK(cap.records.empty());
    CHECK(cap.malformed_tail);
  }
  SUBCASE("broken first section header") {
    auto bad = good;
    bad[8] = 0;  // byte-order magic
    CHECK_THROWS_AS(parse_capture(bad), HeaderError);
  }
}

TEST_CASE("write_pcap round trips random captures at nanosecond precision") {
  testsupport::Rng rng(2024);
  for (int round = 0; round < 20; ++round) {
    RawCapture c;
    c.records = testsupport::random_records(rng, rng() % 60, 1);
    auto parsed = parse_pcap(write_pcap(c), CaptureFormat{CaptureKind::PcapNanoseconds, ByteOrder::LittleEndian});
    check_same_records(parsed.records, c.records);
  }
  CHECK(write_pcap(RawCapture{}).size() == 24);
}

TEST_CASE("Timestamp arithmetic") {
  CHECK(Timestamp::from_ticks(1'500'000, 1'000'000) == Timestamp{1, 500'000'000});
  CHECK(Timestamp::from_ticks(3, 2) == Timestamp{1, 500'000'000});
  Timestamp a{10, 100}, b{9, 999'999'900};
  CHECK(a.nanos_since(b) == 200);
  CHECK(b.nanos_since(a) == -200);
}
