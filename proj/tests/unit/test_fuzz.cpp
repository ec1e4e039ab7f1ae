#include "pcaptopo/demo.hpp"
#include "pcaptopo/filter.hpp"
#include "pcaptopo/topology.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace pcaptopo;

namespace {

// Returns true when the input produced a value or one of the typed errors.
bool total(const Bytes& input) {
  try {
    auto cap = parse_capture(input);
    auto packets = dissect_all(cap);
    build_topology(packets);
    return packets.size() == cap.records.size();
  } catch (const FormatError&) {
    return true;
  } catch (const HeaderError&) {
    return true;
  }
}

}  // namespace

TEST_CASE("mutated captures never escape as untyped failures") {
  testsupport::Rng rng(0xBADC0DE);
  std::vector<Bytes> seeds{generate_demo(), testsupport::read_fixture("be_multi.pcapng"),
                           testsupport::read_fixture("scapy.pcapng"), testsupport::read_fixture("be_usec.pcap")};
  for (int i = 0; i < 400; ++i) {
    Bytes b = seeds[rng() % seeds.size()];
    int flips = 1 + rng() % 16;
    for (int k = 0; k < flips; ++k) b[rng() % b.size()] = static_cast<std::uint8_t>(rng());
    if (rng() % 3 == 0) b.resize(rng() % b.size());
    CHECK(total(b));
  }
}

TEST_CASE("random bytes behind a valid magic") {
  testsupport::Rng rng(42);
  const std::uint8_t magics[][4] = {
      {0xD4, 0xC3, 0xB2, 0xA1}, {0xA1, 0xB2, 0xC3, 0xD4}, {0x4D, 0x3C, 0xB2, 0xA1}, {0x0A, 0x0D, 0x0D, 0x0A}};
  for (int i = 0; i < 400; ++i) {
    Bytes b(rng() % 300);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    if (b.size() >= 4) std::copy_n(magics[rng() % 4], 4, b.begin());
    CHECK(total(b));
  }
}

TEST_CASE("dissect is total on arbitrary frames and link types") {
  testsupport::Rng rng(7);
  const std::uint32_t links[] = {0, 1, 12, 101, 108, 113, 228, 229, 276, 9999};
  for (int i = 0; i < 2000; ++i) {
    RawPacketRecord r;
    r.link_type = links[rng() % std::size(links)];
    r.data.resize(rng() % 200);
    for (auto& x : r.data) x = static_cast<std::uint8_t>(rng());
    r.captured_length = r.original_length = static_cast<std::uint32_t>(r.data.size());
    auto p = dissect(r);
    if (!r.data.empty()) CHECK_FALSE(p.layers.empty());
    CHECK(p.label == label_of(p));
  }
}

TEST_CASE("filter parser only throws ParseError") {
  testsupport::Rng rng(11);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz.0123456789:=!<>&|()\" \\-_";
  const std::vector<std::string> words{"dns", "ip.addr", "==", "&&", "||", "!", "(", ")", "10.0.0.1", "tcp.port",
                                       "80", "contains", "\"x\"", "not", "and", "frame.len", ">", "eth.src"};
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    if (i % 2) {
      for (int k = rng() % 30; k > 0; --k) text.push_back(alphabet[rng() % alphabet.size()]);
    } else {
      for (int k = rng() % 8; k > 0; --k) text += words[rng() % words.size()] + " ";
    }
    CAPTURE(text);
    try {
      auto e = parse_filter(text);
      CHECK(*parse_filter(render(*e)) == *e);
    } catch (const ParseError& err) {
      CHECK(err.position() <= text.size());
    }
  }
}
