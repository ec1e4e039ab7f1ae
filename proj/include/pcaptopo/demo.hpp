#pragma once

#include "pcaptopo/capture.hpp"

namespace pcaptopo {

/// Epoch of the first demo packet (2023-11-14 22:13:20 UTC).
inline constexpr std::int64_t kDemoEpoch = 1'700'000'000;

/// The built-in startup capture as legacy PCAP bytes. Deterministic.
Bytes generate_demo();

/// Legacy PCAP, little-endian, nanosecond timestamps. The header link type is
/// taken from the first record (Ethernet when empty).
Bytes write_pcap(const RawCapture& capture);

}  // namespace pcaptopo
