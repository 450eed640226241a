#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "sawec/channel.hpp"

namespace sawec {

struct CfrCapture {
  ChannelConfig config;
  std::vector<CfrSample> samples;
};

// Binary layout (all little-endian):
//   "SAWECCFR" | u32 version=1 | u32 reserved=0
//   f64 carrier_freq_hz | f64 subcarrier_spacing_hz | f64 antenna_spacing_m | f64 speed_of_light
//   u64 K | u64 N | u64 sample_count
//   per sample: f64 timestamp_s, then K*N pairs (f64 re, f64 im), row-major over k then n.
// The stored antenna spacing is the resolved value, never the "half wavelength" sentinel.
void write_capture(std::ostream& out, const CfrCapture& capture);
CfrCapture read_capture(std::istream& in);
void write_capture_file(const std::filesystem::path& path, const CfrCapture& capture);
CfrCapture read_capture_file(const std::filesystem::path& path);

nlohmann::json channel_config_to_json(const ChannelConfig& cfg);
ChannelConfig channel_config_from_json(const nlohmann::json& j);

// Lossless text form for debugging.
nlohmann::json capture_to_json(const CfrCapture& capture);
CfrCapture capture_from_json(const nlohmann::json& j);

}  // namespace sawec
