#include "sawec/capture_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "sawec/error.hpp"

namespace sawec {
namespace {

constexpr std::array<char, 8> kMagic = {'S', 'A', 'W', 'E', 'C', 'C', 'F', 'R'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b.data(), b.size());
}

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b.data(), b.size());
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw IoError("truncated CFR capture");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw IoError("truncated CFR capture");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_capture(std::ostream& out, const CfrCapture& capture) {
  const auto& cfg = capture.config;
  cfg.validate();
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  put_u32(out, 0);
  put_f64(out, cfg.carrier_freq_hz);
  put_f64(out, cfg.subcarrier_spacing_hz);
  put_f64(out, cfg.spacing_m());
  put_f64(out, cfg.speed_of_light_mps);
  put_u64(out, cfg.num_subcarriers);
  put_u64(out, cfg.num_rx_antennas);
  put_u64(out, capture.samples.size());
  for (const auto& s : capture.samples) {
    if (!s.matches(cfg)) throw ConfigError("CFR sample does not match capture config");
    put_f64(out, s.timestamp_s());
    for (const auto& v : s.data()) {
      put_f64(out, v.real());
      put_f64(out, v.imag());
    }
  }
  if (!out) throw IoError("failed writing CFR capture");
}

CfrCapture read_capture(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a CFR capture (bad magic)");
  const auto version = get_u32(in);
  if (version != kVersion) throw IoError("unsupported CFR capture version " + std::to_string(version));
  (void)get_u32(in);

  CfrCapture cap;
  auto& cfg = cap.config;
  cfg.carrier_freq_hz = get_f64(in);
  cfg.subcarrier_spacing_hz = get_f64(in);
  cfg.antenna_spacing_m = get_f64(in);
  cfg.speed_of_light_mps = get_f64(in);
  cfg.num_subcarriers = get_u64(in);
  cfg.num_rx_antennas = get_u64(in);
  cfg.validate();
  const auto count = get_u64(in);
  cap.samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    CfrSample s(get_f64(in), cfg.num_subcarriers, cfg.num_rx_antennas);
    for (auto& v : s.data()) {
      const double re = get_f64(in);
      const double im = get_f64(in);
      v = cplx(re, im);
    }
    if (!s.all_finite()) throw IoError("CFR capture contains non-finite entries");
    cap.samples.push_back(std::move(s));
  }
  return cap;
}

void write_capture_file(const std::filesystem::path& path, const CfrCapture& capture) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_capture(out, capture);
}

CfrCapture read_capture_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_capture(in);
}

nlohmann::json channel_config_to_json(const ChannelConfig& cfg) {
  return {{"carrier_freq_hz", cfg.carrier_freq_hz},
          {"subcarrier_spacing_hz", cfg.subcarrier_spacing_hz},
          {"num_subcarriers", cfg.num_subcarriers},
          {"num_rx_antennas", cfg.num_rx_antennas},
          {"antenna_spacing_m", cfg.spacing_m()},
          {"speed_of_light_mps", cfg.speed_of_light_mps}};
}

ChannelConfig channel_config_from_json(const nlohmann::json& j) {
  ChannelConfig cfg;
  cfg.carrier_freq_hz = j.value("carrier_freq_hz", cfg.carrier_freq_hz);
  cfg.subcarrier_spacing_hz = j.value("subcarrier_spacing_hz", cfg.subcarrier_spacing_hz);
  cfg.num_subcarriers = j.value("num_subcarriers", cfg.num_subcarriers);
  cfg.num_rx_antennas = j.value("num_rx_antennas", cfg.num_rx_antennas);
  cfg.antenna_spacing_m = j.value("antenna_spacing_m", cfg.antenna_spacing_m);
  cfg.speed_of_light_mps = j.value("speed_of_light_mps", cfg.speed_of_light_mps);
  cfg.validate();
  return cfg;
}

nlohmann::json capture_to_json(const CfrCapture& capture) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : capture.samples) {
    std::vector<double> re;
    std::vector<double> im;
    re.reserve(s.data().size());
    im.reserve(s.data().size());
    for (const auto& v : s.data()) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    samples.push_back({{"timestamp_s", s.timestamp_s()}, {"re", re}, {"im", im}});
  }
  return {{"config", channel_config_to_json(capture.config)}, {"samples", samples}};
}

CfrCapture capture_from_json(const nlohmann::json& j) {
  CfrCapture cap;
  cap.config = channel_config_from_json(j.at("config"));
  const auto& cfg = cap.config;
  for (const auto& js : j.at("samples")) {
    CfrSample s(js.at("timestamp_s").get<double>(), cfg.num_subcarriers, cfg.num_rx_antennas);
    const auto re = js.at("re").get<std::vector<double>>();
    const auto im = js.at("im").get<std::vector<double>>();
    if (re.size() != s.data().size() || im.size() != s.data().size()) {
      throw ConfigError("JSON CFR sample has wrong entry count");
    }
    for (std::size_t i = 0; i < re.size(); ++i) s.data()[i] = cplx(re[i], im[i]);
    cap.samples.push_back(std::move(s));
  }
  return cap;
}

}  // namespace sawec
