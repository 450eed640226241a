// Command-line front end over the sawec pipeline. Each stage reads and writes
// inside one run directory, so `run` is generate + estimate + detect.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sawec/error.hpp"
#include "sawec/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string scenario;
  std::string out = "run";
  std::optional<double> alpha;
  std::string strategy = "all";
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_std;
  bool no_crop = false;
  std::string crop_dir;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sawec::IoError("cannot open " + path.string() + " for writing");
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw sawec::IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw sawec::IoError(path.string() + ": " + e.what());
  }
}

// Scenario from --scenario, or the copy stored in the run directory.
sawec::Scenario load_scenario(const Options& o) {
  sawec::Scenario scn;
  if (!o.scenario.empty()) {
    scn = sawec::load_scenario_file(o.scenario);
  } else if (fs::exists(fs::path(o.out) / "scenario.json")) {
    scn = sawec::scenario_from_json(read_json(fs::path(o.out) / "scenario.json"));
  } else {
    throw sawec::ConfigError("no --scenario given and no scenario.json in " + o.out);
  }
  if (o.seed) scn.seed = *o.seed;
  if (o.noise_std) scn.noise_std = *o.noise_std;
  if (o.alpha) scn.roi.alpha = *o.alpha;
  scn.validate();
  return scn;
}

sawec::PipelineOptions pipeline_options(const Options& o) {
  sawec::PipelineOptions p;
  if (o.strategy != "all") p.strategies = {sawec::strategy_from_string(o.strategy)};
  p.crop_frames = !o.no_crop;
  if (!o.crop_dir.empty()) p.crop_dir = fs::path(o.crop_dir);
  return p;
}

void write_estimates(const fs::path& path, const sawec::CfrCapture& cap,
                     const std::vector<sawec::SampleEstimates>& est) {
  std::ostringstream s;
  sawec::write_estimates_jsonl(s, cap, est);
  write_text(path, s.str());
}

sawec::EstimatesFile read_estimates(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw sawec::IoError("cannot open " + path.string());
  return sawec::read_estimates_jsonl(in);
}

void write_results(const fs::path& dir, const sawec::PipelineResult& r) {
  std::ostringstream log;
  sawec::write_cluster_log(log, r.frames);
  write_text(dir / "clusters.jsonl", log.str());
  write_text(dir / "rois.json", sawec::rois_to_json(r.rois).dump(2) + "\n");
  std::ostringstream csv;
  sawec::write_metrics_csv(csv, r.metrics);
  write_text(dir / "metrics.csv", csv.str());
  write_text(dir / "summary.json", r.summary.dump(2) + "\n");
}

void cmd_generate(const Options& o) {
  const auto scn = load_scenario(o);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const auto g = sawec::generate(scn);
  write_text(dir / "scenario.json", sawec::scenario_to_json(scn).dump(2) + "\n");
  sawec::write_capture_file(dir / "capture.cfr", g.capture);
  sawec::write_capture_file(dir / "calibration.cfr", g.calibration);
  write_text(dir / "ground_truth.json", sawec::ground_truth_to_json(g.truth).dump(2) + "\n");
  sawec::write_manifest(dir, scn, "generate");
}

void cmd_estimate(const Options& o) {
  const auto scn = load_scenario(o);
  const fs::path dir(o.out);
  const auto cap = sawec::read_capture_file(dir / "capture.cfr");
  sawec::check_capture_matches(cap, scn);
  write_estimates(dir / "estimates.jsonl", cap, sawec::estimate_capture(cap, scn.estimator));
  if (scn.background_subtraction && fs::exists(dir / "calibration.cfr")) {
    const auto cal = sawec::read_capture_file(dir / "calibration.cfr");
    sawec::check_capture_matches(cal, scn);
    write_estimates(dir / "calibration_estimates.jsonl", cal, sawec::estimate_capture(cal, scn.estimator));
  }
  sawec::write_manifest(dir, scn, "estimate");
}

void cmd_detect(const Options& o) {
  const auto scn = load_scenario(o);
  const fs::path dir(o.out);
  const auto est = read_estimates(dir / "estimates.jsonl");
  sawec::EstimatesFile cal;
  if (scn.background_subtraction) {
    if (!fs::exists(dir / "calibration_estimates.jsonl")) {
      throw sawec::IoError("background subtraction needs calibration_estimates.jsonl");
    }
    cal = read_estimates(dir / "calibration_estimates.jsonl");
  }
  const auto truth = sawec::ground_truth_from_json(read_json(dir / "ground_truth.json"));
  const auto r = sawec::finish_pipeline(scn, truth, est.estimates, cal.estimates, est.timestamps,
                                        pipeline_options(o));
  write_results(dir, r);
  sawec::write_manifest(dir, scn, "detect");
}

void cmd_run(const Options& o) {
  const auto scn = load_scenario(o);
  const auto g = sawec::generate(scn);
  const auto r = sawec::run_pipeline(scn, g, pipeline_options(o));
  sawec::write_run_directory(o.out, scn, g, r);
}

void cmd_report(const Options& o) {
  const fs::path dir(o.out);
  std::ifstream in(dir / "metrics.csv");
  if (!in) throw sawec::IoError("cannot open " + (dir / "metrics.csv").string());
  const auto rows = sawec::read_metrics_csv(in);
  json report;
  if (fs::exists(dir / "summary.json")) report = read_json(dir / "summary.json");
  report["strategies"] = sawec::metrics_summary(rows);
  std::cout << report.dump(2) << "\n";
}

void fail(const std::string& code, const std::string& message, int status) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
  std::exit(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensing-assisted ROI offloading simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub, bool pipeline_flags) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON file");
    sub->add_option("--out", o.out, "Run directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "Override the scenario seed");
    sub->add_option("--noise-std", o.noise_std, "Override the CFR noise standard deviation");
    if (pipeline_flags) {
      sub->add_option("--alpha", o.alpha, "ROI sizing factor")->check(CLI::PositiveNumber);
      sub->add_option("--strategy", o.strategy, "Offloading strategy")
          ->check(CLI::IsMember({"sawec", "full", "tiles", "all"}))
          ->capture_default_str();
      sub->add_flag("--no-crop", o.no_crop, "Skip rendering and cropping frames");
      sub->add_option("--crop-dir", o.crop_dir, "Write ROI crops as PPM files here");
    }
  };

  auto* gen = app.add_subcommand("generate", "Synthesize CFR captures and ground truth");
  auto* est = app.add_subcommand("estimate", "Estimate AoA/range paths for every CFR sample");
  auto* det = app.add_subcommand("detect", "Cluster, track, extract ROIs and compute metrics");
  auto* run = app.add_subcommand("run", "Generate, estimate and detect in one go");
  auto* rep = app.add_subcommand("report", "Print per-strategy metrics of a run directory");
  add_common(gen, false);
  add_common(est, false);
  add_common(det, true);
  add_common(run, true);
  rep->add_option("--out", o.out, "Run directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage_error", e.what(), 2);
  }

  try {
    if (*gen) cmd_generate(o);
    if (*est) cmd_estimate(o);
    if (*det) cmd_detect(o);
    if (*run) cmd_run(o);
    if (*rep) cmd_report(o);
  } catch (const sawec::Error& e) {
    fail(e.code(), e.what(), 1);
  } catch (const std::exception& e) {
    fail("internal_error", e.what(), 1);
  }
  return 0;
}
