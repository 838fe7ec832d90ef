// Command-line front end: track detections into trajectories, evaluate
// them against ground truth, synthesise scenarios, and sweep the
// association weight.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "occlusia/occlusia.hpp"

namespace {

using namespace occlusia;

const char* metrics_header() { return "Recall,Precision,FAF,GT,MT,PT,ML,Frag,IDS"; }

std::string metrics_row(const MetricsReport& m) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%.2f,%d,%.2f,%.2f,%.2f,%d,%d",
                100.0 * m.recall, 100.0 * m.precision, m.faf, m.gt,
                100.0 * m.mt, 100.0 * m.pt, 100.0 * m.ml, m.frag, m.ids);
  return buf;
}

/// --config beats the OCCLUSIA_CONFIG environment variable; without
/// either the built-in defaults apply.
TrackerConfig resolve_config(const std::string& config_path) {
  if (!config_path.empty())
    return load_tracker_config(Config::from_file(config_path));
  if (const char* env = std::getenv("OCCLUSIA_CONFIG"); env && *env)
    return load_tracker_config(Config::from_file(env));
  return {};
}

int run_track(const std::string& det_path, const std::string& frames_dir,
              const std::string& config_path, const std::string& out_path) {
  const TrackerConfig cfg = resolve_config(config_path);
  const auto dets = read_detections(std::filesystem::path(det_path));
  std::unique_ptr<PpmDirectorySource> source;
  if (!frames_dir.empty())
    source = std::make_unique<PpmDirectorySource>(frames_dir);
  write_trajectories(run_sequence(dets, source.get(), cfg), out_path);
  return 0;
}

int run_eval(const std::string& hyp_path, const std::string& gt_path,
             double iou_threshold) {
  EvalParams params;
  params.iou_threshold = iou_threshold;
  const MetricsReport m = evaluate(read_trajectories(std::filesystem::path(gt_path)),
                                   read_trajectories(std::filesystem::path(hyp_path)),
                                   params);
  std::cout << metrics_header() << "\n" << metrics_row(m) << "\n";
  return 0;
}

int run_synth(const std::string& preset, std::uint64_t seed,
              const std::string& out_dir, int frames, double dropout,
              double jitter) {
  ScenarioSpec spec = make_preset(preset, seed, frames);
  if (dropout >= 0.0) spec.noise.dropout = dropout;
  if (jitter >= 0.0) spec.noise.jitter = jitter;
  synth_scenario(spec, out_dir);
  return 0;
}

struct AlphaRange {
  double lo = 0.0, hi = 0.0, step = 0.0;
};

/// Parses "a:b:step" with step > 0 and a <= b.
bool parse_range(const std::string& s, AlphaRange& out) {
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) return false;
  try {
    std::size_t p1 = 0, p2 = 0, p3 = 0;
    const std::string a = s.substr(0, c1), b = s.substr(c1 + 1, c2 - c1 - 1),
                      st = s.substr(c2 + 1);
    out.lo = std::stod(a, &p1);
    out.hi = std::stod(b, &p2);
    out.step = std::stod(st, &p3);
    if (p1 != a.size() || p2 != b.size() || p3 != st.size()) return false;
  } catch (const std::exception&) {
    return false;
  }
  return out.step > 0.0 && out.lo <= out.hi;
}

int run_sweep(const std::string& det_path, const std::string& gt_path,
              const AlphaRange& range, const std::string& out_path) {
  const auto dets = read_detections(std::filesystem::path(det_path));
  const auto gt = read_trajectories(std::filesystem::path(gt_path));
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write sweep file " + out_path);
  out << "alpha1," << metrics_header() << "\n";
  const int points =
      static_cast<int>(std::floor((range.hi - range.lo) / range.step + 1e-9)) + 1;
  for (int k = 0; k < points; ++k) {
    const double alpha1 = range.lo + k * range.step;
    TrackerConfig cfg;
    cfg.assoc.weights = {alpha1, 1.0 - alpha1};
    const auto results = run_sequence(dets, nullptr, cfg);
    const MetricsReport m = evaluate(gt, to_trajectories(results));
    char head[32];
    std::snprintf(head, sizeof(head), "%.3f", alpha1);
    out << head << ',' << metrics_row(m) << "\n";
  }
  if (!out) throw IoError("write failed for " + out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pedestrian tracking over detection files"};
  app.require_subcommand(1);

  std::string det_path, frames_dir, config_path, out_path;
  CLI::App* track = app.add_subcommand("track", "Run the tracker");
  track->add_option("--detections", det_path, "Detection CSV")->required();
  track->add_option("--frames", frames_dir, "Directory of PPM frames");
  track->add_option("--config", config_path,
                    "Config file (falls back to $OCCLUSIA_CONFIG)");
  track->add_option("--out", out_path, "Trajectory CSV to write")->required();

  std::string hyp_path, gt_path;
  double iou_threshold = EvalParams{}.iou_threshold;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score trajectories");
  eval_cmd->add_option("--hyp", hyp_path, "Hypothesis trajectory CSV")->required();
  eval_cmd->add_option("--gt", gt_path, "Ground-truth trajectory CSV")->required();
  eval_cmd->add_option("--iou", iou_threshold, "Match threshold");

  std::string preset, synth_dir;
  std::uint64_t seed = 42;
  int frames = 0;
  double dropout = -1.0, jitter = -1.0;
  CLI::App* synth = app.add_subcommand("synth", "Generate a scenario");
  synth->add_option("--preset", preset, "crossing, parallel, group or dropout")
      ->required();
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--out", synth_dir, "Output directory")->required();
  synth->add_option("--frames", frames, "Length override");
  synth->add_option("--dropout", dropout, "Detection dropout probability");
  synth->add_option("--jitter", jitter, "Detection position sigma (px)");

  std::string sweep_det, sweep_gt, alpha_spec, sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "Grid over the overlap weight");
  sweep->add_option("--detections", sweep_det, "Detection CSV")->required();
  sweep->add_option("--gt", sweep_gt, "Ground-truth trajectory CSV")->required();
  sweep->add_option("--alpha1", alpha_spec, "Range a:b:step")->required();
  sweep->add_option("--out", sweep_out, "Metrics CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (track->parsed())
      return run_track(det_path, frames_dir, config_path, out_path);
    if (eval_cmd->parsed()) return run_eval(hyp_path, gt_path, iou_threshold);
    if (synth->parsed())
      return run_synth(preset, seed, synth_dir, frames, dropout, jitter);
    if (sweep->parsed()) {
      AlphaRange range;
      if (!parse_range(alpha_spec, range)) {
        std::cerr << "error: --alpha1 wants a:b:step with step > 0\n";
        return 1;
      }
      return run_sweep(sweep_det, sweep_gt, range, sweep_out);
    }
  } catch (const TrackingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
