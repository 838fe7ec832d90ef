#pragma once

// Flat key=value configuration with # comments, plus typed loaders for
// the tracker and evaluation parameter blocks.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "occlusia/appearance.hpp"
#include "occlusia/association.hpp"
#include "occlusia/core.hpp"
#include "occlusia/motion.hpp"

namespace occlusia {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

class Config {
 public:
  static Config from_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError("config line without '='", lineno);
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError("config line with empty key", lineno);
      c.values_[key] = value;
    }
    return c;
  }

  static Config from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  std::string get_string(const std::string& key, const std::string& def) const {
    const auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  double get_double(const std::string& key, double def) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " is not a number: '" +
                        it->second + "'");
    }
  }

  int get_int(const std::string& key, int def) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " is not an integer: '" +
                        it->second + "'");
    }
  }

  bool get_bool(const std::string& key, bool def) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + " is not a boolean: '" + it->second +
                      "'");
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

struct AssociationParams {
  AffinityWeights weights;
  double gate = 0.1;
  enum class Solver { bip, hungarian } solver = Solver::bip;
};

struct OcclusionParams {
  bool enabled = true;
  double min_overlap_area = 0.0;
};

struct PipelineParams {
  int t_max = 15;               // misses tolerated before termination
  double hist_blend = 0.1;      // reference-histogram update rate
  int min_hits = 1;             // detections required before a track is reported
  double ms_fuse_threshold = 0.5;  // min similarity to fuse a mean-shift fix
};

struct EvalParams {
  double iou_threshold = 0.5;
};

struct TrackerConfig {
  KalmanParams kf;
  AppearanceParams app;
  AssociationParams assoc;
  OcclusionParams occ;
  PipelineParams pipe;
};

inline TrackerConfig load_tracker_config(const Config& c) {
  TrackerConfig t;
  t.kf.sigma_process_pos = c.get_double("kf.sigma_process_pos", t.kf.sigma_process_pos);
  t.kf.sigma_process_size = c.get_double("kf.sigma_process_size", t.kf.sigma_process_size);
  t.kf.sigma_measure = c.get_double("kf.sigma_measure", t.kf.sigma_measure);
  t.kf.init_var_pos = c.get_double("kf.init_var_pos", t.kf.init_var_pos);
  t.kf.init_var_vel = c.get_double("kf.init_var_vel", t.kf.init_var_vel);

  t.app.bins = c.get_int("app.bins", t.app.bins);
  t.app.ms_max_iters = c.get_int("app.ms_max_iters", t.app.ms_max_iters);
  t.app.ms_epsilon = c.get_double("app.ms_epsilon", t.app.ms_epsilon);
  t.app.ratio_threshold = c.get_double("app.ratio_threshold", t.app.ratio_threshold);
  t.app.grid_cells = c.get_int("app.grid_cells", t.app.grid_cells);
  t.app.orient_bins = c.get_int("app.orient_bins", t.app.orient_bins);

  t.assoc.weights.alpha1 = c.get_double("assoc.alpha1", t.assoc.weights.alpha1);
  t.assoc.weights.alpha2 = c.get_double("assoc.alpha2", t.assoc.weights.alpha2);
  t.assoc.gate = c.get_double("assoc.gate", t.assoc.gate);
  const std::string solver = c.get_string("assoc.solver", "bip");
  if (solver == "bip")
    t.assoc.solver = AssociationParams::Solver::bip;
  else if (solver == "hungarian")
    t.assoc.solver = AssociationParams::Solver::hungarian;
  else
    throw ConfigError("assoc.solver must be 'bip' or 'hungarian', got '" +
                      solver + "'");

  t.occ.enabled = c.get_bool("occ.enabled", t.occ.enabled);
  t.occ.min_overlap_area = c.get_double("occ.min_overlap_area", t.occ.min_overlap_area);

  t.pipe.t_max = c.get_int("pipe.t_max", t.pipe.t_max);
  t.pipe.hist_blend = c.get_double("pipe.hist_blend", t.pipe.hist_blend);
  t.pipe.min_hits = c.get_int("pipe.min_hits", t.pipe.min_hits);
  t.pipe.ms_fuse_threshold =
      c.get_double("pipe.ms_fuse_threshold", t.pipe.ms_fuse_threshold);
  return t;
}

inline EvalParams load_eval_params(const Config& c) {
  EvalParams e;
  e.iou_threshold = c.get_double("eval.iou_threshold", e.iou_threshold);
  return e;
}

}  // namespace occlusia
