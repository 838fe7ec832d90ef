#pragma once

// Per-frame tracking loop: predict every agent, associate predictions
// with detections, run occlusion verification, then update motion and
// appearance state and refresh the overlap registry.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "occlusia/agent.hpp"
#include "occlusia/appearance.hpp"
#include "occlusia/association.hpp"
#include "occlusia/config.hpp"
#include "occlusia/core.hpp"
#include "occlusia/image.hpp"
#include "occlusia/motion.hpp"
#include "occlusia/occlusion.hpp"

namespace occlusia {

enum class OutputState { detected, predicted };

struct TrackOutput {
  AgentLabel label;
  BoundingBox box;
  OutputState state = OutputState::detected;
};

struct TrackEvent {
  enum class Kind { new_track, terminated, relabel, id_switch_suspect };
  Kind kind = Kind::new_track;
  AgentLabel label;      // subject of the event
  AgentLabel other;      // relabel: label the detection carried before
  int detection = -1;    // detection index within the frame, when relevant
};

struct FrameResult {
  int frame = 0;
  std::vector<TrackOutput> outputs;
  std::vector<TrackEvent> events;
};

struct TrackerState {
  std::map<AgentLabel, Agent> agents;
  GroupPairSet groups;  // overlap registry from the previous frame
  int next_label = 1;
  int frame_index = 0;  // last processed frame, 0 before the first step
};

/// Ordered source of frame pixels; frame indices are 1-based.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int frame_count() const = 0;
  virtual ImagePatch frame(int k) const = 0;
};

class VectorFrameSource final : public FrameSource {
 public:
  explicit VectorFrameSource(std::vector<ImagePatch> frames)
      : frames_(std::move(frames)) {}
  int frame_count() const override { return static_cast<int>(frames_.size()); }
  ImagePatch frame(int k) const override {
    if (k < 1 || k > frame_count())
      throw FrameOrderError("frame " + std::to_string(k) + " outside 1.." +
                            std::to_string(frame_count()));
    return frames_[static_cast<std::size_t>(k) - 1];
  }

 private:
  std::vector<ImagePatch> frames_;
};

namespace detail {

inline Histogram blend_histograms(const Histogram& old_h, const Histogram& new_h,
                                  double rate) {
  if (!old_h.valid()) return new_h;
  if (!new_h.valid() || old_h.bins.size() != new_h.bins.size()) return old_h;
  Histogram out = old_h;
  double total = 0.0;
  for (std::size_t i = 0; i < out.bins.size(); ++i) {
    out.bins[i] = (1.0 - rate) * old_h.bins[i] + rate * new_h.bins[i];
    total += out.bins[i];
  }
  if (total > 0.0)
    for (double& v : out.bins) v /= total;
  return out;
}

/// Detection histogram under the full-frame raster; the box must touch
/// the frame.
inline Histogram detection_histogram(const ImagePatch& frame,
                                     const BoundingBox& box,
                                     const AppearanceParams& app) {
  try {
    return extract_histogram(frame, box, app.bins);
  } catch (const EmptyRegion&) {
    throw PixelAccessError("detection box (" + std::to_string(box.x) + "," +
                           std::to_string(box.y) + "," + std::to_string(box.w) +
                           "," + std::to_string(box.h) +
                           ") lies fully outside the frame");
  }
}

}  // namespace detail

/// Advance the tracker by one frame. `frame_pixels` may be null
/// (detections-only mode: color terms vanish and verification is a
/// no-op). Detections must carry frame index state.frame_index + 1.
inline FrameResult step(TrackerState& state,
                        const std::vector<Detection>& detections,
                        const ImagePatch* frame_pixels,
                        const TrackerConfig& cfg) {
  const int k = state.frame_index + 1;
  for (const auto& d : detections)
    if (d.frame != k)
      throw FrameOrderError("detection carries frame " +
                            std::to_string(d.frame) + ", expected " +
                            std::to_string(k));

  FrameResult result;
  result.frame = k;

  // 1. Predict every agent; with pixels also run mean-shift from the
  // predicted box as a fallback fix for agents that end up unmatched.
  std::map<AgentLabel, MotionState> predicted;
  std::map<AgentLabel, MeanShiftResult> ms_candidates;
  for (auto& [label, agent] : state.agents) {
    MotionState pred = kf_predict(agent.kalman, cfg.kf);
    if (frame_pixels && agent.ref_histogram.valid()) {
      ms_candidates[label] = mean_shift_localize(
          *frame_pixels, pred.box(), agent.ref_histogram, cfg.app);
    }
    predicted[label] = std::move(pred);
  }

  // 2. Affinity between predicted windows and detections.
  std::vector<AffinityRow> rows;
  for (const auto& [label, pred] : predicted)
    rows.push_back({label, pred.box(), state.agents.at(label).ref_histogram});
  std::vector<AffinityCol> cols;
  std::vector<Histogram> det_hists(detections.size());
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (frame_pixels)
      det_hists[j] =
          detail::detection_histogram(*frame_pixels, detections[j].box, cfg.app);
    cols.push_back({detections[j].box, det_hists[j]});
  }
  const AffinityMatrix affinity =
      build_affinity(rows, cols, cfg.assoc.weights, cfg.assoc.gate);

  // 3. Solve the assignment.
  const Assignment assignment = cfg.assoc.solver == AssociationParams::Solver::bip
                                    ? solve_bip(affinity)
                                    : solve_hungarian(affinity);
  LabelingProposal proposal = make_proposal(assignment, affinity.row_labels);

  // 4. Occlusion verification over last frame's overlap registry.
  if (cfg.occ.enabled && frame_pixels && !state.groups.empty()) {
    std::map<int, ImagePatch> det_patches;
    for (const auto& [det, label] : proposal.by_detection)
      det_patches[det] = crop(*frame_pixels, detections[det].box);
    std::vector<VerificationEvent> vevents;
    proposal = verify_labels(state.groups, state.agents, proposal, det_patches,
                             descriptor_matcher(cfg.app), &vevents);
    for (const auto& e : vevents) {
      TrackEvent te;
      te.kind = e.kind == VerificationEvent::Kind::relabel
                    ? TrackEvent::Kind::relabel
                    : TrackEvent::Kind::id_switch_suspect;
      te.label = e.to;
      te.other = e.from;
      te.detection = e.detection;
      result.events.push_back(te);
    }
  }

  // 5. Matched agents consume their detection.
  std::map<AgentLabel, int> matched;  // label -> detection index
  for (const auto& [det, label] : proposal.by_detection) matched[label] = det;
  for (auto& [label, agent] : state.agents) {
    const auto it = matched.find(label);
    if (it == matched.end()) continue;
    const Detection& det = detections[static_cast<std::size_t>(it->second)];
    agent.kalman = kf_update(predicted.at(label), det.box, cfg.kf);
    if (frame_pixels) {
      agent.ref_histogram = detail::blend_histograms(
          agent.ref_histogram, det_hists[static_cast<std::size_t>(it->second)],
          cfg.pipe.hist_blend);
      ImagePatch patch = crop(*frame_pixels, det.box);
      if (!patch.empty()) agent.ref_patch = std::move(patch);
    }
    agent.last_box = det.box;
    agent.misses = 0;
    agent.hits += 1;
    agent.age += 1;
    if (agent.hits >= cfg.pipe.min_hits)
      result.outputs.push_back({label, det.box, OutputState::detected});
  }

  // 6. Unmatched agents coast; a confident mean-shift fix substitutes
  // for the missing detection. Agents missing too long terminate.
  std::vector<AgentLabel> terminated;
  for (auto& [label, agent] : state.agents) {
    if (matched.count(label)) continue;
    agent.misses += 1;
    agent.age += 1;
    const auto ms = ms_candidates.find(label);
    if (ms != ms_candidates.end() &&
        ms->second.similarity >= cfg.pipe.ms_fuse_threshold) {
      agent.kalman = kf_update(predicted.at(label), ms->second.box, cfg.kf);
    } else {
      agent.kalman = predicted.at(label);
    }
    if (agent.misses > cfg.pipe.t_max) {
      terminated.push_back(label);
      continue;
    }
    agent.last_box = agent.kalman.box();
    if (agent.hits >= cfg.pipe.min_hits)
      result.outputs.push_back({label, agent.last_box, OutputState::predicted});
  }
  for (const AgentLabel& label : terminated) {
    TrackEvent te;
    te.kind = TrackEvent::Kind::terminated;
    te.label = label;
    result.events.push_back(te);
    state.agents.erase(label);
  }

  // 7. Unmatched detections become new agents.
  std::vector<bool> det_matched(detections.size(), false);
  for (const auto& [det, label] : proposal.by_detection)
    det_matched[static_cast<std::size_t>(det)] = true;
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (det_matched[j]) continue;
    Agent agent;
    agent.label = AgentLabel{state.next_label++};
    agent.kalman = kf_init(detections[j].box, cfg.kf);
    if (frame_pixels) {
      agent.ref_histogram =
          detail::detection_histogram(*frame_pixels, detections[j].box, cfg.app);
      ImagePatch patch = crop(*frame_pixels, detections[j].box);
      if (!patch.empty()) agent.ref_patch = std::move(patch);
    }
    agent.last_box = detections[j].box;
    agent.misses = 0;
    agent.hits = 1;
    agent.age = 1;
    TrackEvent te;
    te.kind = TrackEvent::Kind::new_track;
    te.label = agent.label;
    te.detection = static_cast<int>(j);
    result.events.push_back(te);
    if (agent.hits >= cfg.pipe.min_hits)
      result.outputs.push_back({agent.label, detections[j].box, OutputState::detected});
    state.agents.emplace(agent.label, std::move(agent));
  }

  // 8. Rebuild the overlap registry from every agent's current best box.
  std::vector<std::pair<AgentLabel, BoundingBox>> boxes;
  for (const auto& [label, agent] : state.agents)
    boxes.emplace_back(label, agent.last_box);
  state.groups = update_groups(boxes, cfg.occ.min_overlap_area);

  state.frame_index = k;
  return result;
}

/// Run the tracker over a whole sequence. Detections are keyed by
/// 1-based frame; frames without an entry are processed as empty. The
/// sequence spans up to the larger of the last detection frame and the
/// frame-source length.
inline std::vector<FrameResult> run_sequence(
    const std::map<int, std::vector<Detection>>& detections_by_frame,
    const FrameSource* source, const TrackerConfig& cfg) {
  int last = source ? source->frame_count() : 0;
  if (!detections_by_frame.empty()) {
    if (detections_by_frame.begin()->first < 1)
      throw FrameOrderError("detection frames must start at 1 or later");
    last = std::max(last, detections_by_frame.rbegin()->first);
  }
  TrackerState state;
  std::vector<FrameResult> results;
  results.reserve(static_cast<std::size_t>(last));
  for (int k = 1; k <= last; ++k) {
    const auto it = detections_by_frame.find(k);
    static const std::vector<Detection> empty;
    const std::vector<Detection>& dets = it == detections_by_frame.end()
                                             ? empty
                                             : it->second;
    std::optional<ImagePatch> pixels;
    if (source && k <= source->frame_count()) pixels = source->frame(k);
    results.push_back(step(state, dets, pixels ? &*pixels : nullptr, cfg));
  }
  return results;
}

}  // namespace occlusia
