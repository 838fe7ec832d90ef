#pragma once

// Trajectory-level evaluation: per-frame Hungarian matching on IoU plus
// the usual track-quality summary (recall, precision, false alarms per
// frame, coverage classes, fragmentations, identity switches).

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "occlusia/association.hpp"
#include "occlusia/config.hpp"
#include "occlusia/core.hpp"

namespace occlusia {

/// frame -> box for one track.
using Track = std::map<int, BoundingBox>;

/// track id -> track, for either ground truth or hypotheses.
struct TrajectorySet {
  std::map<int, Track> tracks;

  void add(int track_id, int frame, const BoundingBox& box) {
    tracks[track_id][frame] = box;
  }

  bool empty() const { return tracks.empty(); }
};

struct MetricsReport {
  double recall = 0.0;
  double precision = 0.0;
  double faf = 0.0;  // unmatched hypothesis boxes per frame
  int gt = 0;        // ground-truth track count
  double mt = 0.0;   // fraction of GT tracks matched in >= 80% of frames
  double pt = 0.0;
  double ml = 0.0;   // fraction matched in < 20%
  int frag = 0;
  int ids = 0;
  // Nonstandard: hypothesis tracks unmatched in > 80% of their frames.
  int ft = 0;
};

struct FrameMatch {
  std::vector<std::pair<int, int>> pairs;  // (gt index, hyp index)
  std::vector<int> missed_gt;
  std::vector<int> false_hyp;
};

/// Maximum-total-IoU one-to-one matching between two box lists; pairs
/// under the threshold are forbidden.
inline FrameMatch match_frame(const std::vector<BoundingBox>& gt_boxes,
                              const std::vector<BoundingBox>& hyp_boxes,
                              double iou_threshold) {
  AffinityMatrix m(static_cast<int>(gt_boxes.size()),
                   static_cast<int>(hyp_boxes.size()));
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) {
      const double v = iou(gt_boxes[i], hyp_boxes[j]);
      if (v >= iou_threshold) m.set(i, j, v);
    }
  const Assignment a = solve_hungarian(m);
  return {a.pairs, a.unmatched_rows, a.unmatched_cols};
}

/// Full evaluation of hypothesis trajectories against ground truth.
inline MetricsReport evaluate(const TrajectorySet& gt, const TrajectorySet& hyp,
                              const EvalParams& params = {}) {
  if (gt.empty()) throw EmptyGroundTruth("ground truth has no tracks");

  // Union frame range; false alarms are normalized by its length.
  int first = 0, last = 0;
  bool any = false;
  const auto widen = [&](const TrajectorySet& s) {
    for (const auto& [id, track] : s.tracks) {
      if (track.empty()) continue;
      const int lo = track.begin()->first;
      const int hi = track.rbegin()->first;
      if (!any) {
        first = lo;
        last = hi;
        any = true;
      } else {
        first = std::min(first, lo);
        last = std::max(last, hi);
      }
    }
  };
  widen(gt);
  if (!any) throw EmptyGroundTruth("ground truth tracks carry no boxes");
  widen(hyp);

  long long gt_boxes = 0, hyp_boxes = 0, matches = 0, false_positives = 0;
  // Per GT track: frame -> matched hypothesis id.
  std::map<int, std::map<int, int>> gt_matches;
  // Per hypothesis track: number of frames it was matched.
  std::map<int, int> hyp_matched_frames;

  for (int frame = first; frame <= last; ++frame) {
    std::vector<int> gt_ids, hyp_ids;
    std::vector<BoundingBox> gt_b, hyp_b;
    for (const auto& [id, track] : gt.tracks) {
      const auto it = track.find(frame);
      if (it == track.end()) continue;
      gt_ids.push_back(id);
      gt_b.push_back(it->second);
    }
    for (const auto& [id, track] : hyp.tracks) {
      const auto it = track.find(frame);
      if (it == track.end()) continue;
      hyp_ids.push_back(id);
      hyp_b.push_back(it->second);
    }
    const FrameMatch fm = match_frame(gt_b, hyp_b, params.iou_threshold);
    gt_boxes += static_cast<long long>(gt_b.size());
    hyp_boxes += static_cast<long long>(hyp_b.size());
    matches += static_cast<long long>(fm.pairs.size());
    false_positives += static_cast<long long>(fm.false_hyp.size());
    for (const auto& [gi, hj] : fm.pairs) {
      gt_matches[gt_ids[static_cast<std::size_t>(gi)]][frame] =
          hyp_ids[static_cast<std::size_t>(hj)];
      hyp_matched_frames[hyp_ids[static_cast<std::size_t>(hj)]] += 1;
    }
  }

  MetricsReport r;
  r.gt = static_cast<int>(gt.tracks.size());
  r.recall = gt_boxes > 0 ? static_cast<double>(matches) / gt_boxes : 0.0;
  r.precision = hyp_boxes > 0 ? static_cast<double>(matches) / hyp_boxes : 1.0;
  r.faf = static_cast<double>(false_positives) / (last - first + 1);

  int mt = 0, pt = 0, ml = 0;
  for (const auto& [id, track] : gt.tracks) {
    const auto& matched = gt_matches[id];
    const double coverage =
        track.empty() ? 0.0
                      : static_cast<double>(matched.size()) / track.size();
    if (coverage >= 0.8)
      ++mt;
    else if (coverage < 0.2)
      ++ml;
    else
      ++pt;

    // Fragmentations: resumptions of coverage after a gap. Identity
    // switches: hypothesis id changes between consecutive matched
    // frames, gaps included.
    bool in_segment = false;
    int segments = 0;
    std::optional<int> prev_id;
    for (const auto& [frame, box] : track) {
      const auto it = matched.find(frame);
      if (it == matched.end()) {
        in_segment = false;
        continue;
      }
      if (!in_segment) {
        ++segments;
        in_segment = true;
      }
      if (prev_id && *prev_id != it->second) ++r.ids;
      prev_id = it->second;
    }
    if (segments > 1) r.frag += segments - 1;
  }
  r.mt = static_cast<double>(mt) / r.gt;
  r.pt = static_cast<double>(pt) / r.gt;
  r.ml = static_cast<double>(ml) / r.gt;

  for (const auto& [id, track] : hyp.tracks) {
    if (track.empty()) continue;
    const auto it = hyp_matched_frames.find(id);
    const int matched = it == hyp_matched_frames.end() ? 0 : it->second;
    const double unmatched_frac =
        1.0 - static_cast<double>(matched) / track.size();
    if (unmatched_frac > 0.8) ++r.ft;
  }
  return r;
}

}  // namespace occlusia
