#pragma once

// Occlusion reasoning: the registry of overlapping agent pairs and the
// descriptor-match verification pass that can overturn an association
// when one member of a previously overlapping pair went missing.

#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "occlusia/agent.hpp"
#include "occlusia/appearance.hpp"
#include "occlusia/association.hpp"
#include "occlusia/core.hpp"
#include "occlusia/image.hpp"

namespace occlusia {

/// Unordered pairs of agent labels whose boxes overlap. Stored with the
/// smaller label first so iteration order is deterministic.
struct GroupPairSet {
  std::set<std::pair<AgentLabel, AgentLabel>> pairs;

  static std::pair<AgentLabel, AgentLabel> normalize(AgentLabel a, AgentLabel b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  void insert(AgentLabel a, AgentLabel b) {
    if (a == b) throw SpecError("group pair needs two distinct labels");
    pairs.insert(normalize(a, b));
  }

  bool contains(AgentLabel a, AgentLabel b) const {
    return pairs.count(normalize(a, b)) > 0;
  }

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
};

/// Pairs of agents whose current boxes overlap by strictly more than
/// `min_overlap_area` square pixels.
inline GroupPairSet update_groups(
    const std::vector<std::pair<AgentLabel, BoundingBox>>& agents,
    double min_overlap_area = 0.0) {
  GroupPairSet out;
  for (std::size_t i = 0; i < agents.size(); ++i)
    for (std::size_t j = i + 1; j < agents.size(); ++j)
      if (intersection_area(agents[i].second, agents[j].second) > min_overlap_area)
        out.insert(agents[i].first, agents[j].first);
  return out;
}

/// Which label each matched detection carries. Starts as the plain
/// assignment output and may be rewritten by verification.
struct LabelingProposal {
  std::map<int, AgentLabel> by_detection;  // detection index -> label
  Assignment source;

  bool has_label(AgentLabel l) const {
    for (const auto& [det, lab] : by_detection)
      if (lab == l) return true;
    return false;
  }

  /// Detection currently carrying `l`, or -1.
  int detection_of(AgentLabel l) const {
    for (const auto& [det, lab] : by_detection)
      if (lab == l) return det;
    return -1;
  }
};

/// Builds the proposal from an assignment whose rows are labeled agents.
inline LabelingProposal make_proposal(const Assignment& a,
                                      const std::vector<AgentLabel>& row_labels) {
  LabelingProposal p;
  p.source = a;
  for (const auto& [row, col] : a.pairs) p.by_detection[col] = row_labels[row];
  return p;
}

struct VerificationEvent {
  enum class Kind { relabel, conflict_skip };
  Kind kind = Kind::relabel;
  int detection = -1;
  AgentLabel from;  // label the detection carried before
  AgentLabel to;    // label it should carry per descriptor evidence
  double match_from = 0.0;
  double match_to = 0.0;
};

/// Scores how well a stored reference appearance matches a detection
/// crop. Injectable so verification logic is testable with stubs.
using PatchMatcher =
    std::function<double(const ImagePatch& ref, const ImagePatch& det)>;

/// Default matcher: grid gradient descriptors + ratio-test match rate.
inline PatchMatcher descriptor_matcher(const AppearanceParams& params = {}) {
  return [params](const ImagePatch& ref, const ImagePatch& det) {
    return descriptor_match(extract_descriptors(ref, params),
                            extract_descriptors(det, params), params);
  };
}

/// Verification pass over a labeling proposal. For every previously
/// overlapping pair {p,q}: when the proposal (as produced by the solver)
/// contains exactly one of the two labels, the detection carrying it is
/// re-scored against both agents' reference patches and relabeled to the
/// strictly better match. Ties keep the original label; a relabel that
/// would duplicate a label already present in the evolving result is
/// skipped and reported. Pairs are visited in ascending label order.
inline LabelingProposal verify_labels(
    const GroupPairSet& prev_groups,
    const std::map<AgentLabel, Agent>& prev_agents,
    const LabelingProposal& proposal,
    const std::map<int, ImagePatch>& current_patches,
    const PatchMatcher& matcher,
    std::vector<VerificationEvent>* events = nullptr) {
  LabelingProposal out = proposal;
  for (const auto& [p, q] : prev_groups.pairs) {
    // Presence is judged against the solver's original proposal; edits
    // from earlier pairs accumulate in `out` but do not change which
    // pairs fire, keeping the pass order-stable.
    const bool p_here = proposal.has_label(p);
    const bool q_here = proposal.has_label(q);
    if (p_here == q_here) continue;  // both matched or both missing

    const AgentLabel present = p_here ? p : q;
    const AgentLabel absent = p_here ? q : p;
    const int det = proposal.detection_of(present);

    const auto present_it = prev_agents.find(present);
    const auto absent_it = prev_agents.find(absent);
    if (present_it == prev_agents.end() || absent_it == prev_agents.end())
      throw MissingPatch("group pair references an unknown agent");
    if (!present_it->second.ref_patch || !absent_it->second.ref_patch)
      throw MissingPatch("agent " +
                         std::to_string((present_it->second.ref_patch
                                             ? absent_it->second.label
                                             : present_it->second.label)
                                            .value) +
                         " has no stored reference patch");
    const auto patch_it = current_patches.find(det);
    if (patch_it == current_patches.end())
      throw MissingPatch("no patch stored for detection " + std::to_string(det));

    const double m_present =
        matcher(*present_it->second.ref_patch, patch_it->second);
    const double m_absent =
        matcher(*absent_it->second.ref_patch, patch_it->second);
    if (!(m_absent > m_present)) continue;  // tie or original wins: keep

    if (out.by_detection.at(det) != present || out.has_label(absent)) {
      // An earlier pair already rewrote this detection or placed the
      // target label; applying this relabel would break one-to-one
      // labeling or undo a prior decision, so skip and report it.
      if (events)
        events->push_back({VerificationEvent::Kind::conflict_skip, det, present,
                           absent, m_present, m_absent});
      continue;
    }
    out.by_detection[det] = absent;
    if (events)
      events->push_back({VerificationEvent::Kind::relabel, det, present, absent,
                         m_present, m_absent});
  }
  return out;
}

}  // namespace occlusia
