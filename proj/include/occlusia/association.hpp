#pragma once

// Frame-to-frame association: gated affinity matrices and two exact
// solvers for the one-to-one assignment problem. solve_bip is an exact
// branch-and-bound over the 0/1 program; solve_hungarian reaches the
// same objective through the O(n^3) potentials algorithm.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "occlusia/appearance.hpp"
#include "occlusia/core.hpp"

namespace occlusia {

struct AffinityWeights {
  double alpha1 = 0.5;  // weight of the overlap term
  double alpha2 = 0.5;  // weight of the color-similarity term
};

/// One candidate row of the affinity matrix: a tracked agent's
/// predicted box plus its reference color model (may be invalid when
/// tracking runs without pixels).
struct AffinityRow {
  AgentLabel label;
  BoundingBox box;
  Histogram hist;
};

/// One candidate column: a detection box plus its color histogram.
struct AffinityCol {
  BoundingBox box;
  Histogram hist;
};

/// Dense row-major score matrix between agents (rows) and detections
/// (columns). Entries are in [0,1]; zero means "pairing forbidden".
struct AffinityMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  std::vector<AgentLabel> row_labels;

  AffinityMatrix() = default;
  AffinityMatrix(int r, int c)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * cols + j];
  }
  void set(int i, int j, double v) {
    values[static_cast<std::size_t>(i) * cols + j] = v;
  }
};

/// Gated affinity between every agent/detection pair: a convex blend of
/// box overlap and color similarity, zeroed below the gate. When either
/// histogram is missing (e.g. tracking without pixels) the color term is
/// zero and only the weighted overlap remains.
inline AffinityMatrix build_affinity(const std::vector<AffinityRow>& agents,
                                     const std::vector<AffinityCol>& detections,
                                     const AffinityWeights& w, double gate) {
  if (w.alpha1 < 0.0 || w.alpha2 < 0.0 ||
      std::abs(w.alpha1 + w.alpha2 - 1.0) > 1e-9)
    throw SpecError("affinity weights must be nonnegative and sum to 1");
  if (gate < 0.0 || gate > 1.0) throw SpecError("affinity gate must lie in [0,1]");

  AffinityMatrix m(static_cast<int>(agents.size()),
                   static_cast<int>(detections.size()));
  for (const auto& a : agents) m.row_labels.push_back(a.label);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      const double overlap = iou(agents[i].box, detections[j].box);
      // Color similarity contributes 0 when either histogram is missing
      // (e.g. tracking from detection files without pixels).
      double color = 0.0;
      if (agents[i].hist.valid() && detections[j].hist.valid())
        color = bhattacharyya(agents[i].hist, detections[j].hist);
      const double s = w.alpha1 * overlap + w.alpha2 * color;
      m.set(i, j, s >= gate ? s : 0.0);
    }
  }
  return m;
}

/// Solver output: matched (row, column) pairs sorted by row, leftovers
/// on both sides in ascending order, and the summed affinity.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
  double objective = 0.0;
};

namespace detail {

inline void fill_unmatched(Assignment& out, int rows, int cols) {
  std::vector<bool> row_used(rows, false), col_used(cols, false);
  for (const auto& [i, j] : out.pairs) {
    row_used[i] = true;
    col_used[j] = true;
  }
  for (int i = 0; i < rows; ++i)
    if (!row_used[i]) out.unmatched_rows.push_back(i);
  for (int j = 0; j < cols; ++j)
    if (!col_used[j]) out.unmatched_cols.push_back(j);
}

struct BipSearch {
  const AffinityMatrix* m;
  // Per row: candidate columns with positive affinity, ascending index.
  std::vector<std::vector<int>> cands;
  // best_tail[r] = sum over rows >= r of that row's best positive entry;
  // an admissible bound on what the remaining rows can still add.
  std::vector<double> best_tail;
  std::vector<char> col_used;
  std::vector<std::pair<int, int>> current;
  std::vector<std::pair<int, int>> best_pairs;
  double best_obj = -1.0;
  static constexpr double eps = 1e-12;

  void consider(double obj) {
    if (obj > best_obj + eps ||
        (obj > best_obj - eps && current < best_pairs)) {
      best_obj = std::max(best_obj, obj);
      best_pairs = current;
    }
  }

  void dfs(int row, double obj) {
    if (row == m->rows) {
      consider(obj);
      return;
    }
    if (obj + best_tail[row] < best_obj - eps) return;  // cannot catch up
    for (int j : cands[row]) {
      if (col_used[j]) continue;
      col_used[j] = 1;
      current.emplace_back(row, j);
      dfs(row + 1, obj + m->at(row, j));
      current.pop_back();
      col_used[j] = 0;
    }
    dfs(row + 1, obj);  // leave this row unmatched
  }
};

}  // namespace detail

/// Exact solution of the binary assignment program: maximize the summed
/// affinity subject to each row and column being used at most once.
/// Zero entries are never selected. Ties on the objective resolve to the
/// lexicographically smallest pair list, so results are reproducible.
inline Assignment solve_bip(const AffinityMatrix& m) {
  detail::BipSearch search;
  search.m = &m;
  search.cands.resize(m.rows);
  search.best_tail.assign(m.rows + 1, 0.0);
  search.col_used.assign(m.cols, 0);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j)
      if (m.at(i, j) > 0.0) search.cands[i].push_back(j);
  for (int i = m.rows - 1; i >= 0; --i) {
    double best = 0.0;
    for (int j : search.cands[i]) best = std::max(best, m.at(i, j));
    search.best_tail[i] = search.best_tail[i + 1] + best;
  }

  // Greedy warm start: sweep pairs by descending affinity to give the
  // search a strong incumbent before branching.
  {
    std::vector<std::pair<double, std::pair<int, int>>> order;
    for (int i = 0; i < m.rows; ++i)
      for (int j : search.cands[i]) order.push_back({m.at(i, j), {i, j}});
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<char> ru(m.rows, 0), cu(m.cols, 0);
    double obj = 0.0;
    std::vector<std::pair<int, int>> pairs;
    for (const auto& [v, ij] : order) {
      if (ru[ij.first] || cu[ij.second]) continue;
      ru[ij.first] = cu[ij.second] = 1;
      pairs.push_back(ij);
      obj += v;
    }
    std::sort(pairs.begin(), pairs.end());
    search.best_obj = obj;
    search.best_pairs = std::move(pairs);
  }

  search.dfs(0, 0.0);

  Assignment out;
  out.pairs = std::move(search.best_pairs);
  for (const auto& [i, j] : out.pairs) out.objective += m.at(i, j);
  detail::fill_unmatched(out, m.rows, m.cols);
  return out;
}

/// Same contract as solve_bip, solved with the potentials form of the
/// Hungarian algorithm on a square-padded cost matrix (padding encodes
/// "leave unmatched" at zero cost). Matched pairs with zero affinity are
/// dropped afterwards so both solvers report identical semantics.
inline Assignment solve_hungarian(const AffinityMatrix& m) {
  Assignment out;
  const int n = std::max(m.rows, m.cols);
  if (n == 0) return out;

  // cost[i][j] = -affinity, 0 in the padding; 1-based with a dummy row 0.
  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) cost[i + 1][j + 1] = -m.at(i, j);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  for (int j = 1; j <= n; ++j) {
    const int i = p[j];
    if (i >= 1 && i <= m.rows && j <= m.cols && m.at(i - 1, j - 1) > 0.0)
      out.pairs.emplace_back(i - 1, j - 1);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [i, j] : out.pairs) out.objective += m.at(i, j);
  detail::fill_unmatched(out, m.rows, m.cols);
  return out;
}

}  // namespace occlusia
