#pragma once

// Appearance model: kernel-weighted color histograms with Bhattacharyya
// similarity, mean-shift localization, and grid gradient descriptors
// with ratio-test matching.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "occlusia/core.hpp"
#include "occlusia/image.hpp"

namespace occlusia {

struct AppearanceParams {
  int bins = 8;                  // histogram bins per color channel
  int ms_max_iters = 20;         // mean-shift iteration cap
  double ms_epsilon = 0.5;       // mean-shift convergence threshold (pixels)
  double ratio_threshold = 0.8;  // nearest/second-nearest acceptance ratio
  int grid_cells = 4;            // descriptor grid is grid_cells x grid_cells
  int orient_bins = 8;           // orientation bins per descriptor cell
};

enum class Kernel { epanechnikov, uniform };

/// Normalized joint RGB color histogram with bins^3 entries. A
/// default-constructed histogram is invalid (no data yet).
struct Histogram {
  int bins_per_channel = 0;
  std::vector<double> bins;

  bool valid() const { return !bins.empty(); }

  double sum() const {
    double s = 0.0;
    for (double v : bins) s += v;
    return s;
  }
};

namespace detail {

inline int color_bin(std::uint8_t v, int bins) {
  int b = static_cast<int>(v) * bins / 256;
  return std::min(b, bins - 1);
}

/// Squared normalized radius of a pixel center from the box center,
/// where the box half-extents map to radius 1.
inline double norm_radius2(double px, double py, const BoundingBox& box) {
  const double nx = (px - box.cx()) / (0.5 * box.w);
  const double ny = (py - box.cy()) / (0.5 * box.h);
  return nx * nx + ny * ny;
}

inline double kernel_weight(Kernel k, double r2) {
  if (k == Kernel::uniform) return 1.0;
  return r2 < 1.0 ? 1.0 - r2 : 0.0;
}

}  // namespace detail

/// Kernel-weighted color histogram of the frame pixels under `box`.
/// The kernel is centered on the nominal box center even when the box
/// is partially outside the frame, so clipped reads stay comparable.
/// Throws EmptyRegion when no pixel falls under the clipped box;
/// returns an invalid histogram when pixels exist but all carry zero
/// kernel weight.
inline Histogram extract_histogram(const ImagePatch& frame, const BoundingBox& box,
                                   int bins, Kernel kernel = Kernel::epanechnikov) {
  if (bins <= 0) throw SpecError("histogram bin count must be positive");
  if (frame.empty()) throw EmptyRegion("histogram from an empty frame");
  if (!box.valid()) throw EmptyRegion("histogram from a degenerate box");
  const auto [x0, x1] = pixel_span(box.x, box.w, frame.width);
  const auto [y0, y1] = pixel_span(box.y, box.h, frame.height);
  if (x0 >= x1 || y0 >= y1)
    throw EmptyRegion("box covers no frame pixels");

  Histogram h;
  h.bins_per_channel = bins;
  h.bins.assign(static_cast<std::size_t>(bins) * bins * bins, 0.0);
  double total = 0.0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double w =
          detail::kernel_weight(kernel, detail::norm_radius2(x + 0.5, y + 0.5, box));
      if (w <= 0.0) continue;
      const std::size_t o = frame.offset(x, y);
      const int rb = detail::color_bin(frame.pixels[o], bins);
      const int gb = detail::color_bin(frame.pixels[o + 1], bins);
      const int bb = detail::color_bin(frame.pixels[o + 2], bins);
      h.bins[(static_cast<std::size_t>(rb) * bins + gb) * bins + bb] += w;
      total += w;
    }
  }
  if (total <= 0.0) return {};  // only zero-weight pixels under the kernel
  for (double& v : h.bins) v /= total;
  return h;
}

/// Bhattacharyya coefficient between two normalized histograms, in [0,1].
inline double bhattacharyya(const Histogram& p, const Histogram& q) {
  if (!p.valid() || !q.valid())
    throw SpecError("bhattacharyya requires two valid histograms");
  if (p.bins.size() != q.bins.size())
    throw SpecError("bhattacharyya requires matching bin layouts");
  double s = 0.0;
  for (std::size_t i = 0; i < p.bins.size(); ++i)
    s += std::sqrt(p.bins[i] * q.bins[i]);
  return std::clamp(s, 0.0, 1.0);
}

struct MeanShiftResult {
  BoundingBox box;
  double similarity = 0.0;
  int iterations = 0;
};

namespace detail {

/// Keep the box center inside the frame so histograms stay readable.
inline BoundingBox clamp_center(const ImagePatch& frame, BoundingBox b) {
  const double min_cx = std::min(0.5 * b.w, frame.width - 0.5 * b.w);
  const double max_cx = std::max(0.5 * b.w, frame.width - 0.5 * b.w);
  const double min_cy = std::min(0.5 * b.h, frame.height - 0.5 * b.h);
  const double max_cy = std::max(0.5 * b.h, frame.height - 0.5 * b.h);
  const double cx = std::clamp(b.cx(), min_cx, max_cx);
  const double cy = std::clamp(b.cy(), min_cy, max_cy);
  return BoundingBox::from_center(cx, cy, b.w, b.h);
}

inline double safe_similarity(const ImagePatch& frame, const BoundingBox& box,
                              const Histogram& target, int bins, Kernel kernel) {
  const Histogram h = extract_histogram(frame, box, bins, kernel);
  if (!h.valid()) return 0.0;
  return bhattacharyya(h, target);
}

}  // namespace detail

/// Fixed-window mean-shift: climbs the Bhattacharyya surface from
/// `start` toward the target histogram. Step-halving keeps the accepted
/// similarity sequence non-decreasing. Returns the start box with
/// similarity 0 when the target histogram is invalid.
inline MeanShiftResult mean_shift_localize(const ImagePatch& frame,
                                           const BoundingBox& start,
                                           const Histogram& target,
                                           const AppearanceParams& params = {},
                                           Kernel kernel = Kernel::epanechnikov) {
  if (!target.valid()) return {start, 0.0, 0};
  if (frame.empty() || !start.valid())
    throw EmptyRegion("mean shift needs a frame and a positive-size start box");
  const int bins = params.bins;

  BoundingBox cur = detail::clamp_center(frame, start);
  Histogram cur_hist = extract_histogram(frame, cur, bins, kernel);
  if (!cur_hist.valid()) return {cur, 0.0, 0};
  double cur_sim = bhattacharyya(cur_hist, target);

  int iters = 0;
  for (; iters < params.ms_max_iters; ++iters) {
    // Mean-shift vector: pixels vote with sqrt(target/current) weights.
    const auto [x0, x1] = pixel_span(cur.x, cur.w, frame.width);
    const auto [y0, y1] = pixel_span(cur.y, cur.h, frame.height);
    double wsum = 0.0, mx = 0.0, my = 0.0;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double r2 = detail::norm_radius2(x + 0.5, y + 0.5, cur);
        if (kernel == Kernel::epanechnikov && r2 >= 1.0) continue;
        const std::size_t o = frame.offset(x, y);
        const int rb = detail::color_bin(frame.pixels[o], bins);
        const int gb = detail::color_bin(frame.pixels[o + 1], bins);
        const int bb = detail::color_bin(frame.pixels[o + 2], bins);
        const std::size_t bin = (static_cast<std::size_t>(rb) * bins + gb) * bins + bb;
        const double p = cur_hist.bins[bin];
        if (p <= 0.0) continue;
        const double w = std::sqrt(target.bins[bin] / p);
        wsum += w;
        mx += w * (x + 0.5);
        my += w * (y + 0.5);
      }
    }
    if (wsum <= 0.0) break;

    BoundingBox cand = detail::clamp_center(
        frame, BoundingBox::from_center(mx / wsum, my / wsum, cur.w, cur.h));
    Histogram cand_hist = extract_histogram(frame, cand, bins, kernel);
    double cand_sim =
        cand_hist.valid() ? bhattacharyya(cand_hist, target) : 0.0;

    // Classic step-halving: back off toward the current center until the
    // similarity stops getting worse.
    for (int halve = 0; halve < 10 && cand_sim + 1e-12 < cur_sim; ++halve) {
      cand = detail::clamp_center(
          frame, BoundingBox::from_center(0.5 * (cur.cx() + cand.cx()),
                                          0.5 * (cur.cy() + cand.cy()), cur.w,
                                          cur.h));
      cand_hist = extract_histogram(frame, cand, bins, kernel);
      cand_sim = cand_hist.valid() ? bhattacharyya(cand_hist, target) : 0.0;
    }
    if (cand_sim + 1e-12 < cur_sim) break;  // no improving step left

    const double shift = std::hypot(cand.cx() - cur.cx(), cand.cy() - cur.cy());
    cur = cand;
    cur_hist = std::move(cand_hist);
    cur_sim = cand_sim;
    if (shift < params.ms_epsilon) {
      ++iters;
      break;
    }
  }
  return {cur, cur_sim, iters};
}

/// One descriptor anchored at a grid-cell center: an L2-normalized
/// gradient orientation histogram. Cells whose gradients all vanish are
/// flagged flat and excluded from matching.
struct Keypoint {
  double x = 0.0;  // cell center in resampled patch coordinates
  double y = 0.0;
  std::vector<double> descriptor;
  bool flat = false;
};

struct DescriptorSet {
  std::vector<Keypoint> keypoints;
  int descriptor_dim = 0;

  bool empty() const { return keypoints.empty(); }

  /// Keypoints that carry usable (non-flat) descriptors.
  int usable() const {
    int n = 0;
    for (const auto& k : keypoints)
      if (!k.flat) ++n;
    return n;
  }
};

/// Grid gradient descriptors of a patch. The patch is resampled to a
/// fixed 64x64 canvas, and each grid cell votes its gradient magnitudes
/// into an orientation histogram over [0, 2pi). Patches smaller than
/// 16 pixels on either side yield an empty set.
inline DescriptorSet extract_descriptors(const ImagePatch& patch,
                                         const AppearanceParams& params = {}) {
  DescriptorSet out;
  out.descriptor_dim = params.orient_bins;
  if (patch.width < 16 || patch.height < 16) return out;
  if (params.grid_cells <= 0 || params.orient_bins <= 0)
    throw SpecError("descriptor grid and orientation bins must be positive");

  constexpr int canvas = 64;
  const ImagePatch img = resample(patch, canvas, canvas);
  std::vector<double> gray(static_cast<std::size_t>(canvas) * canvas);
  for (int y = 0; y < canvas; ++y)
    for (int x = 0; x < canvas; ++x) {
      const std::size_t o = img.offset(x, y);
      gray[static_cast<std::size_t>(y) * canvas + x] =
          luminance(img.pixels[o], img.pixels[o + 1], img.pixels[o + 2]);
    }
  const auto g = [&](int x, int y) {
    x = std::clamp(x, 0, canvas - 1);
    y = std::clamp(y, 0, canvas - 1);
    return gray[static_cast<std::size_t>(y) * canvas + x];
  };

  const int cells = params.grid_cells;
  const double cell = static_cast<double>(canvas) / cells;
  constexpr double two_pi = 2.0 * 3.141592653589793238462643383279502884;
  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      const int px0 = static_cast<int>(cx * cell);
      const int px1 = static_cast<int>((cx + 1) * cell);
      const int py0 = static_cast<int>(cy * cell);
      const int py1 = static_cast<int>((cy + 1) * cell);
      std::vector<double> hist(params.orient_bins, 0.0);
      for (int y = py0; y < py1; ++y) {
        for (int x = px0; x < px1; ++x) {
          const double gx = g(x + 1, y) - g(x - 1, y);
          const double gy = g(x, y + 1) - g(x, y - 1);
          const double mag = std::hypot(gx, gy);
          if (mag <= 0.0) continue;
          double ang = std::atan2(gy, gx);
          if (ang < 0.0) ang += two_pi;
          int bin = static_cast<int>(ang / two_pi * params.orient_bins);
          bin = std::min(bin, params.orient_bins - 1);
          hist[bin] += mag;
        }
      }
      double norm = 0.0;
      for (double v : hist) norm += v * v;
      norm = std::sqrt(norm);
      Keypoint kp;
      kp.x = (cx + 0.5) * cell;
      kp.y = (cy + 0.5) * cell;
      if (norm < 1e-9) {
        kp.flat = true;
        kp.descriptor.assign(params.orient_bins, 0.0);
      } else {
        kp.descriptor.resize(params.orient_bins);
        for (int i = 0; i < params.orient_bins; ++i)
          kp.descriptor[i] = hist[i] / norm;
      }
      out.keypoints.push_back(std::move(kp));
    }
  }
  return out;
}

namespace detail {

inline double descriptor_dist2(const std::vector<double>& a,
                               const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

/// Fraction of a's usable keypoints whose nearest neighbor in b passes
/// the distance-ratio test. Returns 0 when either side has no usable
/// descriptors. Not symmetric.
inline double descriptor_match(const DescriptorSet& a, const DescriptorSet& b,
                               const AppearanceParams& params = {}) {
  std::vector<const Keypoint*> from, to;
  for (const auto& k : a.keypoints)
    if (!k.flat) from.push_back(&k);
  for (const auto& k : b.keypoints)
    if (!k.flat) to.push_back(&k);
  if (from.empty() || to.empty()) return 0.0;

  int accepted = 0;
  for (const Keypoint* ka : from) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (const Keypoint* kb : to) {
      const double d = detail::descriptor_dist2(ka->descriptor, kb->descriptor);
      if (d < best) {
        second = best;
        best = d;
      } else if (d < second) {
        second = d;
      }
    }
    // Ratio test on distances; a missing second neighbor never vetoes.
    const double d1 = std::sqrt(best);
    const double d2 = std::sqrt(second);
    if (d1 < params.ratio_threshold * d2) ++accepted;
  }
  return static_cast<double>(accepted) / static_cast<double>(from.size());
}

}  // namespace occlusia
