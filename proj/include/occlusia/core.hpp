#pragma once

// Geometry and identity primitives shared by every module.

#include <algorithm>
#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace occlusia {

// Base class for all recoverable errors raised by the library.
class TrackingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyRegion : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class MissingPatch : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class FrameOrderError : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class PixelAccessError : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class ParseError : public TrackingError {
 public:
  ParseError(const std::string& msg, long line)
      : TrackingError(msg + " at line " + std::to_string(line)), line_(line) {}
  explicit ParseError(const std::string& msg) : TrackingError(msg), line_(-1) {}
  long line() const { return line_; }

 private:
  long line_;
};

class NonMonotonicFrame : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class FormatError : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class SpecError : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class EmptyGroundTruth : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class ConfigError : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

class IoError : public TrackingError {
 public:
  using TrackingError::TrackingError;
};

/// Axis-aligned pixel rectangle stored as (left, top, width, height).
/// Coordinates are real-valued; trackers produce subpixel positions.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const { return w > 0.0 && h > 0.0; }
  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }

  static BoundingBox from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  /// True when `inner` lies entirely within this box (touching edges count).
  bool contains(const BoundingBox& inner) const {
    return inner.x >= x && inner.y >= y && inner.right() <= right() &&
           inner.bottom() <= bottom();
  }

  bool operator==(const BoundingBox& o) const = default;
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

/// Intersection-over-union overlap ratio in [0,1]. Symmetric, 0 for
/// disjoint boxes, 1 only for identical boxes.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

/// Global agent identity. Labels are issued once and never reused
/// within a run.
struct AgentLabel {
  int value = 0;

  bool valid() const { return value > 0; }
  auto operator<=>(const AgentLabel&) const = default;
};

/// One detector window in one frame.
struct Detection {
  int frame = 0;  // 1-based frame index
  BoundingBox box;
  double score = 1.0;  // detector confidence in [0,1]
};

}  // namespace occlusia
