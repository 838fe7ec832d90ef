#pragma once

// Minimal RGB raster type plus the crop/resample helpers the appearance
// model needs. Pixels are 8-bit interleaved RGB, row-major.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "occlusia/core.hpp"

namespace occlusia {

struct ImagePatch {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height bytes, RGB

  ImagePatch() = default;
  ImagePatch(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(3) * w * h, fill) {}

  bool empty() const { return width <= 0 || height <= 0; }

  std::size_t offset(int x, int y) const {
    return 3 * (static_cast<std::size_t>(y) * width + x);
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }

  std::array<std::uint8_t, 3> at(int x, int y) const {
    if (!in_bounds(x, y))
      throw PixelAccessError("pixel (" + std::to_string(x) + "," +
                             std::to_string(y) + ") outside " +
                             std::to_string(width) + "x" + std::to_string(height));
    const std::size_t o = offset(x, y);
    return {pixels[o], pixels[o + 1], pixels[o + 2]};
  }

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (!in_bounds(x, y))
      throw PixelAccessError("pixel (" + std::to_string(x) + "," +
                             std::to_string(y) + ") outside " +
                             std::to_string(width) + "x" + std::to_string(height));
    const std::size_t o = offset(x, y);
    pixels[o] = r;
    pixels[o + 1] = g;
    pixels[o + 2] = b;
  }

  bool operator==(const ImagePatch&) const = default;
};

/// Rec. 601 luma of one pixel.
inline double luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

/// Integer pixel range [first, last) covered by a real-valued span
/// [lo, lo+len), clipped against [0, bound). Pixels are counted as
/// covered when their center falls inside the span.
inline std::pair<int, int> pixel_span(double lo, double len, int bound) {
  int first = static_cast<int>(std::ceil(lo - 0.5));
  int last = static_cast<int>(std::floor(lo + len - 0.5)) + 1;
  first = std::max(first, 0);
  last = std::min(last, bound);
  return {first, last};
}

/// Copy of the frame region covered by `box` (clipped to the frame).
/// Returns an empty patch when the clipped region covers no pixel.
inline ImagePatch crop(const ImagePatch& frame, const BoundingBox& box) {
  if (frame.empty() || !box.valid()) return {};
  const auto [x0, x1] = pixel_span(box.x, box.w, frame.width);
  const auto [y0, y1] = pixel_span(box.y, box.h, frame.height);
  if (x0 >= x1 || y0 >= y1) return {};
  ImagePatch out(x1 - x0, y1 - y0);
  for (int y = y0; y < y1; ++y) {
    const auto src = frame.pixels.begin() + frame.offset(x0, y);
    std::copy(src, src + 3 * static_cast<std::size_t>(x1 - x0),
              out.pixels.begin() + out.offset(0, y - y0));
  }
  return out;
}

/// Nearest-neighbor resample to an exact target size.
inline ImagePatch resample(const ImagePatch& src, int w, int h) {
  if (src.empty() || w <= 0 || h <= 0) return {};
  ImagePatch out(w, h);
  for (int y = 0; y < h; ++y) {
    int sy = static_cast<int>((y + 0.5) * src.height / h);
    sy = std::clamp(sy, 0, src.height - 1);
    for (int x = 0; x < w; ++x) {
      int sx = static_cast<int>((x + 0.5) * src.width / w);
      sx = std::clamp(sx, 0, src.width - 1);
      const auto p = src.at(sx, sy);
      out.set(x, y, p[0], p[1], p[2]);
    }
  }
  return out;
}

}  // namespace occlusia
