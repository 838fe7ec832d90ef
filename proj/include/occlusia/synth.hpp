#pragma once

// Synthetic scenario generator: textured rectangles moving over a
// noise background, with ground truth, detections (jitter + dropout +
// full-occlusion suppression) and rendered frames. Everything is
// seed-deterministic so scenario files can be regression-diffed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "occlusia/core.hpp"
#include "occlusia/image.hpp"
#include "occlusia/io.hpp"
#include "occlusia/metrics.hpp"
#include "occlusia/rng.hpp"

namespace occlusia {

struct VelocityChange {
  int frame = 0;  // applies to the transition into this frame and onward
  double vx = 0.0;
  double vy = 0.0;
};

struct AgentSpec {
  BoundingBox start;       // box at frame 1
  double vx = 0.0;         // px/frame
  double vy = 0.0;
  double grow_w = 0.0;     // size change px/frame (box stays centered)
  double grow_h = 0.0;
  int growth_stop = 0;     // last frame the growth applies to (0 = always)
  std::vector<VelocityChange> velocity_changes;  // ascending by frame
  std::array<std::uint8_t, 3> color{200, 60, 60};
  std::array<std::uint8_t, 3> color2{60, 60, 200};
  enum class Pattern { solid, vstripes, hstripes, checker } pattern = Pattern::solid;
  int stripe_period = 8;  // px per stripe band, anchored to the box corner
  // Per-pixel texture noise riding with the box. Grid descriptors need
  // every patch cell to look slightly different, otherwise the ratio
  // test rejects even perfect matches as ambiguous. Keep the amplitude
  // small enough that colors stay inside one histogram bin per channel.
  int noise_amplitude = 0;
  std::uint64_t texture_seed = 0;
};

struct ScenarioNoise {
  double dropout = 0.0;  // probability a detection is dropped
  double jitter = 0.0;   // gaussian sigma on detection position (px)
};

struct ScenarioSpec {
  std::string kind = "custom";
  int frames = 60;
  int canvas_w = 320;
  int canvas_h = 240;
  // Painter order: later agents draw on top (closer to the camera).
  std::vector<AgentSpec> agents;
  ScenarioNoise noise;
  std::uint64_t seed = 42;
  std::uint8_t bg_base = 112;
  int bg_amplitude = 24;  // per-pixel noise range added to bg_base
};

struct ScenarioData {
  std::vector<ImagePatch> frames;               // empty unless rendered
  std::map<int, std::vector<Detection>> detections;
  TrajectorySet ground_truth;                   // track id = agent index + 1
  std::vector<std::vector<bool>> suppressed;    // [frame-1][agent] full occlusion
};

namespace detail {

/// Box of one agent at 1-based frame t, following velocity changes and
/// centered growth.
inline BoundingBox agent_box_at(const AgentSpec& a, int t) {
  double cx = a.start.cx(), cy = a.start.cy();
  double w = a.start.w, h = a.start.h;
  double vx = a.vx, vy = a.vy;
  std::size_t next_change = 0;
  for (int f = 2; f <= t; ++f) {
    while (next_change < a.velocity_changes.size() &&
           a.velocity_changes[next_change].frame <= f) {
      vx = a.velocity_changes[next_change].vx;
      vy = a.velocity_changes[next_change].vy;
      ++next_change;
    }
    cx += vx;
    cy += vy;
    if (a.growth_stop == 0 || f <= a.growth_stop) {
      w += a.grow_w;
      h += a.grow_h;
    }
  }
  return BoundingBox::from_center(cx, cy, w, h);
}

inline void paint_agent(ImagePatch& frame, const AgentSpec& a,
                        const BoundingBox& box) {
  const auto [x0, x1] = pixel_span(box.x, box.w, frame.width);
  const auto [y0, y1] = pixel_span(box.y, box.h, frame.height);
  const int period = std::max(a.stripe_period, 1);
  // Texture anchors ride with the box so the pattern moves with the
  // agent instead of sliding under it.
  const int ax = static_cast<int>(std::floor(box.x));
  const int ay = static_cast<int>(std::floor(box.y));
  const int amp = a.noise_amplitude;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const int lx = static_cast<int>(std::floor((x + 0.5 - box.x) / period));
      const int ly = static_cast<int>(std::floor((y + 0.5 - box.y) / period));
      bool second = false;
      switch (a.pattern) {
        case AgentSpec::Pattern::solid: second = false; break;
        case AgentSpec::Pattern::vstripes: second = (lx % 2) != 0; break;
        case AgentSpec::Pattern::hstripes: second = (ly % 2) != 0; break;
        case AgentSpec::Pattern::checker: second = ((lx + ly) % 2) != 0; break;
      }
      const auto& c = second ? a.color2 : a.color;
      int r = c[0], g = c[1], b = c[2];
      if (amp > 0) {
        const std::uint64_t h = hash2d(x - ax, y - ay, a.texture_seed);
        const int span = 2 * amp + 1;
        r += static_cast<int>(h % span) - amp;
        g += static_cast<int>((h >> 8) % span) - amp;
        b += static_cast<int>((h >> 16) % span) - amp;
      }
      frame.set(x, y, static_cast<std::uint8_t>(std::clamp(r, 0, 255)),
                static_cast<std::uint8_t>(std::clamp(g, 0, 255)),
                static_cast<std::uint8_t>(std::clamp(b, 0, 255)));
    }
  }
}

}  // namespace detail

/// Generates the full scenario in memory. Throws SpecError when any
/// agent box leaves the canvas at any frame.
inline ScenarioData generate(const ScenarioSpec& spec, bool render_frames = true) {
  if (spec.frames < 1) throw SpecError("scenario needs at least one frame");
  if (spec.canvas_w < 1 || spec.canvas_h < 1)
    throw SpecError("scenario canvas must be positive");

  const int n = static_cast<int>(spec.agents.size());
  // Trajectories first; validate before rendering anything.
  std::vector<std::vector<BoundingBox>> boxes(
      static_cast<std::size_t>(spec.frames));
  for (int t = 1; t <= spec.frames; ++t) {
    boxes[t - 1].resize(n);
    for (int i = 0; i < n; ++i) {
      const BoundingBox b = detail::agent_box_at(spec.agents[i], t);
      if (!b.valid())
        throw SpecError("agent " + std::to_string(i + 1) +
                        " degenerates at frame " + std::to_string(t));
      if (b.x < 0 || b.y < 0 || b.right() > spec.canvas_w ||
          b.bottom() > spec.canvas_h)
        throw SpecError("agent " + std::to_string(i + 1) +
                        " leaves the canvas at frame " + std::to_string(t));
      boxes[t - 1][i] = b;
    }
  }

  ScenarioData out;
  out.suppressed.assign(static_cast<std::size_t>(spec.frames),
                        std::vector<bool>(n, false));
  Rng rng(spec.seed);

  for (int t = 1; t <= spec.frames; ++t) {
    const auto& frame_boxes = boxes[t - 1];

    if (render_frames) {
      ImagePatch frame(spec.canvas_w, spec.canvas_h);
      for (int y = 0; y < spec.canvas_h; ++y)
        for (int x = 0; x < spec.canvas_w; ++x) {
          const auto v = static_cast<std::uint8_t>(
              spec.bg_base +
              hash2d(x, y, spec.seed) % static_cast<std::uint64_t>(
                                            spec.bg_amplitude + 1));
          frame.set(x, y, v, v, v);
        }
      for (int i = 0; i < n; ++i)
        detail::paint_agent(frame, spec.agents[i], frame_boxes[i]);
      out.frames.push_back(std::move(frame));
    }

    for (int i = 0; i < n; ++i) {
      out.ground_truth.add(i + 1, t, frame_boxes[i]);

      // Fully hidden behind a later-drawn (front) agent: no detection.
      bool hidden = false;
      for (int j = i + 1; j < n && !hidden; ++j)
        hidden = frame_boxes[j].contains(frame_boxes[i]);
      out.suppressed[t - 1][i] = hidden;
      if (hidden) continue;

      // Noise draws happen for every emitted candidate in a fixed
      // order, so a given spec+seed always yields the same stream.
      const double drop = uniform01(rng);
      const double jx = gaussian(rng);
      const double jy = gaussian(rng);
      if (drop < spec.noise.dropout) continue;
      BoundingBox det = frame_boxes[i];
      det.x += spec.noise.jitter * jx;
      det.y += spec.noise.jitter * jy;
      out.detections[t].push_back({t, det, 1.0});
    }
  }
  return out;
}

/// Named presets. `frames` of 0 keeps each preset's default length.
inline ScenarioSpec make_preset(const std::string& kind, std::uint64_t seed = 42,
                                int frames = 0) {
  ScenarioSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  spec.frames = frames > 0 ? frames : 60;

  if (kind == "parallel") {
    AgentSpec a;
    a.start = {36, 36, 26, 50};
    a.vx = 2.4;
    a.color = {200, 60, 60};
    a.color2 = {240, 160, 60};
    a.pattern = AgentSpec::Pattern::vstripes;
    a.noise_amplitude = 6;
    a.texture_seed = 9101;
    AgentSpec b;
    b.start = {36, 150, 26, 50};
    b.vx = 2.6;
    b.color = {60, 60, 200};
    b.color2 = {60, 180, 160};
    b.pattern = AgentSpec::Pattern::hstripes;
    b.noise_amplitude = 6;
    b.texture_seed = 9102;
    spec.agents = {a, b};
    return spec;
  }

  if (kind == "crossing") {
    // Two agents sharing one palette (color histograms nearly identical)
    // but orthogonal stripe orientations (gradient descriptors differ).
    // The slow lead agent F is caught by the fast agent H; while H is
    // fully hidden behind F (frames 30-34), F snaps to H's approach
    // velocity so the pair co-moves and the occlusion lasts. F's motion
    // change happens exactly when its partner is invisible, which is
    // what makes the association ambiguous without appearance evidence.
    // Shared palette, bin-centered colors: each channel value sits in
    // the middle of an 8-bin histogram cell so the texture noise never
    // bleeds across bins and both agents' color models stay identical.
    const std::array<std::uint8_t, 3> bright{208, 208, 48};
    const std::array<std::uint8_t, 3> dark{48, 48, 112};

    AgentSpec h;  // drawn first: behind
    h.start = BoundingBox::from_center(214.1, 120.0, 24, 36);
    h.vx = -4.2;
    h.grow_w = 12.0 / 29.0;  // reaches 36x52 by frame 30
    h.grow_h = 16.0 / 29.0;
    h.growth_stop = 30;
    h.velocity_changes = {{31, -5.8, 0.0}, {35, 1.2, 0.0}};
    h.color = bright;
    h.color2 = dark;
    h.pattern = AgentSpec::Pattern::hstripes;
    h.noise_amplitude = 6;
    h.texture_seed = 9001;

    AgentSpec f;  // drawn second: front
    f.start = BoundingBox::from_center(58.0, 120.0, 40, 56);
    f.vx = 1.2;
    f.velocity_changes = {{31, -5.8, 0.0}, {38, -0.5, 0.0}};
    f.color = bright;
    f.color2 = dark;
    f.pattern = AgentSpec::Pattern::vstripes;
    f.noise_amplitude = 6;
    f.texture_seed = 9002;

    spec.agents = {h, f};
    return spec;
  }

  if (kind == "group") {
    // Three agents walking close together: persistent partial overlaps
    // (group pairs form) but never a full occlusion.
    AgentSpec a;
    a.start = {40, 70, 30, 54};
    a.vx = 2.0;
    a.color = {200, 60, 60};
    a.color2 = {240, 160, 60};
    a.pattern = AgentSpec::Pattern::vstripes;
    a.noise_amplitude = 6;
    a.texture_seed = 9201;
    AgentSpec b;
    b.start = {60, 96, 30, 54};
    b.vx = 2.0;
    b.color = {60, 160, 60};
    b.color2 = {200, 200, 80};
    b.pattern = AgentSpec::Pattern::hstripes;
    b.noise_amplitude = 6;
    b.texture_seed = 9202;
    AgentSpec c;
    c.start = {44, 126, 30, 54};
    c.vx = 2.0;
    c.color = {60, 60, 200};
    c.color2 = {160, 80, 200};
    c.pattern = AgentSpec::Pattern::checker;
    c.noise_amplitude = 6;
    c.texture_seed = 9203;
    spec.agents = {a, b, c};
    return spec;
  }

  if (kind == "dropout") {
    AgentSpec a;
    a.start = {30, 40, 28, 52};
    a.vx = 2.2;
    a.color = {200, 60, 60};
    a.color2 = {240, 160, 60};
    a.pattern = AgentSpec::Pattern::vstripes;
    a.noise_amplitude = 6;
    a.texture_seed = 9301;
    AgentSpec b;
    b.start = {260, 150, 28, 52};
    b.vx = -2.2;
    b.color = {60, 60, 200};
    b.color2 = {60, 180, 160};
    b.pattern = AgentSpec::Pattern::hstripes;
    b.noise_amplitude = 6;
    b.texture_seed = 9302;
    spec.agents = {a, b};
    spec.noise.dropout = 0.15;
    spec.noise.jitter = 0.5;
    return spec;
  }

  throw SpecError("unknown scenario preset '" + kind +
                  "' (want crossing, parallel, group or dropout)");
}

/// Renders a scenario to disk: frames/NNNNNN.ppm, detections.csv and
/// gt.csv under `out_dir`.
inline void synth_scenario(const ScenarioSpec& spec,
                           const std::filesystem::path& out_dir) {
  const ScenarioData data = generate(spec);
  std::filesystem::create_directories(out_dir / "frames");
  char name[32];
  for (std::size_t i = 0; i < data.frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "%06zu.ppm", i + 1);
    write_ppm(data.frames[i], out_dir / "frames" / name);
  }
  write_detections(data.detections, out_dir / "detections.csv");
  write_ground_truth(data.ground_truth, out_dir / "gt.csv");
}

}  // namespace occlusia
