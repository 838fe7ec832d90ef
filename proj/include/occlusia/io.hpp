#pragma once

// File formats: detection and trajectory CSVs, binary PPM frames, and
// the directory-backed frame source.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "occlusia/core.hpp"
#include "occlusia/image.hpp"
#include "occlusia/metrics.hpp"
#include "occlusia/pipeline.hpp"

namespace occlusia {

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline bool parse_int(const std::string& s, int& out) {
  try {
    std::size_t pos = 0;
    out = std::stoi(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

/// Parses frame,x,y,w,h,score rows (optional header) into per-frame
/// detection lists. Frames must be non-decreasing.
inline std::map<int, std::vector<Detection>> read_detections(std::istream& in) {
  std::map<int, std::vector<Detection>> out;
  std::string line;
  long lineno = 0;
  int last_frame = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    int frame = 0;
    if (lineno == 1 && !detail::parse_int(fields[0], frame))
      continue;  // header row
    if (fields.size() != 6)
      throw ParseError("expected 6 fields, got " + std::to_string(fields.size()),
                       lineno);
    double x, y, w, h, score;
    if (!detail::parse_int(fields[0], frame) ||
        !detail::parse_double(fields[1], x) ||
        !detail::parse_double(fields[2], y) ||
        !detail::parse_double(fields[3], w) ||
        !detail::parse_double(fields[4], h) ||
        !detail::parse_double(fields[5], score))
      throw ParseError("malformed detection row", lineno);
    if (frame < 1) throw ParseError("frame index must be >= 1", lineno);
    if (w <= 0.0 || h <= 0.0)
      throw ParseError("non-positive box size", lineno);
    if (score < 0.0 || score > 1.0)
      throw ParseError("score outside [0,1]", lineno);
    if (frame < last_frame)
      throw NonMonotonicFrame("frame " + std::to_string(frame) + " after " +
                              std::to_string(last_frame) + " at line " +
                              std::to_string(lineno));
    last_frame = frame;
    out[frame].push_back({frame, {x, y, w, h}, score});
  }
  return out;
}

inline std::map<int, std::vector<Detection>> read_detections(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open detections file " + path.string());
  return read_detections(in);
}

inline void write_detections(const std::map<int, std::vector<Detection>>& dets,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write detections file " + path.string());
  out << "frame,x,y,w,h,score\n";
  for (const auto& [frame, list] : dets)
    for (const auto& d : list)
      out << frame << ',' << detail::format_fixed(d.box.x) << ','
          << detail::format_fixed(d.box.y) << ','
          << detail::format_fixed(d.box.w) << ','
          << detail::format_fixed(d.box.h) << ','
          << detail::format_fixed(d.score) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

/// Writes tracker output as frame,track_id,x,y,w,h,state rows, sorted
/// by (frame, track id), positions at 2 decimals, LF endings — byte
/// stable for regression diffs.
inline void write_trajectories(const std::vector<FrameResult>& results,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trajectory file " + path.string());
  out << "frame,track_id,x,y,w,h,state\n";
  for (const auto& fr : results) {
    std::vector<TrackOutput> sorted = fr.outputs;
    std::sort(sorted.begin(), sorted.end(),
              [](const TrackOutput& a, const TrackOutput& b) {
                return a.label < b.label;
              });
    for (const auto& o : sorted)
      out << fr.frame << ',' << o.label.value << ','
          << detail::format_fixed(o.box.x) << ','
          << detail::format_fixed(o.box.y) << ','
          << detail::format_fixed(o.box.w) << ','
          << detail::format_fixed(o.box.h) << ','
          << (o.state == OutputState::detected ? 'D' : 'P') << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

/// Ground-truth trajectories: frame,track_id,x,y,w,h rows.
inline void write_ground_truth(const TrajectorySet& gt,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write ground truth file " + path.string());
  out << "frame,track_id,x,y,w,h\n";
  std::map<int, std::vector<std::pair<int, BoundingBox>>> by_frame;
  for (const auto& [id, track] : gt.tracks)
    for (const auto& [frame, box] : track) by_frame[frame].push_back({id, box});
  for (auto& [frame, list] : by_frame) {
    std::sort(list.begin(), list.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [id, box] : list)
      out << frame << ',' << id << ',' << detail::format_fixed(box.x) << ','
          << detail::format_fixed(box.y) << ',' << detail::format_fixed(box.w)
          << ',' << detail::format_fixed(box.h) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

/// Reads trajectory CSVs: frame,track_id,x,y,w,h with an optional
/// trailing state column and optional header. Works for both hypothesis
/// and ground-truth files.
inline TrajectorySet read_trajectories(std::istream& in) {
  TrajectorySet out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    int frame = 0;
    if (lineno == 1 && !detail::parse_int(fields[0], frame)) continue;  // header
    if (fields.size() != 6 && fields.size() != 7)
      throw ParseError("expected 6 or 7 fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    int track_id = 0;
    double x, y, w, h;
    if (!detail::parse_int(fields[0], frame) ||
        !detail::parse_int(fields[1], track_id) ||
        !detail::parse_double(fields[2], x) ||
        !detail::parse_double(fields[3], y) ||
        !detail::parse_double(fields[4], w) ||
        !detail::parse_double(fields[5], h))
      throw ParseError("malformed trajectory row", lineno);
    if (frame < 1) throw ParseError("frame index must be >= 1", lineno);
    if (w <= 0.0 || h <= 0.0)
      throw ParseError("non-positive box size", lineno);
    out.add(track_id, frame, {x, y, w, h});
  }
  return out;
}

inline TrajectorySet read_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trajectory file " + path.string());
  return read_trajectories(in);
}

/// Converts tracker frame results into a trajectory set (both detected
/// and predicted boxes participate).
inline TrajectorySet to_trajectories(const std::vector<FrameResult>& results) {
  TrajectorySet out;
  for (const auto& fr : results)
    for (const auto& o : fr.outputs) out.add(o.label.value, fr.frame, o.box);
  return out;
}

// ---- PPM (P6) frames ----

inline void write_ppm(const ImagePatch& img, const std::filesystem::path& path) {
  if (img.empty()) throw FormatError("refusing to write an empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline ImagePatch read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  // Header: magic, width, height, maxval — whitespace separated with
  // optional # comments.
  const auto next_token = [&in, &path]() {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok += static_cast<char>(c);
    }
    if (tok.empty())
      throw FormatError("truncated image header in " + path.string());
    return tok;
  };
  const std::string magic = next_token();
  if (magic != "P6")
    throw FormatError("unsupported image format '" + magic + "' in " +
                      path.string() + " (need binary P6)");
  int w = 0, h = 0, maxval = 0;
  if (!detail::parse_int(next_token(), w) ||
      !detail::parse_int(next_token(), h) ||
      !detail::parse_int(next_token(), maxval))
    throw FormatError("malformed image header in " + path.string());
  if (w <= 0 || h <= 0)
    throw FormatError("non-positive image size in " + path.string());
  if (maxval != 255)
    throw FormatError("unsupported max value " + std::to_string(maxval) +
                      " in " + path.string() + " (need 255)");
  ImagePatch img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw FormatError("truncated pixel data in " + path.string());
  return img;
}

/// Frame source over a directory of numerically named .ppm files
/// (e.g. 000001.ppm). Order follows the numeric value of the stem, not
/// the lexical directory order. Frames decode lazily.
class PpmDirectorySource final : public FrameSource {
 public:
  explicit PpmDirectorySource(const std::filesystem::path& dir) : dir_(dir) {
    if (!std::filesystem::is_directory(dir))
      throw IoError("frame directory " + dir.string() + " does not exist");
    std::vector<std::pair<long, std::filesystem::path>> found;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const auto& p = entry.path();
      if (p.extension() != ".ppm") continue;
      const std::string stem = p.stem().string();
      if (stem.empty() ||
          !std::all_of(stem.begin(), stem.end(),
                       [](unsigned char c) { return std::isdigit(c); }))
        continue;
      found.emplace_back(std::stol(stem), p);
    }
    std::sort(found.begin(), found.end());
    for (auto& [num, p] : found) files_.push_back(std::move(p));
    if (files_.empty())
      throw IoError("no numeric .ppm frames in " + dir.string());
  }

  int frame_count() const override { return static_cast<int>(files_.size()); }

  ImagePatch frame(int k) const override {
    if (k < 1 || k > frame_count())
      throw FrameOrderError("frame " + std::to_string(k) + " outside 1.." +
                            std::to_string(frame_count()));
    return read_ppm(files_[static_cast<std::size_t>(k) - 1]);
  }

  const std::filesystem::path& file(int k) const {
    return files_.at(static_cast<std::size_t>(k) - 1);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
};

inline PpmDirectorySource read_frames(const std::filesystem::path& dir) {
  return PpmDirectorySource(dir);
}

}  // namespace occlusia
