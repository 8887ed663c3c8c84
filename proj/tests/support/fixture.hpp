#pragma once

// Throwaway project directories for file-level and service tests.

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "scorealign/formats.hpp"
#include "scorealign/project.hpp"
#include "synthetic.hpp"

namespace fixture {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "scorealign-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// A valid 1x1 RGBA PNG.
inline std::string tiny_png() {
  static const unsigned char bytes[] = {
      0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D,
      0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
      0x08, 0x06, 0x00, 0x00, 0x00, 0x1F, 0x15, 0xC4, 0x89, 0x00, 0x00, 0x00,
      0x0A, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x00, 0x01, 0x00, 0x00,
      0x05, 0x00, 0x01, 0x0D, 0x0A, 0x2D, 0xB4, 0x00, 0x00, 0x00, 0x00, 0x49,
      0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82};
  return std::string(reinterpret_cast<const char*>(bytes), sizeof bytes);
}

// A one-page project with `count` measures laid out four to a system.
inline scorealign::ProjectPaths score_project(const fs::path& dir, int count) {
  using namespace scorealign;
  const ProjectPaths p{dir};
  fs::create_directories(p.pages());
  write_file(p.page(0), tiny_png());
  std::vector<MeasureRecord> measures;
  for (const auto& b : synth::box_grid(count, 4)) measures.push_back({b, 1});
  write_file(p.measures(), to_text(measures_to_json(measures)));
  return p;
}

struct SyntheticPiece {
  scorealign::ProjectPaths paths;
  double duration = 0.0;
  int measures = 0;
};

// A piece whose audio is its own score matrix played at a constant tempo:
// measure k starts at k * duration / measures.
inline SyntheticPiece self_aligned_project(const fs::path& dir, int measures,
                                           double duration, unsigned seed) {
  using namespace scorealign;
  std::mt19937_64 rng(seed);
  SyntheticPiece piece{score_project(dir, measures), duration, measures};
  const auto& p = piece.paths;

  const auto events = synth::random_noteheads(measures, 8, rng);
  write_file(p.noteheads(), to_text(noteheads_to_json(events)));

  std::vector<int> identity(measures);
  for (int k = 0; k < measures; ++k) identity[k] = k;
  const std::vector<int> staves(measures, 1);
  const auto score = build_score_matrix(events, LogicalOrder(identity), staves).matrix;
  const synth::Warp warp({0.0, duration}, {0.0, static_cast<double>(measures)});
  const auto audio = synth::render_audio(score, warp, duration, 0.0, rng);
  write_jltr(p.onsets(), FeatureFile{kAudioFrameRate, audio.values()});

  GroundTruthRecord gt;
  gt.duration = duration;
  gt.logical_order = identity;
  for (int k = 0; k < measures; ++k) {
    gt.measure_onsets.push_back(duration * k / measures);
  }
  write_file(p.ground_truth(), to_text(ground_truth_to_json(gt)));
  return piece;
}

}  // namespace fixture
