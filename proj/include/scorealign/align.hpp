#pragma once

// Dynamic time warping of score features against audio features.
//
// Steps (1,1), (0,1) and (1,0) all carry unit weight and the local cost is
// the Euclidean distance between rows. Among equal-cost predecessors the
// diagonal wins, then the audio-only step, then the score-only step.

#include <cstddef>
#include <vector>

#include "scorealign/core_model.hpp"
#include "scorealign/features.hpp"
#include "scorealign/matrix.hpp"

namespace scorealign {

struct PathStep {
  int score_row = 0;
  int audio_row = 0;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

using WarpPath = std::vector<PathStep>;

struct DtwResult {
  WarpPath path;
  double cost = 0.0;  // sum of local costs along path, accumulated in path order
};

struct DtwOptions {
  // Worker threads for local-cost computation. 0 picks hardware concurrency.
  // The result is bitwise identical for every value.
  unsigned threads = 1;
};

// Throws std::invalid_argument on empty inputs or mismatched column counts.
DtwResult dtw(const ScoreMatrix& score, const AudioMatrix& audio,
              const DtwOptions& options = {});
DtwResult dtw(const Matrix<double>& a, const Matrix<double>& b,
              const DtwOptions& options = {});

double euclidean(std::span<const double> a, std::span<const double> b);

// Throws std::invalid_argument unless the path runs corner to corner of a
// rows x cols grid with unit monotone steps.
void validate_path(const WarpPath& path, std::size_t rows, std::size_t cols);

// Per audio frame, the mean of the score rows matched to it, in measures.
std::vector<double> frame_positions(const WarpPath& path);

// Resamples frame positions (frame a sits at a / 31 s) onto the 100 Hz
// alignment grid. Frames past the end of the path hold the final position.
Alignment path_to_alignment(const WarpPath& path, int measure_count,
                            double duration);

}  // namespace scorealign
