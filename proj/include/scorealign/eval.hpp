#pragma once

// Measure-aware evaluation of an estimated alignment against ground truth.
//
// Estimated positions are first expressed in ground-truth measure units by
// matching every estimated logical box to the nearest ground-truth logical
// box (Reindex). MDiff(t) is then the reindexed estimate minus g*(t), and
// the metrics summarize MDiff sampled at 100 Hz:
//   MAcc  fraction of samples with |MDiff| <= 1/2
//   MErr  mean |MDiff|
//   MDev  sqrt(mean MDiff^2)   (root mean square, no mean subtraction)

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "scorealign/core_model.hpp"

namespace scorealign {

// matching[k'] is the ground-truth logical index for estimated index k'.
using BoxMatching = std::vector<int>;

inline constexpr double kReindexTieTolerance = 1e-9;

// Nearest midpoint per estimated box. Boxes on other pages are only
// considered when no ground-truth box shares the page, in which case the
// page number is added to the y midpoint. Ties go to the smallest candidate
// at or after the previous assignment, else to the smallest candidate.
BoxMatching reindex(std::span<const BoundingBox> estimated,
                    std::span<const BoundingBox> ground_truth);

// matching[floor(m)] + (m - floor(m)).
double reindex_position(double m, const BoxMatching& matching);

struct EstimatedAlignment {
  const Alignment& alignment;
  std::span<const BoundingBox> logical_boxes;  // M' boxes
};

class Evaluator {
 public:
  Evaluator(EstimatedAlignment estimate, const GroundTruth& truth);

  const BoxMatching& matching() const { return matching_; }

  // Throws std::domain_error for t outside [0, T) of the ground truth.
  double mdiff(double t) const;

 private:
  const Alignment& estimate_;
  const GroundTruth& truth_;
  BoxMatching matching_;
};

struct Metrics {
  double macc = 0.0;
  double merr = 0.0;
  double mdev = 0.0;
  std::size_t samples = 0;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// N = ceil(100 T) for non-integral 100 T.
std::size_t evaluation_sample_count(double duration);

// The i-th of n sample times over [0, T): T i / n, or exactly i / 100 when
// n = 100 T so that it coincides with the alignment grid.
double evaluation_time(double duration, std::size_t i, std::size_t n);

// Reduces MDiff samples in index order.
Metrics summarize(std::span<const double> mdiff);

// Samples an arbitrary MDiff function over [0, T).
Metrics metrics(double duration, const std::function<double(double)>& mdiff);

Metrics metrics(EstimatedAlignment estimate, const GroundTruth& truth);

}  // namespace scorealign
