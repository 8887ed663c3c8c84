#pragma once

// Score geometry, playheads and measure-aware alignments.
//
// All geometry is page-relative: y/h are fractions of page height and x/w
// fractions of page width. Pixel coordinates only appear at I/O boundaries.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace scorealign {

struct BoundingBox {
  int page = 0;
  double y = 0.0;
  double h = 1.0;
  double x = 0.0;
  double w = 1.0;

  double mid_x() const { return x + 0.5 * w; }
  double mid_y() const { return y + 0.5 * h; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Throws std::invalid_argument unless the box lies inside the unit page and
// has positive extent.
void validate_box(const BoundingBox& box);

struct PageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const PageSize&, const PageSize&) = default;
};

// Measure boxes in physical reading order, as produced by a measure detector.
class PhysicalScore {
 public:
  PhysicalScore(std::vector<PageSize> pages, std::vector<BoundingBox> boxes);

  int page_count() const { return static_cast<int>(pages_.size()); }
  int measure_count() const { return static_cast<int>(boxes_.size()); }
  const std::vector<PageSize>& pages() const { return pages_; }
  const std::vector<BoundingBox>& boxes() const { return boxes_; }

 private:
  std::vector<PageSize> pages_;
  std::vector<BoundingBox> boxes_;
};

// "After playing measure from_index, play to_index next." The order field is
// the position of the label in the annotation sequence.
struct JumpLabel {
  int from_index = 0;
  int to_index = 0;
  int order = 0;

  friend bool operator==(const JumpLabel&, const JumpLabel&) = default;
};

// Physical measure indices in performance order, with all jumps unrolled.
class LogicalOrder {
 public:
  explicit LogicalOrder(std::vector<int> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  int operator[](std::size_t k) const { return entries_[k]; }
  const std::vector<int>& entries() const { return entries_; }

  // Throws std::out_of_range if any entry is not a valid index into a score
  // with measure_count physical measures.
  void check_against(int measure_count) const;

  friend bool operator==(const LogicalOrder&, const LogicalOrder&) = default;

 private:
  std::vector<int> entries_;
};

// Boxes of the logical measures, i.e. boxes[order[k]] for every k.
std::vector<BoundingBox> resolve_boxes(const LogicalOrder& order,
                                       std::span<const BoundingBox> boxes);

struct ScorePlayhead {
  int page = 0;
  double y = 0.0;
  double h = 1.0;
  double x = 0.0;

  friend bool operator==(const ScorePlayhead&, const ScorePlayhead&) = default;
};

// Converts a fractional logical measure index m in [0, M) to a playhead: the
// box of measure floor(m), with x advanced by the residual times the box
// width. Throws std::domain_error for m outside [0, M).
ScorePlayhead playhead_from_measure(double m, const LogicalOrder& order,
                                    std::span<const BoundingBox> boxes);

// Same, over already-resolved logical boxes.
ScorePlayhead playhead_from_measure(double m,
                                    std::span<const BoundingBox> logical_boxes);

// Largest double strictly below measure_count.
double measure_upper_bound(int measure_count);

// A measure-aware alignment g: [0, T) -> [0, M), stored as samples at
// t = i / 100 for i in [0, ceil(100 T)) with linear interpolation between
// samples.
class Alignment {
 public:
  static constexpr double kSampleRate = 100.0;

  Alignment(double duration, int measure_count, std::vector<double> samples);

  // Samples fn at every 100 Hz grid point, clamped to [0, M).
  template <typename Fn>
  static Alignment sample(double duration, int measure_count, Fn&& fn) {
    std::vector<double> samples(sample_count(duration));
    const double upper = measure_upper_bound(measure_count);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double m = fn(sample_time(i));
      samples[i] = m < 0.0 ? 0.0 : (m > upper ? upper : m);
    }
    return Alignment(duration, measure_count, std::move(samples));
  }

  static std::size_t sample_count(double duration);
  static double sample_time(std::size_t i) {
    return static_cast<double>(i) / kSampleRate;
  }

  double duration() const { return duration_; }
  int measure_count() const { return measure_count_; }
  const std::vector<double>& samples() const { return samples_; }

  // g(t). Times past the last sample hold its value. Throws
  // std::domain_error for t outside [0, T).
  double at(double t) const;

  friend bool operator==(const Alignment&, const Alignment&) = default;

 private:
  double duration_;
  int measure_count_;
  std::vector<double> samples_;
};

// Ground truth: logical boxes plus the onset time of every logical measure.
class GroundTruth {
 public:
  GroundTruth(LogicalOrder order, std::vector<BoundingBox> logical_boxes,
              std::vector<double> measure_onsets, double duration);

  const LogicalOrder& order() const { return order_; }
  const std::vector<BoundingBox>& logical_boxes() const { return boxes_; }
  const std::vector<double>& measure_onsets() const { return onsets_; }
  double duration() const { return duration_; }
  int measure_count() const { return order_.size(); }

  // g*(t): linear between consecutive onsets, with the final measure
  // stretched to the end of the recording.
  double at(double t) const;

 private:
  LogicalOrder order_;
  std::vector<BoundingBox> boxes_;
  std::vector<double> onsets_;
  double duration_;
};

}  // namespace scorealign
