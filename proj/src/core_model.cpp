#include "scorealign/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace scorealign {

void validate_box(const BoundingBox& box) {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (box.page < 0) throw std::invalid_argument("box page must be >= 0");
  if (!in_unit(box.x) || !in_unit(box.y)) {
    throw std::invalid_argument("box offset outside the page");
  }
  if (!(box.w > 0.0) || !(box.h > 0.0) || box.w > 1.0 || box.h > 1.0) {
    throw std::invalid_argument("box extent must be in (0, 1]");
  }
  // Detector output is rounded, so allow a hair of slack on the far edges.
  constexpr double kSlack = 1e-9;
  if (box.x + box.w > 1.0 + kSlack || box.y + box.h > 1.0 + kSlack) {
    throw std::invalid_argument("box extends past the page edge");
  }
}

PhysicalScore::PhysicalScore(std::vector<PageSize> pages,
                             std::vector<BoundingBox> boxes)
    : pages_(std::move(pages)), boxes_(std::move(boxes)) {
  if (pages_.empty()) throw std::invalid_argument("score has no pages");
  if (boxes_.empty()) throw std::invalid_argument("score has no measures");
  for (const auto& box : boxes_) {
    validate_box(box);
    if (box.page >= page_count()) {
      throw std::invalid_argument("measure box on page " +
                                  std::to_string(box.page) + " but score has " +
                                  std::to_string(page_count()) + " pages");
    }
  }
}

LogicalOrder::LogicalOrder(std::vector<int> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("logical order is empty");
  for (int e : entries_) {
    if (e < 0) throw std::invalid_argument("negative measure index");
  }
}

void LogicalOrder::check_against(int measure_count) const {
  for (int e : entries_) {
    if (e >= measure_count) {
      throw std::out_of_range("logical order references measure " +
                              std::to_string(e) + " of " +
                              std::to_string(measure_count));
    }
  }
}

std::vector<BoundingBox> resolve_boxes(const LogicalOrder& order,
                                       std::span<const BoundingBox> boxes) {
  order.check_against(static_cast<int>(boxes.size()));
  std::vector<BoundingBox> out;
  out.reserve(order.entries().size());
  for (int e : order.entries()) out.push_back(boxes[e]);
  return out;
}

ScorePlayhead playhead_from_measure(double m,
                                    std::span<const BoundingBox> logical_boxes) {
  const auto count = static_cast<double>(logical_boxes.size());
  if (!(m >= 0.0) || !(m < count)) {
    throw std::domain_error("measure position " + std::to_string(m) +
                            " outside [0, " + std::to_string(count) + ")");
  }
  const double whole = std::floor(m);
  const auto& b = logical_boxes[static_cast<std::size_t>(whole)];
  return {b.page, b.y, b.h, b.x + b.w * (m - whole)};
}

ScorePlayhead playhead_from_measure(double m, const LogicalOrder& order,
                                    std::span<const BoundingBox> boxes) {
  if (!(m >= 0.0) || !(m < order.size())) {
    throw std::domain_error("measure position " + std::to_string(m) +
                            " outside [0, " + std::to_string(order.size()) +
                            ")");
  }
  order.check_against(static_cast<int>(boxes.size()));
  const double whole = std::floor(m);
  const auto& b = boxes[order[static_cast<std::size_t>(whole)]];
  return {b.page, b.y, b.h, b.x + b.w * (m - whole)};
}

double measure_upper_bound(int measure_count) {
  return std::nextafter(static_cast<double>(measure_count), 0.0);
}

std::size_t Alignment::sample_count(double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
  // 100 T is usually meant to be integral; absorb representation error.
  return static_cast<std::size_t>(std::ceil(duration * kSampleRate - 1e-9));
}

Alignment::Alignment(double duration, int measure_count,
                     std::vector<double> samples)
    : duration_(duration),
      measure_count_(measure_count),
      samples_(std::move(samples)) {
  if (measure_count_ < 1) throw std::invalid_argument("M must be >= 1");
  if (samples_.size() != sample_count(duration_)) {
    throw std::invalid_argument("expected " +
                                std::to_string(sample_count(duration_)) +
                                " samples, got " +
                                std::to_string(samples_.size()));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i] >= 0.0) || !(samples_[i] < measure_count_)) {
      throw std::invalid_argument("alignment sample outside [0, M)");
    }
    if (i > 0 && samples_[i] < samples_[i - 1]) {
      throw std::invalid_argument("alignment samples are not monotone");
    }
  }
}

double Alignment::at(double t) const {
  if (!(t >= 0.0) || !(t < duration_)) {
    throw std::domain_error("time " + std::to_string(t) + " outside [0, " +
                            std::to_string(duration_) + ")");
  }
  const double pos = t * kSampleRate;
  const double nearest = std::round(pos);
  const auto last = samples_.size() - 1;
  if (std::abs(pos - nearest) < 1e-9) {
    return samples_[std::min(static_cast<std::size_t>(nearest), last)];
  }
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo >= last) return samples_[last];
  const double frac = pos - static_cast<double>(lo);
  return samples_[lo] + (samples_[lo + 1] - samples_[lo]) * frac;
}

GroundTruth::GroundTruth(LogicalOrder order,
                         std::vector<BoundingBox> logical_boxes,
                         std::vector<double> measure_onsets, double duration)
    : order_(std::move(order)),
      boxes_(std::move(logical_boxes)),
      onsets_(std::move(measure_onsets)),
      duration_(duration) {
  const auto m = static_cast<std::size_t>(order_.size());
  if (boxes_.size() != m) {
    throw std::invalid_argument("ground truth needs one box per logical measure");
  }
  if (onsets_.size() != m) {
    throw std::invalid_argument("ground truth needs one onset per logical measure");
  }
  if (!(onsets_.front() >= 0.0)) {
    throw std::invalid_argument("first measure onset must be >= 0");
  }
  for (std::size_t k = 1; k < m; ++k) {
    if (!(onsets_[k] > onsets_[k - 1])) {
      throw std::invalid_argument("measure onsets must be strictly increasing");
    }
  }
  if (!(duration_ > onsets_.back())) {
    throw std::invalid_argument("duration must exceed the last measure onset");
  }
}

double GroundTruth::at(double t) const {
  if (!(t >= 0.0) || !(t < duration_)) {
    throw std::domain_error("time " + std::to_string(t) + " outside [0, " +
                            std::to_string(duration_) + ")");
  }
  // Audio before the first downbeat is pinned to the start of measure 0.
  if (t <= onsets_.front()) return 0.0;
  const auto it = std::upper_bound(onsets_.begin(), onsets_.end(), t);
  const auto k = static_cast<std::size_t>(it - onsets_.begin()) - 1;
  const double start = onsets_[k];
  const double end = k + 1 < onsets_.size() ? onsets_[k + 1] : duration_;
  const double m = static_cast<double>(k) + (t - start) / (end - start);
  return std::min(m, measure_upper_bound(measure_count()));
}

}  // namespace scorealign
