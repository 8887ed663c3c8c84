#include "scorealign/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scorealign {

BoxMatching reindex(std::span<const BoundingBox> estimated,
                    std::span<const BoundingBox> ground_truth) {
  if (estimated.empty() || ground_truth.empty()) {
    throw std::invalid_argument("reindex needs non-empty box lists");
  }
  const std::size_t n = ground_truth.size();
  BoxMatching matching;
  matching.reserve(estimated.size());
  std::vector<double> dist(n);
  int previous = 0;

  for (const auto& est : estimated) {
    const bool page_shared = std::any_of(
        ground_truth.begin(), ground_truth.end(),
        [&](const BoundingBox& g) { return g.page == est.page; });
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& g = ground_truth[k];
      double d = std::numeric_limits<double>::infinity();
      if (!page_shared) {
        d = std::hypot(est.mid_x() - g.mid_x(),
                       (est.mid_y() + est.page) - (g.mid_y() + g.page));
      } else if (g.page == est.page) {
        d = std::hypot(est.mid_x() - g.mid_x(), est.mid_y() - g.mid_y());
      }
      dist[k] = d;
      best = std::min(best, d);
    }
    int chosen = -1;
    int smallest = -1;
    for (std::size_t k = 0; k < n; ++k) {
      if (dist[k] - best > kReindexTieTolerance) continue;
      const int idx = static_cast<int>(k);
      if (smallest < 0) smallest = idx;
      if (idx >= previous) {
        chosen = idx;
        break;
      }
    }
    if (chosen < 0) chosen = smallest;
    matching.push_back(chosen);
    previous = chosen;
  }
  return matching;
}

double reindex_position(double m, const BoxMatching& matching) {
  const double whole = std::floor(m);
  if (!(whole >= 0.0) || whole >= static_cast<double>(matching.size())) {
    throw std::domain_error("position outside the estimated measure range");
  }
  return matching[static_cast<std::size_t>(whole)] + (m - whole);
}

Evaluator::Evaluator(EstimatedAlignment estimate, const GroundTruth& truth)
    : estimate_(estimate.alignment),
      truth_(truth),
      matching_(reindex(estimate.logical_boxes, truth.logical_boxes())) {
  if (static_cast<int>(estimate.logical_boxes.size()) !=
      estimate_.measure_count()) {
    throw std::invalid_argument(
        "estimated alignment M differs from its box count");
  }
}

double Evaluator::mdiff(double t) const {
  if (!(t >= 0.0) || !(t < truth_.duration())) {
    throw std::domain_error("evaluation time outside [0, T)");
  }
  // The estimate may be a few samples shorter than the ground truth when the
  // audio matrix was rounded to whole frames; hold its final value.
  const double est_t = std::min(t, std::nextafter(estimate_.duration(), 0.0));
  return reindex_position(estimate_.at(est_t), matching_) - truth_.at(t);
}

std::size_t evaluation_sample_count(double duration) {
  return Alignment::sample_count(duration);
}

double evaluation_time(double duration, std::size_t i, std::size_t n) {
  const double hundred_t = duration * Alignment::kSampleRate;
  if (std::abs(hundred_t - static_cast<double>(n)) < 1e-9) {
    return Alignment::sample_time(i);
  }
  return duration * static_cast<double>(i) / static_cast<double>(n);
}

Metrics summarize(std::span<const double> mdiff) {
  Metrics out;
  out.samples = mdiff.size();
  if (mdiff.empty()) return out;
  std::size_t hits = 0;
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (double d : mdiff) {
    if (std::abs(d) <= 0.5) ++hits;
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const auto n = static_cast<double>(mdiff.size());
  out.macc = static_cast<double>(hits) / n;
  out.merr = abs_sum / n;
  out.mdev = std::sqrt(sq_sum / n);
  return out;
}

Metrics metrics(double duration, const std::function<double(double)>& mdiff) {
  const std::size_t n = evaluation_sample_count(duration);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = mdiff(evaluation_time(duration, i, n));
  }
  return summarize(values);
}

Metrics metrics(EstimatedAlignment estimate, const GroundTruth& truth) {
  const Evaluator evaluator(estimate, truth);
  return metrics(truth.duration(),
                 [&](double t) { return evaluator.mdiff(t); });
}

}  // namespace scorealign
