#include "scorealign/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>

namespace scorealign {
namespace {

enum Step : std::uint8_t { kStart = 0, kDiagonal = 1, kAudioOnly = 2, kScoreOnly = 3 };

template <typename A, typename B>
double row_distance(std::span<const A> a, std::span<const B> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

// Fills costs[r * cols + j] for score rows [first, first + count).
template <typename A, typename B>
void fill_costs(const Matrix<A>& a, const Matrix<B>& b, std::size_t first,
                std::size_t count, unsigned threads, std::vector<double>& costs) {
  const std::size_t cols = b.rows();
  const auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const auto ra = a.row(first + r);
      for (std::size_t j = 0; j < cols; ++j) {
        costs[r * cols + j] = row_distance<A, B>(ra, b.row(j));
      }
    }
  };
  if (threads <= 1 || count < 2) {
    work(0, count);
    return;
  }
  const std::size_t n = std::min<std::size_t>(threads, count);
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    pool.emplace_back(work, count * t / n, count * (t + 1) / n);
  }
}

template <typename A, typename B>
DtwResult run_dtw(const Matrix<A>& a, const Matrix<B>& b,
                  const DtwOptions& options) {
  if (a.rows() == 0 || b.rows() == 0) {
    throw std::invalid_argument("dtw needs non-empty inputs");
  }
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("dtw inputs differ in column count");
  }
  const std::size_t rows = a.rows();
  const std::size_t cols = b.rows();
  unsigned threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kBlock = 64;
  std::vector<std::uint8_t> steps(rows * cols, kStart);
  std::vector<double> prev(cols, kInf);
  std::vector<double> curr(cols, kInf);
  std::vector<double> costs(std::min(kBlock, rows) * cols);

  for (std::size_t block = 0; block < rows; block += kBlock) {
    const std::size_t count = std::min(kBlock, rows - block);
    fill_costs(a, b, block, count, threads, costs);
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t i = block + r;
      const double* c = costs.data() + r * cols;
      std::uint8_t* step = steps.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        if (i == 0 && j == 0) {
          curr[0] = c[0];
          continue;
        }
        double best = kInf;
        std::uint8_t choice = kStart;
        if (i > 0 && j > 0 && prev[j - 1] < best) {
          best = prev[j - 1];
          choice = kDiagonal;
        }
        if (j > 0 && curr[j - 1] < best) {
          best = curr[j - 1];
          choice = kAudioOnly;
        }
        if (i > 0 && prev[j] < best) {
          best = prev[j];
          choice = kScoreOnly;
        }
        curr[j] = best + c[j];
        step[j] = choice;
      }
      std::swap(prev, curr);
    }
  }

  DtwResult result;
  result.cost = prev[cols - 1];
  std::size_t i = rows - 1;
  std::size_t j = cols - 1;
  while (true) {
    result.path.push_back({static_cast<int>(i), static_cast<int>(j)});
    const auto s = steps[i * cols + j];
    if (s == kStart) break;
    if (s != kAudioOnly) --i;
    if (s != kScoreOnly) --j;
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  return row_distance<double, double>(a, b);
}

DtwResult dtw(const ScoreMatrix& score, const AudioMatrix& audio,
              const DtwOptions& options) {
  if (audio.cols() != kPitchCount) {
    throw std::invalid_argument("audio matrix must have 88 columns");
  }
  return run_dtw(score.values(), audio.values(), options);
}

DtwResult dtw(const Matrix<double>& a, const Matrix<double>& b,
              const DtwOptions& options) {
  return run_dtw(a, b, options);
}

void validate_path(const WarpPath& path, std::size_t rows, std::size_t cols) {
  if (path.empty()) throw std::invalid_argument("empty warp path");
  if (path.front() != PathStep{0, 0}) {
    throw std::invalid_argument("warp path must start at (0, 0)");
  }
  const PathStep end{static_cast<int>(rows) - 1, static_cast<int>(cols) - 1};
  if (path.back() != end) {
    throw std::invalid_argument("warp path must end at the far corner");
  }
  for (std::size_t k = 1; k < path.size(); ++k) {
    const int di = path[k].score_row - path[k - 1].score_row;
    const int dj = path[k].audio_row - path[k - 1].audio_row;
    if (di < 0 || di > 1 || dj < 0 || dj > 1 || (di == 0 && dj == 0)) {
      throw std::invalid_argument("invalid warp path step at index " +
                                  std::to_string(k));
    }
  }
}

std::vector<double> frame_positions(const WarpPath& path) {
  if (path.empty()) throw std::invalid_argument("empty warp path");
  const auto frames = static_cast<std::size_t>(path.back().audio_row) + 1;
  std::vector<double> sum(frames, 0.0);
  std::vector<std::size_t> count(frames, 0);
  for (const auto& s : path) {
    sum[s.audio_row] += s.score_row;
    ++count[s.audio_row];
  }
  std::vector<double> out(frames);
  for (std::size_t a = 0; a < frames; ++a) {
    out[a] = sum[a] / static_cast<double>(count[a]) / kRowsPerMeasure;
  }
  return out;
}

Alignment path_to_alignment(const WarpPath& path, int measure_count,
                            double duration) {
  if (measure_count < 1) throw std::invalid_argument("M must be >= 1");
  const std::size_t rows =
      static_cast<std::size_t>(measure_count) * kRowsPerMeasure;
  if (path.empty()) throw std::invalid_argument("empty warp path");
  validate_path(path, rows, static_cast<std::size_t>(path.back().audio_row) + 1);

  const auto positions = frame_positions(path);
  const std::size_t last = positions.size() - 1;
  return Alignment::sample(duration, measure_count, [&](double t) {
    const double u = t * kAudioFrameRate;
    const auto lo = static_cast<std::size_t>(std::floor(u));
    if (lo >= last) return positions[last];
    const double frac = u - static_cast<double>(lo);
    return positions[lo] + (positions[lo + 1] - positions[lo]) * frac;
  });
}

}  // namespace scorealign
