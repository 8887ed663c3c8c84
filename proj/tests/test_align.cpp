#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "scorealign/align.hpp"
#include "synthetic.hpp"

using namespace scorealign;

namespace {

Matrix<double> one_hot_rows(std::initializer_list<int> hot, std::size_t width) {
  Matrix<double> m(hot.size(), width, 0.0);
  std::size_t r = 0;
  for (int h : hot) m(r++, h) = 1.0;
  return m;
}

oracle::Rows to_rows(const Matrix<double>& m) {
  oracle::Rows rows;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.emplace_back(m.row(r).begin(), m.row(r).end());
  }
  return rows;
}

Matrix<double> random_matrix(std::size_t rows, std::size_t cols,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix<double> m(rows, cols, 0.0);
  for (auto& v : m.data()) v = u(rng);
  return m;
}

std::vector<std::pair<int, int>> as_pairs(const WarpPath& path) {
  std::vector<std::pair<int, int>> out;
  for (const auto& s : path) out.emplace_back(s.score_row, s.audio_row);
  return out;
}

}  // namespace

TEST_CASE("identical one-hot rows align on the diagonal at zero cost") {
  const auto a = one_hot_rows({5, 9}, 88);
  const auto r = dtw(a, a);
  CHECK(r.path == WarpPath{{0, 0}, {1, 1}});
  CHECK(r.cost == 0.0);
}

TEST_CASE("a repeated audio frame is absorbed by an audio-only step") {
  const auto s = one_hot_rows({5}, 88);
  const auto a = one_hot_rows({5, 5}, 88);
  const auto r = dtw(s, a);
  CHECK(r.path == WarpPath{{0, 0}, {0, 1}});
  CHECK(r.cost == 0.0);
}

TEST_CASE("a fixed 4 x 5 instance matches exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  const auto a = random_matrix(4, 6, rng);
  const auto b = random_matrix(5, 6, rng);
  const auto r = dtw(a, b);
  const auto bf = oracle::brute_force_dtw(to_rows(a), to_rows(b));
  CHECK(bf.paths == 129);  // Delannoy number D(3, 4)
  CHECK(r.cost == bf.best);
  CHECK(oracle::path_cost(to_rows(a), to_rows(b), as_pairs(r.path)) == r.cost);
}

TEST_CASE("dtw matches exhaustive enumeration on small random instances") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 6);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = random_matrix(size(rng), 3, rng);
    const auto b = random_matrix(size(rng), 3, rng);
    const auto r = dtw(a, b);
    validate_path(r.path, a.rows(), b.rows());
    CHECK(r.cost == oracle::brute_force_dtw(to_rows(a), to_rows(b)).best);
    CHECK(oracle::path_cost(to_rows(a), to_rows(b), as_pairs(r.path)) == r.cost);
  }
}

TEST_CASE("dtw cost is symmetric and the path transposes") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_matrix(3 + trial % 9, 4, rng);
    const auto b = random_matrix(2 + trial % 7, 4, rng);
    const auto ab = dtw(a, b);
    const auto ba = dtw(b, a);
    CHECK(ab.cost == doctest::Approx(ba.cost).epsilon(1e-12));
  }
}

TEST_CASE("identical inputs cost zero and admit the diagonal path") {
  std::mt19937_64 rng(8);
  const auto a = random_matrix(12, 5, rng);
  const auto r = dtw(a, a);
  CHECK(r.cost == 0.0);
  REQUIRE(r.path.size() == 12);
  for (int i = 0; i < 12; ++i) CHECK(r.path[i] == PathStep{i, i});
}

TEST_CASE("zero cost requires a zero-distance monotone path") {
  // Audio plays row 0 twice then skips row 1: no zero path exists.
  const auto s = one_hot_rows({1, 2, 3}, 4);
  const auto a = one_hot_rows({1, 1, 3}, 4);
  CHECK(dtw(s, a).cost > 0.0);
  const auto stretched = one_hot_rows({1, 1, 2, 3, 3}, 4);
  CHECK(dtw(s, stretched).cost == 0.0);
}

TEST_CASE("equal-cost predecessors prefer the diagonal") {
  // All-zero costs: every path ties, so the tie-break alone picks it.
  const Matrix<double> a(3, 1, 0.0);
  const Matrix<double> b(3, 1, 0.0);
  CHECK(dtw(a, b).path == WarpPath{{0, 0}, {1, 1}, {2, 2}});

  const Matrix<double> c(4, 1, 0.0);
  CHECK(dtw(a, c).path == WarpPath{{0, 0}, {0, 1}, {1, 2}, {2, 3}});
  CHECK(dtw(c, a).path == WarpPath{{0, 0}, {1, 0}, {2, 1}, {3, 2}});
}

TEST_CASE("threaded cost computation is bitwise identical") {
  std::mt19937_64 rng(5);
  const auto score = synth::random_score(6, 0.08, rng);
  const synth::Warp warp = synth::Warp::random(20.0, 6, 3, rng);
  const auto audio = synth::render_audio(score, warp, 20.0, 0.1, rng);
  const auto one = dtw(score, audio, {1});
  for (unsigned t : {2u, 3u, 8u}) {
    const auto many = dtw(score, audio, {t});
    CHECK(many.cost == one.cost);
    CHECK(many.path == one.path);
  }
}

TEST_CASE("dtw rejects empty or mismatched inputs") {
  CHECK_THROWS(dtw(Matrix<double>(0, 3, 0.0), Matrix<double>(2, 3, 0.0)));
  CHECK_THROWS(dtw(Matrix<double>(2, 3, 0.0), Matrix<double>(2, 4, 0.0)));
}

TEST_CASE("a diagonal path maps frame a to a / 48") {
  WarpPath path;
  for (int i = 0; i < 48; ++i) path.push_back({i, i});
  const auto pos = frame_positions(path);
  REQUIRE(pos.size() == 48);
  for (int a = 0; a < 48; ++a) CHECK(pos[a] == a / 48.0);

  // Between frames the alignment interpolates; past the last frame it holds.
  const auto g = path_to_alignment(path, 1, 48.0 / 31.0);
  for (std::size_t i = 0; i < g.samples().size(); ++i) {
    const double frame = std::min(g.sample_time(i) * 31.0, 47.0);
    CHECK(g.samples()[i] == doctest::Approx(frame / 48.0).epsilon(1e-12));
  }
}

TEST_CASE("a frame matched to several rows sits at their mean") {
  const WarpPath path{{0, 0}, {1, 0}, {2, 0}, {3, 1}};
  CHECK(frame_positions(path)[0] == 1.0 / 48.0);
  CHECK(frame_positions(path)[1] == 3.0 / 48.0);
}

TEST_CASE("single-frame audio gives a constant alignment at the mean row") {
  for (int m : {1, 2, 5}) {
    WarpPath path;
    for (int r = 0; r < 48 * m; ++r) path.push_back({r, 0});
    const auto g = path_to_alignment(path, m, 1.0 / 31.0);
    const double expected = (48.0 * m - 1.0) / 2.0 / 48.0;
    for (double v : g.samples()) CHECK(v == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("path alignments are monotone and below M") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + trial % 4;
    const auto score = synth::random_score(m, 0.1, rng);
    const double duration = 3.0 + trial;
    const auto warp = synth::Warp::random(duration, m, 2, rng);
    const auto audio = synth::render_audio(score, warp, duration, 0.2, rng);
    const auto r = dtw(score, audio);
    validate_path(r.path, score.rows(), audio.frames());
    const auto g = path_to_alignment(r.path, m, audio.duration());
    double prev = 0.0;
    for (double v : g.samples()) {
      CHECK(v >= prev);
      CHECK(v < m);
      prev = v;
    }
  }
}

TEST_CASE("malformed paths are rejected") {
  CHECK_THROWS(validate_path({{0, 0}, {2, 1}}, 3, 2));
  CHECK_THROWS(validate_path({{0, 0}, {1, 1}}, 3, 2));
  CHECK_THROWS(validate_path({{1, 0}, {2, 1}}, 3, 2));
  CHECK_THROWS(validate_path({{0, 0}, {0, 0}, {1, 1}}, 2, 2));
  CHECK_NOTHROW(validate_path({{0, 0}, {1, 0}, {1, 1}}, 2, 2));
}
