#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <sstream>

#include "fixture.hpp"
#include "oracles.hpp"

using namespace scorealign;

namespace {

struct CliResult {
  int code = -1;
  std::string output;
};

// Runs the command-line tool; stdout and stderr are merged.
CliResult cli(const std::string& args) {
  const std::string command = std::string(SCOREALIGN_CLI) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  std::size_t n = 0;
  while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) r.output.append(buffer, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string project_arg(const ProjectPaths& p) {
  return "--project '" + p.dir.string() + "'";
}

void write_jumps(const ProjectPaths& p, const std::string& json) {
  write_file(p.jumps(), json);
}

LogicalOrder read_order(const ProjectPaths& p) {
  return logical_order_from_json(parse_text(read_file(p.logical_order()), "order"));
}

}  // namespace

TEST_CASE("unroll writes the repeated order") {
  fixture::TempDir dir;
  const auto p = fixture::score_project(dir.path(), 4);
  write_jumps(p, R"([{"from": 3, "to": 0, "order": 0}])");
  const auto r = cli("unroll " + project_arg(p));
  CHECK(r.code == 0);
  CHECK(read_order(p).entries() == std::vector<int>{0, 1, 2, 3, 0, 1, 2, 3});
}

TEST_CASE("unroll without jumps.json gives the identity order") {
  fixture::TempDir dir;
  const auto p = fixture::score_project(dir.path(), 3);
  CHECK(cli("unroll " + project_arg(p)).code == 0);
  CHECK(read_order(p).entries() == std::vector<int>{0, 1, 2});
}

TEST_CASE("unroll rejects an out-of-range jump and names it") {
  fixture::TempDir dir;
  const auto p = fixture::score_project(dir.path(), 4);
  write_jumps(p, R"([{"from": 9, "to": 0, "order": 0}])");
  const auto r = cli("unroll " + project_arg(p));
  CHECK(r.code == 2);
  CHECK(r.output.find("9 -> 0") != std::string::npos);
  CHECK_FALSE(fs::exists(p.logical_order()));
}

TEST_CASE("unroll reports unreachable jumps with exit 2") {
  fixture::TempDir dir;
  const auto p = fixture::score_project(dir.path(), 6);
  write_jumps(p, R"([{"from": 3, "to": 5, "order": 0}, {"from": 4, "to": 0, "order": 1}])");
  const auto r = cli("unroll " + project_arg(p));
  CHECK(r.code == 2);
  CHECK(r.output.find("unreachable") != std::string::npos);
}

TEST_CASE("unroll without measures.json is an input error") {
  fixture::TempDir dir;
  const auto r = cli("unroll --project '" + dir.path().string() + "'");
  CHECK(r.code == 1);
  CHECK(r.output.find("measures.json") != std::string::npos);
}

TEST_CASE("malformed jumps.json is an input error") {
  fixture::TempDir dir;
  const auto p = fixture::score_project(dir.path(), 4);
  write_jumps(p, "[{\"from\": 3");
  CHECK(cli("unroll " + project_arg(p)).code == 1);
}

TEST_CASE("self-alignment recovers its own construction") {
  fixture::TempDir dir;
  const auto piece = fixture::self_aligned_project(dir.path(), 6, 12.0, 42);
  const auto& p = piece.paths;
  REQUIRE(cli("unroll " + project_arg(p)).code == 0);
  const auto aligned = cli("align " + project_arg(p));
  REQUIRE(aligned.code == 0);

  const auto record = alignment_from_json(parse_text(read_file(p.alignment()), "a"));
  CHECK(record.measure_count == 6);
  CHECK(record.samples.size() == 1200);
  CHECK(record.playheads.size() == record.samples.size());
  CHECK(record.provenance.variant == "onset_prob");
  CHECK(record.provenance.input_digests.at("onsets.jltr") ==
        sha256_hex(read_file(p.onsets())));

  const auto eval = cli("eval " + project_arg(p));
  CHECK(eval.code == 0);
  CHECK(eval.output.find("MAcc 1.000") != std::string::npos);
  const auto m = metrics_from_json(parse_text(read_file(p.eval()), "eval"));
  CHECK(m.macc == 1.0);
  CHECK(m.samples == 1200);
}

TEST_CASE("align output is identical across runs and thread counts") {
  fixture::TempDir dir;
  const auto piece = fixture::self_aligned_project(dir.path(), 5, 10.0, 7);
  const auto& p = piece.paths;
  REQUIRE(cli("unroll " + project_arg(p)).code == 0);
  REQUIRE(cli("align " + project_arg(p)).code == 0);
  const auto first = read_file(p.alignment());
  REQUIRE(cli("align --threads 3 " + project_arg(p)).code == 0);
  CHECK(read_file(p.alignment()) == first);
}

TEST_CASE("threshold and variant are recorded in provenance") {
  fixture::TempDir dir;
  const auto piece = fixture::self_aligned_project(dir.path(), 4, 8.0, 3);
  const auto& p = piece.paths;
  REQUIRE(cli("unroll " + project_arg(p)).code == 0);
  REQUIRE(cli("align --variant onset_pred --threshold 0.6 " + project_arg(p)).code == 0);
  const auto j = parse_text(read_file(p.alignment()), "a");
  CHECK(j["provenance"]["variant"] == "onset_pred");
  CHECK(j["provenance"]["threshold"] == 0.6);
  CHECK(cli("align --threshold 1.5 " + project_arg(p)).code != 0);
  CHECK(cli("align --variant spectrogram " + project_arg(p)).code != 0);
}

TEST_CASE("align input errors exit 1") {
  fixture::TempDir dir;
  const auto piece = fixture::self_aligned_project(dir.path(), 4, 8.0, 3);
  const auto& p = piece.paths;
  REQUIRE(cli("unroll " + project_arg(p)).code == 0);

  SUBCASE("frame variants need frames.jltr") {
    const auto r = cli("align --variant frame_prob " + project_arg(p));
    CHECK(r.code == 1);
    CHECK(r.output.find("frames.jltr") != std::string::npos);
  }
  SUBCASE("midi needs notes.json") {
    const auto r = cli("align --variant midi " + project_arg(p));
    CHECK(r.code == 1);
    CHECK(r.output.find("notes.json") != std::string::npos);
  }
  SUBCASE("missing onsets") {
    fs::remove(p.onsets());
    const auto r = cli("align " + project_arg(p));
    CHECK(r.code == 1);
    CHECK(r.output.find("onsets.jltr") != std::string::npos);
  }
  SUBCASE("wrong column count") {
    write_jltr(p.onsets(), FeatureFile{31, Matrix<float>(10, 80, 0.0f)});
    const auto r = cli("align " + project_arg(p));
    CHECK(r.code == 1);
    CHECK(r.output.find("88") != std::string::npos);
  }
  SUBCASE("missing logical order") {
    fs::remove(p.logical_order());
    CHECK(cli("align " + project_arg(p)).code == 1);
  }
}

TEST_CASE("other audio variants align from their own files") {
  fixture::TempDir dir;
  const auto piece = fixture::self_aligned_project(dir.path(), 4, 8.0, 11);
  const auto& p = piece.paths;
  REQUIRE(cli("unroll " + project_arg(p)).code == 0);
  write_file(p.frames(), read_file(p.onsets()));

  // One note per measure.
  const auto onsets = read_jltr(p.onsets()).values;
  NotesRecord notes;
  notes.duration = piece.duration;
  for (int k = 0; k < piece.measures; ++k) {
    const double start = piece.duration * k / piece.measures;
    notes.notes.push_back({start, start + 0.5, 60 + k});
  }
  write_file(p.notes(), to_text(notes_to_json(notes)));

  for (const char* v : {"frame_prob", "frame_pred", "midi"}) {
    CAPTURE(v);
    REQUIRE(cli(std::string("align --variant ") + v + " " + project_arg(p)).code == 0);
    const auto record = alignment_from_json(parse_text(read_file(p.alignment()), "a"));
    CHECK(record.provenance.variant == v);
    CHECK(record.provenance.input_digests.count(v[0] == 'm' ? "notes.json"
                                                            : "frames.jltr") == 1);
  }
  CHECK(onsets.rows() == 248);
}

TEST_CASE("eval prints exact scores for ground-truth-derived alignments") {
  fixture::TempDir dir;
  const auto p = fixture::score_project(dir.path(), 4);
  GroundTruthRecord gt{3.0, {0, 1, 2, 3}, {0.0, 1.0, 2.0, 2.995}};
  write_file(p.ground_truth(), to_text(ground_truth_to_json(gt)));

  std::vector<BoundingBox> boxes;
  for (const auto& m : load_measures(p)) boxes.push_back(m.box);
  const LogicalOrder order(gt.logical_order);
  const GroundTruth truth(order, resolve_boxes(order, boxes), gt.measure_onsets,
                          gt.duration);

  const auto write_estimate = [&](double offset) {
    const auto a = Alignment::sample(3.0, 4, [&](double t) { return truth.at(t) + offset; });
    AlignmentRecord record;
    record.duration = a.duration();
    record.measure_count = 4;
    record.logical_order = gt.logical_order;
    record.samples = a.samples();
    for (double s : a.samples()) {
      record.playheads.push_back(playhead_from_measure(s, order, boxes));
    }
    record.provenance.variant = "onset_prob";
    write_file(p.alignment(), to_text(alignment_to_json(record)));
  };

  write_estimate(0.0);
  auto r = cli("eval " + project_arg(p));
  CHECK(r.code == 0);
  CHECK(r.output == "MAcc 1.000\nMErr 0.000\nMDev 0.000\n");

  write_estimate(1.0);
  r = cli("eval " + project_arg(p));
  CHECK(r.code == 0);
  CHECK(r.output == "MAcc 0.000\nMErr 1.000\nMDev 1.000\n");

  fs::remove(p.ground_truth());
  r = cli("eval " + project_arg(p));
  CHECK(r.code == 1);
  CHECK(r.output.find("gt.json") != std::string::npos);
}

TEST_CASE("eval matches a direct reimplementation on mixed offsets") {
  fixture::TempDir dir;
  const auto p = fixture::score_project(dir.path(), 4);
  GroundTruthRecord gt{7.3, {0, 1, 2, 3, 1}, {0.2, 1.5, 2.9, 4.0, 5.6}};
  write_file(p.ground_truth(), to_text(ground_truth_to_json(gt)));

  std::vector<BoundingBox> boxes;
  for (const auto& m : load_measures(p)) boxes.push_back(m.box);
  const LogicalOrder order(gt.logical_order);
  const GroundTruth truth(order, resolve_boxes(order, boxes), gt.measure_onsets,
                          gt.duration);
  const auto offset = [](double t) { return 0.3 * std::sin(t) + (t > 3.0 ? 0.4 : 0.0); };
  const auto a = Alignment::sample(7.3, 5, [&](double t) { return truth.at(t) + offset(t); });
  AlignmentRecord record;
  record.duration = a.duration();
  record.measure_count = 5;
  record.logical_order = gt.logical_order;
  record.samples = a.samples();
  for (double s : a.samples()) record.playheads.push_back(playhead_from_measure(s, order, boxes));
  record.provenance.variant = "onset_prob";
  write_file(p.alignment(), to_text(alignment_to_json(record)));

  // Independent path: linear interpolation of the stored 100 Hz samples,
  // minus the interpolated ground truth, at t = i / 100.
  const auto samples = a.samples();
  const auto est_at = [&](double t) {
    const double pos = t * 100.0;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= samples.size()) return samples.back();
    const double f = pos - static_cast<double>(i);
    return samples[i] + f * (samples[i + 1] - samples[i]);
  };
  const auto gt_at = [&](double t) {
    const auto& on = gt.measure_onsets;
    if (t <= on[0]) return 0.0;
    for (std::size_t k = 0; k + 1 < on.size(); ++k) {
      if (t < on[k + 1]) return k + (t - on[k]) / (on[k + 1] - on[k]);
    }
    const double k = static_cast<double>(on.size() - 1);
    return k + (t - on.back()) / (gt.duration - on.back());
  };
  const auto want = oracle::plain_metrics(7.3, [&](double t) { return est_at(t) - gt_at(t); });

  REQUIRE(cli("eval " + project_arg(p)).code == 0);
  const auto got = metrics_from_json(parse_text(read_file(p.eval()), "eval"));
  CHECK(got.samples == 730);
  CHECK(got.macc == doctest::Approx(want.macc).epsilon(1e-9));
  CHECK(got.merr == doctest::Approx(want.merr).epsilon(1e-9));
  CHECK(got.mdev == doctest::Approx(want.mdev).epsilon(1e-9));
}

TEST_CASE("staves per measure prefers the explicit field") {
  AlignInputs in{LogicalOrder({0, 1, 2})};
  in.measures = {{{0, 0.1, 0.1, 0.1, 0.1}, 2}, {{0, 0.1, 0.1, 0.3, 0.1}, {}},
                 {{0, 0.1, 0.1, 0.5, 0.1}, {}}};
  in.noteheads = {{1, 2, 0, 0.0}, {2, 0, 0, 0.0}};
  CHECK(staves_per_measure(in) == std::vector<int>{2, 3, 1});
  in.staff_meta = StaffMetadata{{{Clef::kTreble}, 0}, {{Clef::kTreble, Clef::kBass}, 0},
                                {{}, 0}};
  CHECK(staves_per_measure(in) == std::vector<int>{2, 2, 1});
}

TEST_CASE("the command line requires a project and one subcommand") {
  CHECK(cli("unroll").code != 0);
  CHECK(cli("--project /tmp").code != 0);
  CHECK(cli("--help").code == 0);
}
