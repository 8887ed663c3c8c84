#pragma once

// Project directory pipeline: unroll, align and eval over the files
// described in formats.hpp. The CLI and the HTTP service both go through
// these functions.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scorealign/align.hpp"
#include "scorealign/formats.hpp"
#include "scorealign/jump_unroll.hpp"

namespace scorealign {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitValidation = 2 };

// Failure with the exit code the CLI should report.
class ProjectError : public std::runtime_error {
 public:
  ProjectError(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

class MissingInput : public ProjectError {
 public:
  explicit MissingInput(const fs::path& file)
      : ProjectError(kExitInput, "missing required file " + file.string()),
        file_(file.filename().string()) {}
  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

struct ProjectPaths {
  fs::path dir;

  fs::path pages() const { return dir / "pages"; }
  fs::path page(int index) const;
  fs::path measures() const { return dir / "measures.json"; }
  fs::path jumps() const { return dir / "jumps.json"; }
  fs::path logical_order() const { return dir / "logical_order.json"; }
  fs::path noteheads() const { return dir / "noteheads.json"; }
  fs::path staff_meta() const { return dir / "staff_meta.json"; }
  fs::path onsets() const { return dir / "onsets.jltr"; }
  fs::path frames() const { return dir / "frames.jltr"; }
  fs::path notes() const { return dir / "notes.json"; }
  fs::path ground_truth() const { return dir / "gt.json"; }
  fs::path alignment() const { return dir / "alignment.json"; }
  fs::path eval() const { return dir / "eval.json"; }
};

std::vector<MeasureRecord> load_measures(const ProjectPaths& p);
// Page sizes from pages/NNN.png. Without page images, one unknown-size page
// per page index referenced by the measures.
PhysicalScore load_physical_score(const ProjectPaths& p);
// A missing jumps.json is an empty list.
std::vector<JumpLabel> load_jumps(const ProjectPaths& p);

// Throws ProjectError(kExitValidation) with one line per violation.
LogicalOrder checked_unroll(int measure_count,
                            const std::vector<JumpLabel>& jumps);

std::string format_violations(const std::vector<JumpViolation>& violations);

struct AlignSettings {
  AudioVariant variant = AudioVariant::kOnsetProb;
  double threshold = kDefaultThreshold;
  unsigned threads = 1;
};

// Everything an alignment run reads, loaded up front so that a run works on
// a consistent snapshot of the project.
struct AlignInputs {
  LogicalOrder order;
  std::vector<MeasureRecord> measures;
  std::vector<NoteheadEvent> noteheads;
  std::optional<StaffMetadata> staff_meta;
  TranscriptionBundle transcription;
  std::map<std::string, std::string> input_digests;
};

// Reads the inputs for `settings` with the given logical order. Throws
// MissingInput for absent files and ProjectError for malformed ones.
AlignInputs load_align_inputs(const ProjectPaths& p, LogicalOrder order,
                              const AlignSettings& settings);

// Staves per physical measure: the "staves" field of measures.json, else the
// clef count from staff metadata, else one more than the highest staff index
// seen among the measure's noteheads (at least one).
std::vector<int> staves_per_measure(const AlignInputs& inputs);

AlignmentRecord compute_alignment(const AlignInputs& inputs,
                                  const AlignSettings& settings);

Metrics evaluate_project(const ProjectPaths& p);

// CLI entry points. Diagnostics go to err, results to out.
int run_unroll(const ProjectPaths& p, std::ostream& out, std::ostream& err);
int run_align(const ProjectPaths& p, const AlignSettings& settings,
              std::ostream& out, std::ostream& err);
int run_eval(const ProjectPaths& p, std::ostream& out, std::ostream& err);

}  // namespace scorealign
