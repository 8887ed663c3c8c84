#pragma once

// On-disk formats of a project directory.
//
//   measures.json    [{"page", "x", "y", "w", "h", "staves"?}]  physical order
//   jumps.json       [{"from", "to", "order"}]
//   logical_order.json  [physical index, ...]
//   noteheads.json   [{"measure", "staff", "staff_pos", "x_rel"}]
//   staff_meta.json  [{"clefs": ["treble", ...], "key"}]  one per measure
//   gt.json          {"duration_T", "logical_order", "measure_onsets"}
//   notes.json       {"duration", "notes": [{"onset", "offset", "pitch"}]}
//   onsets.jltr / frames.jltr   binary feature matrices, see below
//   alignment.json / eval.json  outputs
//
// JSON text is always written the same way (two-space indent, keys in a
// fixed order, trailing newline), so rewriting a parsed file reproduces it
// byte for byte.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scorealign/core_model.hpp"
#include "scorealign/eval.hpp"
#include "scorealign/features.hpp"
#include "scorealign/matrix.hpp"

namespace scorealign {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_text(const Json& j);
// Throws FormatError on malformed JSON.
Json parse_text(const std::string& text, const std::string& what);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, const std::string& bytes);

// measures.json

struct MeasureRecord {
  BoundingBox box;
  std::optional<int> staves;
  friend bool operator==(const MeasureRecord&, const MeasureRecord&) = default;
};

Json measures_to_json(const std::vector<MeasureRecord>& measures);
std::vector<MeasureRecord> measures_from_json(const Json& j);

// jumps.json. A missing "order" field defaults to the array position.

Json jumps_to_json(const std::vector<JumpLabel>& jumps);
std::vector<JumpLabel> jumps_from_json(const Json& j);

// logical_order.json

Json logical_order_to_json(const LogicalOrder& order);
LogicalOrder logical_order_from_json(const Json& j);

// noteheads.json / staff_meta.json

Json noteheads_to_json(const std::vector<NoteheadEvent>& events);
std::vector<NoteheadEvent> noteheads_from_json(const Json& j);

Json staff_meta_to_json(const StaffMetadata& meta);
StaffMetadata staff_meta_from_json(const Json& j);

// gt.json

struct GroundTruthRecord {
  double duration = 0.0;
  std::vector<int> logical_order;
  std::vector<double> measure_onsets;
  friend bool operator==(const GroundTruthRecord&,
                         const GroundTruthRecord&) = default;
};

Json ground_truth_to_json(const GroundTruthRecord& gt);
GroundTruthRecord ground_truth_from_json(const Json& j);

// notes.json

struct NotesRecord {
  std::optional<double> duration;
  std::vector<TranscribedNote> notes;
  friend bool operator==(const NotesRecord&, const NotesRecord&) = default;
};

Json notes_to_json(const NotesRecord& notes);
NotesRecord notes_from_json(const Json& j);

// alignment.json

struct Provenance {
  std::string variant;
  double threshold = 0.5;
  // file name -> SHA-256 of its bytes
  std::map<std::string, std::string> input_digests;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct AlignmentRecord {
  double duration = 0.0;
  int measure_count = 0;
  std::vector<int> logical_order;
  double dtw_cost = 0.0;
  std::size_t dropped_noteheads = 0;
  std::vector<double> samples;
  std::vector<ScorePlayhead> playheads;
  Provenance provenance;
  friend bool operator==(const AlignmentRecord&, const AlignmentRecord&) = default;
};

Json alignment_to_json(const AlignmentRecord& a);
AlignmentRecord alignment_from_json(const Json& j);

// eval.json

Json metrics_to_json(const Metrics& m);
Metrics metrics_from_json(const Json& j);

// .jltr feature matrices: "JLTR", u16 version, u32 frame rate, u32 rows,
// u32 cols, then rows * cols float32 values in row-major order. Every
// integer and float is little-endian.

inline constexpr std::uint16_t kJltrVersion = 1;

struct FeatureFile {
  std::uint32_t frame_rate = kAudioFrameRate;
  Matrix<float> values;
  friend bool operator==(const FeatureFile&, const FeatureFile&) = default;
};

std::string encode_jltr(const FeatureFile& file);
// Throws FormatError on bad magic, unknown version or truncated data.
FeatureFile decode_jltr(const std::string& bytes);

FeatureFile read_jltr(const std::filesystem::path& path);
void write_jltr(const std::filesystem::path& path, const FeatureFile& file);

// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

// Width and height from a PNG header. Throws FormatError if the bytes are
// not a PNG.
PageSize png_size(const std::string& bytes);

}  // namespace scorealign
