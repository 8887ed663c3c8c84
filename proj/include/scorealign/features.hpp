#pragma once

// Piano-roll feature matrices for both sides of the alignment.
//
// Score side: a binary (48 M) x 88 matrix, one 48-row block per logical
// measure. Row 48 k + floor(48 x_rel) of block k holds the noteheads of
// logical measure k, columns are MIDI pitches 21 (A0) .. 108 (C8).
//
// Audio side: a [0, 1]-valued F x 88 matrix at 31 frames per second taken
// from a transcription model's outputs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scorealign/core_model.hpp"
#include "scorealign/matrix.hpp"

namespace scorealign {

inline constexpr int kRowsPerMeasure = 48;
inline constexpr int kPitchCount = 88;
inline constexpr int kLowestPitch = 21;
inline constexpr int kHighestPitch = kLowestPitch + kPitchCount - 1;
inline constexpr int kAudioFrameRate = 31;

enum class Clef { kTreble, kBass };

const char* to_string(Clef clef);
Clef parse_clef(std::string_view name);

class PitchOutOfRange : public std::out_of_range {
 public:
  explicit PitchOutOfRange(int pitch);
  int pitch() const { return pitch_; }

 private:
  int pitch_;
};

// staff_pos counts lines and spaces upward from the bottom staff line (0).
// Treble puts E4 on the bottom line, bass puts G2 there. A key signature of
// +k sharpens the first k of F C G D A E B, -k flattens the first k of
// B E A D G C F. Throws PitchOutOfRange outside the piano range and
// std::invalid_argument if |key_signature| > 7.
int staff_pos_to_midi(Clef clef, int staff_pos, int key_signature);

struct NoteheadEvent {
  int measure_index = 0;
  int staff_index = 0;  // 0 is the top staff of the system
  int staff_pos = 0;
  double x_rel = 0.0;   // position within the measure width, in [0, 1)

  friend bool operator==(const NoteheadEvent&, const NoteheadEvent&) = default;
};

struct MeasureStaffInfo {
  std::vector<Clef> clefs;  // one per staff, top to bottom
  int key_signature = 0;

  friend bool operator==(const MeasureStaffInfo&,
                         const MeasureStaffInfo&) = default;
};

// One entry per physical measure.
using StaffMetadata = std::vector<MeasureStaffInfo>;

class ScoreMatrix {
 public:
  explicit ScoreMatrix(int measure_count);
  ScoreMatrix(int measure_count, Matrix<std::uint8_t> values);

  int measure_count() const { return measure_count_; }
  std::size_t rows() const { return values_.rows(); }
  std::size_t cols() const { return values_.cols(); }
  const Matrix<std::uint8_t>& values() const { return values_; }
  void set(std::size_t row, int pitch_column) { values_(row, pitch_column) = 1; }

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  int measure_count_;
  Matrix<std::uint8_t> values_;
};

class AudioMatrix {
 public:
  // Throws std::invalid_argument if any value lies outside [0, 1].
  explicit AudioMatrix(Matrix<float> values);

  std::size_t frames() const { return values_.rows(); }
  std::size_t cols() const { return values_.cols(); }
  double frame_rate() const { return kAudioFrameRate; }
  double duration() const {
    return static_cast<double>(frames()) / kAudioFrameRate;
  }
  const Matrix<float>& values() const { return values_; }

 private:
  Matrix<float> values_;
};

struct ScoreBuild {
  ScoreMatrix matrix;
  std::size_t placed = 0;      // cells set, counted per logical occurrence
  std::size_t collisions = 0;  // events landing on an already-set cell
  std::size_t dropped = 0;     // events whose pitch left the piano range
};

// staves_per_measure has one entry per physical measure and fixes Q. Without
// metadata a two-staff measure reads treble over bass, anything else is all
// treble, and the key is C major.
ScoreBuild build_score_matrix(std::span<const NoteheadEvent> events,
                              const LogicalOrder& order,
                              std::span<const int> staves_per_measure,
                              const StaffMetadata* metadata = nullptr);

enum class AudioVariant { kOnsetProb, kOnsetPred, kFrameProb, kFramePred, kMidi };

const char* to_string(AudioVariant variant);
// Throws std::invalid_argument for unknown names.
AudioVariant parse_audio_variant(std::string_view name);

struct TranscribedNote {
  double onset = 0.0;
  double offset = 0.0;
  int pitch = 60;

  friend bool operator==(const TranscribedNote&, const TranscribedNote&) = default;
};

// Everything a transcription model run can hand us. Only the parts needed by
// the requested variant have to be present.
struct TranscriptionBundle {
  std::optional<Matrix<float>> onset_probs;
  std::optional<Matrix<float>> frame_probs;
  std::optional<std::vector<TranscribedNote>> notes;
  // Recording length; used to size the MIDI roll when no matrix is present.
  std::optional<double> duration;
};

inline constexpr float kDefaultThreshold = 0.5f;

// Prediction variants binarize with v >= threshold. The MIDI variant lights
// frame k of a note when k / 31 lies in [onset, offset). Throws
// std::invalid_argument when the bundle lacks what the variant needs.
AudioMatrix audio_representation(const TranscriptionBundle& bundle,
                                 AudioVariant variant,
                                 float threshold = kDefaultThreshold);

// Copy with v >= threshold mapped to 1 and everything else to 0.
Matrix<float> threshold_matrix(const Matrix<float>& values, float threshold);

}  // namespace scorealign
