#include "scorealign/features.hpp"

#include <array>
#include <cmath>

namespace scorealign {
namespace {

// Semitones above C for the letters C D E F G A B.
constexpr std::array<int, 7> kLetterSemitone = {0, 2, 4, 5, 7, 9, 11};

// Letter indices (C = 0) in the order accidentals enter a key signature.
constexpr std::array<int, 7> kSharpOrder = {3, 0, 4, 1, 5, 2, 6};  // F C G D A E B
constexpr std::array<int, 7> kFlatOrder = {6, 2, 5, 1, 4, 0, 3};   // B E A D G C F

struct Anchor {
  int letter;
  int octave;
};

Anchor anchor_for(Clef clef) {
  switch (clef) {
    case Clef::kTreble:
      return {2, 4};  // E4
    case Clef::kBass:
      return {4, 2};  // G2
  }
  return {2, 4};
}

int floor_div(int a, int b) {
  return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
}

int key_adjustment(int letter, int key_signature) {
  if (key_signature > 0) {
    for (int i = 0; i < key_signature; ++i) {
      if (kSharpOrder[i] == letter) return 1;
    }
  } else if (key_signature < 0) {
    for (int i = 0; i < -key_signature; ++i) {
      if (kFlatOrder[i] == letter) return -1;
    }
  }
  return 0;
}

Clef default_clef(int staff_index, int staff_count) {
  if (staff_count == 2 && staff_index == 1) return Clef::kBass;
  return Clef::kTreble;
}

}  // namespace

const char* to_string(Clef clef) {
  return clef == Clef::kBass ? "bass" : "treble";
}

Clef parse_clef(std::string_view name) {
  if (name == "treble") return Clef::kTreble;
  if (name == "bass") return Clef::kBass;
  throw std::invalid_argument("unknown clef '" + std::string(name) + "'");
}

PitchOutOfRange::PitchOutOfRange(int pitch)
    : std::out_of_range("pitch " + std::to_string(pitch) +
                        " outside the piano range [21, 108]"),
      pitch_(pitch) {}

int staff_pos_to_midi(Clef clef, int staff_pos, int key_signature) {
  if (key_signature < -7 || key_signature > 7) {
    throw std::invalid_argument("key signature must be in [-7, 7]");
  }
  const Anchor anchor = anchor_for(clef);
  const int step = anchor.letter + staff_pos;
  const int letter = step - 7 * floor_div(step, 7);
  const int octave = anchor.octave + floor_div(step, 7);
  const int pitch = 12 * (octave + 1) + kLetterSemitone[letter] +
                    key_adjustment(letter, key_signature);
  if (pitch < kLowestPitch || pitch > kHighestPitch) throw PitchOutOfRange(pitch);
  return pitch;
}

ScoreMatrix::ScoreMatrix(int measure_count)
    : measure_count_(measure_count),
      values_(static_cast<std::size_t>(measure_count) * kRowsPerMeasure,
              kPitchCount, 0) {
  if (measure_count < 1) throw std::invalid_argument("score needs M >= 1");
}

ScoreMatrix::ScoreMatrix(int measure_count, Matrix<std::uint8_t> values)
    : measure_count_(measure_count), values_(std::move(values)) {
  if (measure_count < 1) throw std::invalid_argument("score needs M >= 1");
  if (values_.rows() != static_cast<std::size_t>(measure_count) * kRowsPerMeasure ||
      values_.cols() != kPitchCount) {
    throw std::invalid_argument("score matrix must be (48 M) x 88");
  }
  for (auto v : values_.data()) {
    if (v > 1) throw std::invalid_argument("score matrix must be binary");
  }
}

AudioMatrix::AudioMatrix(Matrix<float> values) : values_(std::move(values)) {
  for (float v : values_.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw std::invalid_argument("audio feature value outside [0, 1]");
    }
  }
}

ScoreBuild build_score_matrix(std::span<const NoteheadEvent> events,
                              const LogicalOrder& order,
                              std::span<const int> staves_per_measure,
                              const StaffMetadata* metadata) {
  const int physical_count = static_cast<int>(staves_per_measure.size());
  order.check_against(physical_count);
  if (metadata && static_cast<int>(metadata->size()) != physical_count) {
    throw std::invalid_argument("staff metadata needs one entry per measure");
  }

  // Resolve each event to (row within measure, column) once per physical
  // measure, then stamp it into every logical occurrence.
  struct Cell {
    int row;
    int column;
  };
  std::vector<std::vector<Cell>> cells(physical_count);
  std::vector<std::size_t> dropped_in(physical_count, 0);
  for (const auto& e : events) {
    if (e.measure_index < 0 || e.measure_index >= physical_count) {
      throw std::invalid_argument("notehead references measure " +
                                  std::to_string(e.measure_index));
    }
    if (!(e.x_rel >= 0.0 && e.x_rel < 1.0)) {
      throw std::invalid_argument("notehead x_rel outside [0, 1)");
    }
    if (e.staff_index < 0) throw std::invalid_argument("negative staff index");

    Clef clef = default_clef(e.staff_index, staves_per_measure[e.measure_index]);
    int key = 0;
    if (metadata) {
      const auto& info = (*metadata)[e.measure_index];
      if (e.staff_index < static_cast<int>(info.clefs.size())) {
        clef = info.clefs[e.staff_index];
      }
      key = info.key_signature;
    }
    try {
      const int pitch = staff_pos_to_midi(clef, e.staff_pos, key);
      const int row = static_cast<int>(std::floor(e.x_rel * kRowsPerMeasure));
      cells[e.measure_index].push_back({row, pitch - kLowestPitch});
    } catch (const PitchOutOfRange&) {
      ++dropped_in[e.measure_index];
    }
  }

  ScoreBuild build{ScoreMatrix(order.size())};
  Matrix<std::uint8_t> values(build.matrix.rows(), kPitchCount, 0);
  for (int k = 0; k < order.size(); ++k) {
    const int physical = order[k];
    build.dropped += dropped_in[physical];
    for (const auto& c : cells[physical]) {
      auto& v = values(static_cast<std::size_t>(k) * kRowsPerMeasure + c.row,
                       c.column);
      if (v) {
        ++build.collisions;
      } else {
        v = 1;
        ++build.placed;
      }
    }
  }
  build.matrix = ScoreMatrix(order.size(), std::move(values));
  return build;
}

const char* to_string(AudioVariant variant) {
  switch (variant) {
    case AudioVariant::kOnsetProb:
      return "onset_prob";
    case AudioVariant::kOnsetPred:
      return "onset_pred";
    case AudioVariant::kFrameProb:
      return "frame_prob";
    case AudioVariant::kFramePred:
      return "frame_pred";
    case AudioVariant::kMidi:
      return "midi";
  }
  return "unknown";
}

AudioVariant parse_audio_variant(std::string_view name) {
  for (auto v : {AudioVariant::kOnsetProb, AudioVariant::kOnsetPred,
                 AudioVariant::kFrameProb, AudioVariant::kFramePred,
                 AudioVariant::kMidi}) {
    if (name == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown audio variant '" + std::string(name) +
                              "'");
}

Matrix<float> threshold_matrix(const Matrix<float>& values, float threshold) {
  Matrix<float> out(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.data().size(); ++i) {
    out.data()[i] = values.data()[i] >= threshold ? 1.0f : 0.0f;
  }
  return out;
}

AudioMatrix audio_representation(const TranscriptionBundle& bundle,
                                 AudioVariant variant, float threshold) {
  const auto require = [](const std::optional<Matrix<float>>& m,
                          const char* what) -> const Matrix<float>& {
    if (!m) {
      throw std::invalid_argument(std::string("transcription lacks ") + what);
    }
    if (m->cols() != kPitchCount) {
      throw std::invalid_argument(std::string(what) + " must have 88 columns");
    }
    return *m;
  };

  switch (variant) {
    case AudioVariant::kOnsetProb:
      return AudioMatrix(require(bundle.onset_probs, "onset probabilities"));
    case AudioVariant::kOnsetPred:
      return AudioMatrix(threshold_matrix(
          require(bundle.onset_probs, "onset probabilities"), threshold));
    case AudioVariant::kFrameProb:
      return AudioMatrix(require(bundle.frame_probs, "frame probabilities"));
    case AudioVariant::kFramePred:
      return AudioMatrix(threshold_matrix(
          require(bundle.frame_probs, "frame probabilities"), threshold));
    case AudioVariant::kMidi:
      break;
  }

  if (!bundle.notes) throw std::invalid_argument("transcription lacks notes");
  std::size_t frames = 0;
  if (bundle.duration) {
    if (!(*bundle.duration > 0.0)) {
      throw std::invalid_argument("duration must be > 0");
    }
    frames = static_cast<std::size_t>(
        std::ceil(*bundle.duration * kAudioFrameRate - 1e-9));
  } else if (bundle.onset_probs) {
    frames = bundle.onset_probs->rows();
  } else if (bundle.frame_probs) {
    frames = bundle.frame_probs->rows();
  } else {
    throw std::invalid_argument("MIDI roll needs a duration or a frame matrix");
  }

  Matrix<float> roll(frames, kPitchCount, 0.0f);
  for (const auto& note : *bundle.notes) {
    if (note.pitch < kLowestPitch || note.pitch > kHighestPitch) {
      throw PitchOutOfRange(note.pitch);
    }
    // Start one frame early so rounding in onset * 31 cannot skip a frame.
    const auto first = static_cast<long>(
        std::max(0.0, std::floor(note.onset * kAudioFrameRate) - 1.0));
    for (auto k = static_cast<std::size_t>(first); k < frames; ++k) {
      const double center = static_cast<double>(k) / kAudioFrameRate;
      if (center >= note.offset) break;
      if (center >= note.onset) roll(k, note.pitch - kLowestPitch) = 1.0f;
    }
  }
  return AudioMatrix(std::move(roll));
}

}  // namespace scorealign
