#include "scorealign/project.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace scorealign {
namespace {

std::string read_required(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw MissingInput(path);
  return read_file(path);
}

Json read_json(const fs::path& path) {
  return parse_text(read_required(path), path.filename().string());
}

// Format problems inside a present file are input errors too.
template <typename Fn>
auto as_input_error(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ProjectError&) {
    throw;
  } catch (const FormatError& e) {
    throw ProjectError(kExitInput, e.what());
  } catch (const std::invalid_argument& e) {
    throw ProjectError(kExitInput, e.what());
  } catch (const std::out_of_range& e) {
    throw ProjectError(kExitInput, e.what());
  }
}

std::vector<BoundingBox> boxes_of(const std::vector<MeasureRecord>& measures) {
  std::vector<BoundingBox> out;
  out.reserve(measures.size());
  for (const auto& m : measures) out.push_back(m.box);
  return out;
}

template <typename Fn>
int report(std::ostream& err, Fn&& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const ProjectError& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace

fs::path ProjectPaths::page(int index) const {
  char name[32];
  std::snprintf(name, sizeof name, "%03d.png", index);
  return pages() / name;
}

std::vector<MeasureRecord> load_measures(const ProjectPaths& p) {
  return as_input_error([&] { return measures_from_json(read_json(p.measures())); });
}

PhysicalScore load_physical_score(const ProjectPaths& p) {
  const auto measures = load_measures(p);
  int pages = 0;
  for (const auto& m : measures) pages = std::max(pages, m.box.page + 1);
  while (fs::is_regular_file(p.page(pages))) ++pages;
  std::vector<PageSize> sizes(pages);
  for (int i = 0; i < pages; ++i) {
    if (fs::is_regular_file(p.page(i))) {
      sizes[i] = as_input_error([&] { return png_size(read_file(p.page(i))); });
    }
  }
  return as_input_error([&] { return PhysicalScore(sizes, boxes_of(measures)); });
}

std::vector<JumpLabel> load_jumps(const ProjectPaths& p) {
  if (!fs::exists(p.jumps())) return {};
  return as_input_error([&] { return jumps_from_json(read_json(p.jumps())); });
}

std::string format_violations(const std::vector<JumpViolation>& violations) {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << to_string(v.kind) << ": " << v.message << '\n';
  }
  return out.str();
}

LogicalOrder checked_unroll(int measure_count,
                            const std::vector<JumpLabel>& jumps) {
  const auto violations = validate_jumps(measure_count, jumps);
  if (!violations.empty()) {
    throw ProjectError(kExitValidation,
                       "invalid jumps\n" + format_violations(violations));
  }
  return unroll(measure_count, jumps);
}

AlignInputs load_align_inputs(const ProjectPaths& p, LogicalOrder order,
                              const AlignSettings& settings) {
  AlignInputs in{std::move(order), {}, {}, {}, {}, {}};
  const auto digest = [&](const fs::path& path) {
    const auto bytes = read_required(path);
    in.input_digests[path.filename().string()] = sha256_hex(bytes);
    return bytes;
  };
  const auto digest_json = [&](const fs::path& path) {
    return parse_text(digest(path), path.filename().string());
  };

  as_input_error([&] {
    in.measures = measures_from_json(digest_json(p.measures()));
    in.order.check_against(static_cast<int>(in.measures.size()));
    in.noteheads = noteheads_from_json(digest_json(p.noteheads()));
    if (fs::exists(p.staff_meta())) {
      in.staff_meta = staff_meta_from_json(digest_json(p.staff_meta()));
    }
    in.transcription.onset_probs = decode_jltr(digest(p.onsets())).values;
    switch (settings.variant) {
      case AudioVariant::kFrameProb:
      case AudioVariant::kFramePred:
        in.transcription.frame_probs = decode_jltr(digest(p.frames())).values;
        break;
      case AudioVariant::kMidi: {
        auto notes = notes_from_json(digest_json(p.notes()));
        in.transcription.notes = std::move(notes.notes);
        in.transcription.duration = notes.duration;
        break;
      }
      default:
        break;
    }
    return 0;
  });
  return in;
}

std::vector<int> staves_per_measure(const AlignInputs& inputs) {
  const auto q = inputs.measures.size();
  std::vector<int> from_events(q, 1);
  for (const auto& e : inputs.noteheads) {
    if (e.measure_index >= 0 && static_cast<std::size_t>(e.measure_index) < q) {
      auto& s = from_events[e.measure_index];
      s = std::max(s, e.staff_index + 1);
    }
  }
  std::vector<int> out(q);
  for (std::size_t i = 0; i < q; ++i) {
    if (inputs.measures[i].staves) {
      out[i] = *inputs.measures[i].staves;
    } else if (inputs.staff_meta && i < inputs.staff_meta->size() &&
               !(*inputs.staff_meta)[i].clefs.empty()) {
      out[i] = static_cast<int>((*inputs.staff_meta)[i].clefs.size());
    } else {
      out[i] = from_events[i];
    }
  }
  return out;
}

AlignmentRecord compute_alignment(const AlignInputs& inputs,
                                  const AlignSettings& settings) {
  const auto staves = staves_per_measure(inputs);
  const auto build = as_input_error([&] {
    return build_score_matrix(inputs.noteheads, inputs.order, staves,
                              inputs.staff_meta ? &*inputs.staff_meta : nullptr);
  });
  const auto audio = as_input_error([&] {
    return audio_representation(inputs.transcription, settings.variant,
                                static_cast<float>(settings.threshold));
  });
  if (audio.cols() != kPitchCount) {
    throw ProjectError(kExitInput, "audio features have " +
                                       std::to_string(audio.cols()) +
                                       " columns, expected 88");
  }
  if (audio.frames() == 0) {
    throw ProjectError(kExitInput, "audio features have no frames");
  }

  const auto result = dtw(build.matrix, audio, {settings.threads});
  const int m = inputs.order.size();
  const auto alignment = path_to_alignment(result.path, m, audio.duration());
  const auto logical_boxes = resolve_boxes(inputs.order, boxes_of(inputs.measures));

  AlignmentRecord record;
  record.duration = alignment.duration();
  record.measure_count = m;
  record.logical_order = inputs.order.entries();
  record.dtw_cost = result.cost;
  record.dropped_noteheads = build.dropped;
  record.samples = alignment.samples();
  record.playheads.reserve(record.samples.size());
  for (double s : record.samples) {
    record.playheads.push_back(playhead_from_measure(s, logical_boxes));
  }
  record.provenance.variant = to_string(settings.variant);
  record.provenance.threshold = settings.threshold;
  record.provenance.input_digests = inputs.input_digests;
  return record;
}

Metrics evaluate_project(const ProjectPaths& p) {
  const auto gt_json = read_json(p.ground_truth());
  const auto align_json = read_json(p.alignment());
  return as_input_error([&] {
    const auto boxes = boxes_of(measures_from_json(read_json(p.measures())));
    const auto gt_record = ground_truth_from_json(gt_json);
    const auto est_record = alignment_from_json(align_json);

    const LogicalOrder gt_order(gt_record.logical_order);
    const GroundTruth truth(gt_order, resolve_boxes(gt_order, boxes),
                            gt_record.measure_onsets, gt_record.duration);
    const LogicalOrder est_order(est_record.logical_order);
    const auto est_boxes = resolve_boxes(est_order, boxes);
    const Alignment estimate(est_record.duration, est_record.measure_count,
                             est_record.samples);
    return metrics(EstimatedAlignment{estimate, est_boxes}, truth);
  });
}

int run_unroll(const ProjectPaths& p, std::ostream& out, std::ostream& err) {
  return report(err, [&] {
    const auto measures = load_measures(p);
    const auto order = checked_unroll(static_cast<int>(measures.size()),
                                      load_jumps(p));
    write_file(p.logical_order(), to_text(logical_order_to_json(order)));
    out << "M = " << order.size() << " logical measures from "
        << measures.size() << " physical\n";
  });
}

int run_align(const ProjectPaths& p, const AlignSettings& settings,
              std::ostream& out, std::ostream& err) {
  return report(err, [&] {
    const auto order = as_input_error([&] {
      return logical_order_from_json(read_json(p.logical_order()));
    });
    const auto inputs = load_align_inputs(p, order, settings);
    const auto record = compute_alignment(inputs, settings);
    if (record.dropped_noteheads > 0) {
      err << "warning: dropped " << record.dropped_noteheads
          << " notehead occurrences outside the piano range\n";
    }
    write_file(p.alignment(), to_text(alignment_to_json(record)));
    out << "aligned " << record.measure_count << " measures to "
        << std::fixed << std::setprecision(2) << record.duration
        << " s of audio (" << record.provenance.variant << ")\n";
  });
}

int run_eval(const ProjectPaths& p, std::ostream& out, std::ostream& err) {
  return report(err, [&] {
    const auto m = evaluate_project(p);
    write_file(p.eval(), to_text(metrics_to_json(m)));
    out << std::fixed << std::setprecision(3) << "MAcc " << m.macc << '\n'
        << "MErr " << m.merr << '\n'
        << "MDev " << m.mdev << '\n';
  });
}

}  // namespace scorealign
