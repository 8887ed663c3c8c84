#include "scorealign/jump_unroll.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace scorealign {
namespace {

std::string describe(const JumpLabel& j) {
  return "jump #" + std::to_string(j.order) + " (" +
         std::to_string(j.from_index) + " -> " + std::to_string(j.to_index) +
         ")";
}

std::vector<JumpViolation> structural_violations(
    int measure_count, const std::vector<JumpLabel>& jumps) {
  std::vector<JumpViolation> out;
  if (measure_count < 1) {
    out.push_back({ViolationKind::kOutOfRange, -1, {},
                   "score must have at least one measure"});
    return out;
  }
  std::map<int, int> first_with_order;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const auto& j = jumps[i];
    const int pos = static_cast<int>(i);
    const auto valid = [&](int idx) { return idx >= 0 && idx < measure_count; };
    if (!valid(j.from_index) || !valid(j.to_index)) {
      out.push_back({ViolationKind::kOutOfRange, pos, j,
                     describe(j) + " references a measure outside [0, " +
                         std::to_string(measure_count) + ")"});
    }
    if (j.from_index == j.to_index) {
      out.push_back({ViolationKind::kSelfJump, pos, j,
                     describe(j) + " jumps from a measure to itself"});
    }
    auto [it, inserted] = first_with_order.emplace(j.order, pos);
    if (!inserted) {
      out.push_back({ViolationKind::kDuplicateOrder, pos, j,
                     describe(j) + " reuses order " + std::to_string(j.order) +
                         " of position " + std::to_string(it->second)});
    }
  }
  if (first_with_order.size() == jumps.size()) {
    int expected = 0;
    for (const auto& [order, pos] : first_with_order) {
      if (order != expected) {
        out.push_back({ViolationKind::kNonContiguousOrder, pos, jumps[pos],
                       "jump orders must be 0.." +
                           std::to_string(jumps.size() - 1) + ", found " +
                           std::to_string(order)});
        break;
      }
      ++expected;
    }
  }
  return out;
}

struct Traversal {
  std::vector<int> entries;
  // First label that never fired, if any.
  std::optional<JumpLabel> unfired;
};

// Jumps must already be sorted and structurally valid.
Traversal traverse(int measure_count, const std::vector<JumpLabel>& sorted) {
  const std::size_t limit =
      static_cast<std::size_t>(measure_count) * (sorted.size() + 1);
  Traversal t;
  t.entries.reserve(static_cast<std::size_t>(measure_count));
  std::size_t next = 0;
  int current = 0;
  while (current < measure_count) {
    t.entries.push_back(current);
    if (next < sorted.size() && sorted[next].from_index == current) {
      current = sorted[next].to_index;
      ++next;
    } else {
      ++current;
    }
    // Each label fires at most once and between firings the cursor only
    // moves forward, so the traversal cannot exceed Q * (jumps + 1).
    if (t.entries.size() > limit) {
      throw std::logic_error("unroll exceeded Q * (jumps + 1) entries");
    }
  }
  if (next < sorted.size()) t.unfired = sorted[next];
  return t;
}

}  // namespace

std::vector<JumpLabel> in_annotation_order(std::vector<JumpLabel> jumps) {
  std::stable_sort(jumps.begin(), jumps.end(),
                   [](const JumpLabel& a, const JumpLabel& b) {
                     return a.order < b.order;
                   });
  return jumps;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kOutOfRange:
      return "out_of_range";
    case ViolationKind::kSelfJump:
      return "self_jump";
    case ViolationKind::kDuplicateOrder:
      return "duplicate_order";
    case ViolationKind::kNonContiguousOrder:
      return "non_contiguous_order";
    case ViolationKind::kUnreachable:
      return "unreachable";
  }
  return "unknown";
}

std::vector<JumpViolation> validate_jumps(int measure_count,
                                          const std::vector<JumpLabel>& jumps) {
  auto out = structural_violations(measure_count, jumps);
  if (!out.empty()) return out;

  const auto sorted = in_annotation_order(jumps);
  const auto t = traverse(measure_count, sorted);
  if (t.unfired) {
    const auto pos = std::find(jumps.begin(), jumps.end(), *t.unfired);
    out.push_back({ViolationKind::kUnreachable,
                   static_cast<int>(pos - jumps.begin()), *t.unfired,
                   describe(*t.unfired) +
                       " never fires: measure " +
                       std::to_string(t.unfired->from_index) +
                       " is not reached after the earlier jumps"});
  }
  return out;
}

LogicalOrder unroll(int measure_count, const std::vector<JumpLabel>& jumps) {
  const auto problems = structural_violations(measure_count, jumps);
  if (!problems.empty()) throw std::invalid_argument(problems.front().message);

  const auto t = traverse(measure_count, in_annotation_order(jumps));
  if (t.unfired) {
    throw UnreachableJumpError(
        *t.unfired, describe(*t.unfired) + " is unreachable: measure " +
                        std::to_string(t.unfired->from_index) +
                        " is never visited while it is the next jump");
  }
  return LogicalOrder(t.entries);
}

}  // namespace scorealign
