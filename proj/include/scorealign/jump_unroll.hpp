#pragma once

// Unrolling of human jump labels into a logical measure order.
//
// A jump (from -> to) means "after playing measure `from`, play `to` next".
// Jumps fire strictly in annotation order and each fires exactly once, so a
// later label cannot fire before an earlier one. This is what disambiguates
// voltas: for a repeat with first ending 4 and second ending 5 the labels are
// (4 -> 0) then (3 -> 5). Nested or overlapping repeats work the same way as
// long as they are labeled in the order a performer meets them. A passage
// played three times needs two separate labels.

#include <stdexcept>
#include <string>
#include <vector>

#include "scorealign/core_model.hpp"

namespace scorealign {

class UnreachableJumpError : public std::runtime_error {
 public:
  UnreachableJumpError(JumpLabel jump, const std::string& what)
      : std::runtime_error(what), jump_(jump) {}
  const JumpLabel& jump() const { return jump_; }

 private:
  JumpLabel jump_;
};

// Returns the jumps sorted by their order field.
std::vector<JumpLabel> in_annotation_order(std::vector<JumpLabel> jumps);

// Throws std::invalid_argument on malformed labels (see validate_jumps) and
// UnreachableJumpError if some label never fires.
LogicalOrder unroll(int measure_count, const std::vector<JumpLabel>& jumps);

enum class ViolationKind {
  kOutOfRange,
  kSelfJump,
  kDuplicateOrder,
  kNonContiguousOrder,
  kUnreachable,
};

const char* to_string(ViolationKind kind);

struct JumpViolation {
  ViolationKind kind;
  // Index into the list as given; -1 for list-level problems.
  int position = -1;
  JumpLabel jump;
  std::string message;
};

// Never throws. An empty result means unroll() succeeds on the same input.
std::vector<JumpViolation> validate_jumps(int measure_count,
                                          const std::vector<JumpLabel>& jumps);

}  // namespace scorealign
