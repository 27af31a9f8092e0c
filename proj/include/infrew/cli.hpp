#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "infrew/reductions.hpp"
#include "infrew/spwords.hpp"
#include "infrew/trs.hpp"

namespace infrew {

/// Runs one command line.  Returns 0 on success, 1 on an analysis error
/// (diagnostic on err) and 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// ψ has two normal forms: witnesses toward S^ω and toward P^ω.
struct UnFailureDemo {
  SPWord word;
  SPClassification classification;
  std::vector<WitnessSegment> to_s;
  std::vector<WitnessSegment> to_p;
  /// Every segment is the matching slice of ψ, has sum ±1 and normal form
  /// its letter, and its steps reach that letter.
  bool segments_valid = false;
  /// The unary terms for S^ω and P^ω differ.
  bool targets_distinct = false;
};

UnFailureDemo un_failure_demo(std::size_t segments = kDefaultSegments);

/// Checks one witness segment against the word it was cut from.
bool valid_witness_segment(const SPWord& w, const WitnessSegment& seg);

/// rec s = f(f(s,b),a) under f(x,y) → x reduces in ω steps to f(t,a)-cycles
/// and to f(t,b)-cycles, which have no common reduct.
struct CollapseDemo {
  Trs trs;
  Term source;
  StagedReduction to_a;
  StagedReduction to_b;
  bool distinct = false;
  /// Error code from join_bounded on the two reductions.
  std::string join_error;
};

CollapseDemo collapse_demo();

} // namespace infrew
