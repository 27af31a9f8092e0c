#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infrew/defaults.hpp"
#include "infrew/term.hpp"

namespace infrew {

/// Letter `c` repeated a + b·k times in super-block k.
struct AffineBlock {
  char letter = 'S';
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

/// A finitely described word over {P, S}: a finite prefix followed by
/// nothing, a repeated period, or cycles of affine blocks.
class SPWord {
public:
  enum class Tail { FiniteOnly, Periodic, AffineBlocks };

  static SPWord finite(std::string word);
  /// Throws invalid-word for an empty period.
  static SPWord periodic(std::string prefix, std::string period);
  /// Throws invalid-word when every block is empty in every cycle.
  static SPWord affine(std::string prefix, std::vector<AffineBlock> blocks);

  Tail tail() const { return tail_; }
  bool infinite() const { return tail_ != Tail::FiniteOnly; }
  const std::string& prefix() const { return prefix_; }
  const std::string& period() const { return period_; }
  const std::vector<AffineBlock>& blocks() const { return blocks_; }
  /// Length of a finite word.
  std::size_t length() const { return prefix_.size(); }

  /// The i-th letter, 1-based.  Throws precondition past the end of a finite word.
  char at(std::size_t i) const;
  /// First n letters (fewer for a short finite word).
  std::string take(std::size_t n) const;

  /// In the input syntax: `prefix="S"; blocks=[(S,1,1),(P,1,1)]`.
  std::string str() const;

private:
  Tail tail_ = Tail::FiniteOnly;
  std::string prefix_;
  std::string period_;
  std::vector<AffineBlock> blocks_;
};

/// A builtin name (`psi`, `zeta`, `xi`, `xi_prime`, `s_omega`, `p_omega`,
/// `ssp_omega`), a bare finite word such as `PSS`, or
/// `prefix="PS"; periodic="SP"` / `prefix="S"; blocks=[(P,1,2),(S,2,2)]`.
/// Throws invalid-word.
SPWord parse_spword(std::string_view text);
SPWord builtin_spword(std::string_view name);
std::vector<std::string> builtin_spword_names();

/// Sum of the letters up to depth n, S counting +1 and P counting −1.
/// Throws precondition when n exceeds a finite word.
std::int64_t sp_sum(const SPWord& w, std::size_t n);
/// Sum of a whole finite word.
std::int64_t sp_sum(std::string_view word);

/// ‖w‖_S or ‖w‖_P; nullopt stands for ∞.
using Norm = std::optional<std::uint64_t>;
std::string norm_str(const Norm& n);

Norm s_norm(const SPWord& w);
Norm p_norm(const SPWord& w);

enum class VennRegion { SNtoS, SNtoP, RACore, SOnlyNonSN, POnlyNonSN, RAOther, Stuck };
std::string to_string(VennRegion r);

struct SPClassification {
  Norm snorm;
  Norm pnorm;
  bool reduces_to_S_omega = false;
  bool reduces_to_P_omega = false;
  bool root_active = false;
  bool sn_inf = false;
  bool wn_inf = false;
  VennRegion venn_region = VennRegion::Stuck;
};

/// Throws precondition for a finite word.
SPClassification classify(const SPWord& w);

/// One contraction of a PS or SP factor; `at` is the depth of its first letter.
struct WordStep {
  std::size_t at = 0;
  /// "ps" or "sp", the rule names of the unary-term encoding.
  std::string rule;
};

/// Applies steps in order.  Throws stale-redex when a factor does not match.
std::string apply_word_steps(std::string word, const std::vector<WordStep>& steps);
/// Leftmost contractions down to the normal form; with `only` set just that rule is used.
std::vector<WordStep> reduce_to_normal_form(std::string word, std::optional<std::string> only = std::nullopt);
/// S^z for z = sum(w) ≥ 0, P^(−z) otherwise.
std::string nf_finite(std::string_view word);

struct WitnessSegment {
  /// 1-based index of the segment's first letter in w.
  std::size_t start = 1;
  std::string word;
  /// Leftmost contractions reducing `word` to `letter`.
  std::vector<WordStep> steps;
  char letter = 'S';
};

/// First `segments` pieces of a partition of w into words of sum ±1 toward
/// S^ω (target 'S') or P^ω (target 'P').  Throws norm-finite.
std::vector<WitnessSegment> witness_to(const SPWord& w, char target, std::size_t segments = kDefaultSegments);
/// Pieces with sum +1 where u has S and −1 where u has P.  Throws precondition
/// unless both norms of w are infinite and u is infinite.
std::vector<WitnessSegment> witness_to_word(const SPWord& w, const SPWord& u,
                                            std::size_t segments = kDefaultSegments);

/// P(S(...)) with the variable x as leaf.  Finite and periodic words are
/// exact; affine tails are cut after `depth` letters.
Term to_trs_term(const SPWord& w, std::size_t depth = kDefaultTruncation);
/// Reads the letters down a unary P/S spine; stops at the first other node
/// or after `depth` letters.
std::string word_of_term(const Term& t, std::size_t depth = kDefaultTruncation);

} // namespace infrew
