#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "infrew/defaults.hpp"
#include "infrew/trs.hpp"

namespace infrew {

/// Redex contracted by step i of a limit stage.  Must be pure.
using StepGenerator = std::function<Redex(std::size_t)>;
/// N(d): every step with index ≥ N(d) has depth > d.  Non-decreasing.
using Certificate = std::function<std::size_t(std::size_t)>;

/// Divergence at a fixed depth: every step from index(0) on has depth ≥ depth,
/// and index enumerates (strictly increasing) the steps at exactly that depth.
struct DivergenceWitness {
  std::size_t depth = 0;
  std::function<std::size_t(std::size_t)> index;
};

/// A reduction built from finite stages and stages of length ω.  Every
/// stage starts where the previous one ends; a divergent stage has no end
/// and must come last.
class StagedReduction {
public:
  StagedReduction(Term source, Trs R);
  StagedReduction(Term source, std::shared_ptr<const Trs> R);

  /// Appends a finite stage; every step is checked while its term is built.
  StagedReduction& then_steps(const std::vector<Redex>& redexes);
  StagedReduction& then_limit(StepGenerator step, Certificate certificate, Term limit);
  StagedReduction& then_divergent(StepGenerator step, DivergenceWitness witness);

  const Term& source() const { return source_; }
  const Trs& trs() const { return *R_; }
  const std::shared_ptr<const Trs>& trs_ptr() const { return R_; }

  std::size_t stage_count() const { return stages_.size(); }
  bool is_limit_stage(std::size_t k) const;
  bool divergent() const;
  /// Number of steps of a finite stage.
  std::size_t finite_length(std::size_t k) const;
  const Term& stage_source(std::size_t k) const;
  /// Throws divergent for a divergent stage.
  const Term& stage_target(std::size_t k) const;
  /// Throws divergent.
  const Term& target() const;

  Redex redex(std::size_t k, std::size_t i) const;
  /// Term before step i of stage k (after the last step for i = length).
  Term term(std::size_t k, std::size_t i) const;
  std::size_t certificate(std::size_t k, std::size_t d) const;
  const DivergenceWitness& witness(std::size_t k) const;

  /// The reduction made of the first k stages.
  StagedReduction first_stages(std::size_t k) const;

  bool empty() const;
  /// Total number of steps when no stage is a limit stage.
  std::optional<std::size_t> length() const;
  /// `0`, `3`, `ω`, `ω+2`, `ω·2`, with ` divergent` appended when divergent.
  std::string shape() const;
  /// Least depth of a step; nullopt for the empty reduction.
  std::optional<std::size_t> min_depth() const;
  /// Steps at depth d; nullopt when there are infinitely many.
  std::optional<std::size_t> count_at_depth(std::size_t d) const;

  /// Replays every limit stage up to N(horizon): checks that the steps
  /// match, that N is monotone and keeps its promise on that window, and
  /// that the reached term agrees with the limit to depth horizon.
  /// Throws stale-redex or invalid-certificate.
  void check(std::size_t horizon = kDefaultTruncation) const;

  /// One `@depth position rule` line per step; a limit stage lists its steps
  /// below N(horizon) and ends with `--limit((0,N0),(1,N1),...)--`.
  std::string trace(std::size_t horizon = 4) const;

private:
  struct Stage;
  Term source_;
  std::shared_ptr<const Trs> R_;
  std::vector<std::shared_ptr<Stage>> stages_;
};

/// A reduction of length ≤ ω with the same source and target.  Finite
/// reductions come back unchanged.  Throws not-strongly-convergent for a
/// divergent input and tail-not-finite when two limit stages are present.
StagedReduction compress(const StagedReduction& red);

/// A divergent reduction of length ω with infinitely many steps at the
/// witness depth.  Throws no-divergence-witness.
StagedReduction compress_divergent(const StagedReduction& red);

// ---------------------------------------------------------------- parallel steps

struct ParallelStep {
  Term source;
  Term target;
  /// Sorted, pairwise parallel.
  std::vector<Redex> redexes;
  /// Least redex depth; npos when empty.
  std::size_t min_depth = npos;
  /// Set when only redexes up to this depth are listed; the target is then
  /// exact up to that depth.
  std::optional<std::size_t> horizon;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Throws not-parallel or stale-redex.
  static ParallelStep make(Term source, std::vector<Redex> redexes, const Trs& R,
                           std::optional<std::size_t> horizon = std::nullopt);
  bool empty() const { return redexes.empty(); }
  std::string str(const Trs& R) const;
};

/// φ′, ψ′ with the targets of φ, ψ whose union is non-overlapping: an outer
/// redex gives way to the top-most left-most inner one it overlaps, and at a
/// shared root φ's rule wins.  Throws different-sources.
std::pair<ParallelStep, ParallelStep> orthogonalize_parallel(const ParallelStep& phi, const ParallelStep& psi,
                                                             const Trs& R);
/// φ/ψ: residuals of φ′ after ψ′, a parallel step from ψ's target.
ParallelStep project_parallel(const ParallelStep& phi, const ParallelStep& psi, const Trs& R,
                              std::size_t depth_bound = kDefaultTruncation);

struct ParallelMoves {
  /// κ projected over φ, from φ's target.
  StagedReduction xi;
  /// φ projected over κ, from κ's target.
  ParallelStep psi;
};

/// Projects κ (compressed first when longer than ω) and φ over each other.
/// Throws different-sources or missing-certificate.
ParallelMoves parallel_moves(const StagedReduction& kappa, const ParallelStep& phi,
                             std::size_t depth_bound = kDefaultTruncation);

struct JoinRound {
  /// Least depth of the steps still to be joined when the round started.
  std::size_t depth = 0;
  /// Number of depth levels on which the frontier terms agree after the
  /// round (the depth of their first difference).
  std::size_t agreeing_levels = 0;
};

struct Join {
  StagedReduction kappa_cont;
  StagedReduction xi_cont;
  std::vector<JoinRound> rounds;
};

/// Continuations from the targets of κ and ξ whose ends agree to depth
/// agree_depth.  Throws collapsing-rules-present, different-sources or
/// budget-exceeded after `budget` rounds.
Join join_bounded(const StagedReduction& kappa, const StagedReduction& xi, std::size_t agree_depth,
                  std::size_t budget = 64);

} // namespace infrew
