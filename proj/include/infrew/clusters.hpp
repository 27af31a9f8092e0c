#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "infrew/defaults.hpp"
#include "infrew/trs.hpp"

namespace infrew {

// ---------------------------------------------------------------- developments

/// A term graph whose nodes may carry rule labels.  `contract` marks redexes
/// to be developed, `track` marks redexes whose residuals are wanted.  The
/// graph is kept as built (never minimized) so labels stay attached.
struct LabelledTerm {
  Term term;
  std::vector<std::optional<std::size_t>> contract;
  std::vector<std::optional<std::size_t>> track;
};

/// Unfolds t just enough for every position of `contract` and `track` to get
/// its own graph node.  Throws stale-redex for redexes that do not match.
LabelledTerm label_redexes(const Term& t, const RedexSet& contract, const RedexSet& track, const Trs& R);

/// Complete development of the contract labels.  Track labels of redexes
/// that survive are carried to the result; the result has no contract labels.
/// Throws would-not-converge when a collapsing rule is labelled at infinitely
/// many positions, and not-a-multiredex on overlapping contract labels.
LabelledTerm develop_labelled(const LabelledTerm& lt, const Trs& R);

/// Turns the track labels into contract labels.
LabelledTerm promote_tracked(const LabelledTerm& lt);

/// Tracked redexes at depth ≤ depth_bound, sorted.
std::vector<Redex> tracked_redexes(const LabelledTerm& lt, std::size_t depth_bound);
/// Whether the track labels sit at finitely many positions.
bool tracked_finite(const LabelledTerm& lt);

/// Target of the complete development of U.
Term develop(const Term& t, const MultiRedex& U, const Trs& R);

/// Residuals of U after the multi-step over V (U ∪ V non-overlapping).
/// Exact when the residuals are finitely many, otherwise cut at depth_bound.
std::vector<Redex> residual_multiredex(const Term& t, const MultiRedex& U, const MultiRedex& V, const Trs& R,
                                       std::size_t depth_bound = kDefaultTruncation);

// ---------------------------------------------------------------- clusters

enum class ClusterKind { I, Y };
enum class Extent { Finite, Infinite };

struct Cluster {
  std::vector<Redex> redexes;
  /// Periodic families lying entirely inside the cluster.
  std::vector<RedexFamily> families;
  ClusterKind kind = ClusterKind::I;
  Extent extent = Extent::Finite;
  Position root;
  /// Member roots in depth order (I-clusters only); a family contributes its generator.
  std::vector<Position> root_path;

  /// `kind=I extent=fin root=ε size=2 trivial=false`
  std::string str() const;
};

/// Connected components of the overlap relation over W, ordered by root.
/// Families must have overlapping consecutive instances.
std::vector<Cluster> clusters(const Term& t, const RedexSet& W, const Trs& R);

bool is_trivial(const Cluster& c);

/// Contracts one member of a trivial cluster and compares with t.  Throws
/// precondition when c is not trivial.
bool trivial_cluster_step_is_identity(const Term& t, const Cluster& c, const Trs& R);

/// Largest position of the redex's pattern along the root-path of its cluster.
Position tail(const Redex& r, const Cluster& c, const Trs& R);

MultiRedex full_multiredex(const Term& t, const RedexSet& W, const Trs& R);

/// t• with respect to W: develop(t, full_multiredex(t, W)).
Term bullet(const Term& t, const RedexSet& W, const Trs& R);

// ---------------------------------------------------------------- orthogonalization

struct OrthogonalizationMap {
  /// Processed redexes in processing order.
  std::vector<Redex> domain;
  std::map<Redex, Redex> image;
  /// Redexes on which the map is deliberately undefined.
  std::vector<Redex> undefined;

  std::optional<Redex> operator()(const Redex& r) const;
  /// Image of a set, sorted and without duplicates.
  std::vector<Redex> apply(const std::vector<Redex>& U) const;
  /// One line per redex: `redex@1(r) -> redex@ε(r)` or `... -> UNDEF`.
  std::string str(const Trs& R) const;
};

/// The outside-in orthogonalization loop.  With check_invariant the loop
/// invariant is verified after every iteration (throws invariant-violated).
OrthogonalizationMap orthogonalize(const Term& t, const std::vector<Redex>& W, const Trs& R,
                                   bool check_invariant = false);

/// The loop invariant for a state (W, C, ⊥): the image of W∖C is orthogonal,
/// C does not root-touch W∖C and does not touch the image of W∖C.
bool orthogonalization_invariant(const std::vector<Redex>& W, const std::vector<Redex>& C,
                                 const OrthogonalizationMap& m, const Trs& R);

struct DiamondJoin {
  Term u_target;
  Term v_target;
  /// Multi-redex closing the U side (residuals of V^⊥ after U^⊥), and vice versa.
  std::vector<Redex> join_u;
  std::vector<Redex> join_v;
  Term common;
};

DiamondJoin diamond_join(const Term& t, const MultiRedex& U, const MultiRedex& V, const Trs& R);

} // namespace infrew
