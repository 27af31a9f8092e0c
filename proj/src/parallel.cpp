#include <algorithm>
#include <limits>
#include <sstream>

#include "batch_stream.hpp"
#include "infrew/clusters.hpp"
#include "infrew/error.hpp"
#include "infrew/reductions.hpp"

namespace infrew {

ParallelStep ParallelStep::make(Term source, std::vector<Redex> redexes, const Trs& R,
                                std::optional<std::size_t> horizon) {
  std::sort(redexes.begin(), redexes.end());
  redexes.erase(std::unique(redexes.begin(), redexes.end()), redexes.end());
  ParallelStep s;
  s.target = parallel_step(source, redexes, R);
  s.source = std::move(source);
  for (auto& r : redexes) s.min_depth = std::min(s.min_depth, r.depth());
  s.redexes = std::move(redexes);
  s.horizon = horizon;
  return s;
}

std::string ParallelStep::str(const Trs& R) const {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < redexes.size(); ++i) out << (i ? ", " : "") << redexes[i].str(R);
  if (horizon) out << (redexes.empty() ? "" : ", ") << "... below depth " << *horizon;
  out << '}';
  return out.str();
}

namespace {

std::optional<std::size_t> min_horizon(std::initializer_list<std::optional<std::size_t>> hs) {
  std::optional<std::size_t> out;
  for (auto& h : hs)
    if (h && (!out || *h < *out)) out = h;
  return out;
}

/// Replaces each redex of `mine` by the shallowest, then left-most, redex of
/// `theirs` strictly below it that it overlaps.  At a shared root the redex
/// of `theirs` replaces it only when `theirs_wins_ties`.
std::vector<Redex> give_way(const std::vector<Redex>& mine, const std::vector<Redex>& theirs, bool theirs_wins_ties,
                            const Trs& R) {
  std::vector<Redex> out;
  for (auto& u : mine) {
    std::optional<Redex> pick;
    for (auto& v : theirs) {
      if (v == u || !overlap(u, v, R)) continue;
      bool below = u.root.strictly_above(v.root);
      bool tie = v.root == u.root && theirs_wins_ties;
      if (!below && !tie) continue;
      auto key = [](const Redex& r) { return std::make_tuple(r.depth(), r.root, r.rule); };
      if (!pick || key(v) < key(*pick)) pick = v;
    }
    out.push_back(pick.value_or(u));
  }
  return out;
}

void require_same_source(const Term& a, const Term& b) {
  if (!bisim_equal(a, b)) throw Error("different-sources", a.str() + " vs " + b.str());
}

/// (φ/ψ, ψ/φ) from one orthogonalization.
std::pair<ParallelStep, ParallelStep> tile(const ParallelStep& phi, const ParallelStep& psi, const Trs& R,
                                           std::size_t bound) {
  auto [a, b] = orthogonalize_parallel(phi, psi, R);
  auto residuals = [&](const ParallelStep& track, const ParallelStep& along, const ParallelStep& orig_along,
                       std::optional<std::size_t> h) {
    auto res = develop_labelled(label_redexes(track.source, along.redexes, track.redexes, R), R);
    bool finite = tracked_finite(res);
    auto rs = tracked_redexes(res, finite ? std::numeric_limits<std::size_t>::max() : bound);
    auto horizon = min_horizon({h, finite ? std::nullopt : std::optional<std::size_t>(bound)});
    return ParallelStep::make(orig_along.target, std::move(rs), R, horizon);
  };
  auto h = min_horizon({phi.horizon, psi.horizon});
  return {residuals(a, b, psi, h), residuals(b, a, phi, h)};
}

} // namespace

std::pair<ParallelStep, ParallelStep> orthogonalize_parallel(const ParallelStep& phi, const ParallelStep& psi,
                                                             const Trs& R) {
  require_same_source(phi.source, psi.source);
  auto U = give_way(phi.redexes, psi.redexes, false, R);
  auto V = give_way(psi.redexes, phi.redexes, true, R);
  auto a = ParallelStep::make(phi.source, U, R, phi.horizon);
  auto b = ParallelStep::make(psi.source, V, R, psi.horizon);
  for (auto& u : a.redexes)
    for (auto& v : b.redexes)
      if (u != v && overlap(u, v, R))
        throw Error("internal", u.str(R) + " and " + v.str(R) + " still overlap");
  auto same = [](const ParallelStep& x, const ParallelStep& y) {
    return x.horizon ? agree_to_depth(x.target, y.target, *x.horizon) : bisim_equal(x.target, y.target);
  };
  if (!same(a, phi) || !same(b, psi))
    throw Error("not-weakly-orthogonal", "replacing an overlapping redex changed the target");
  return {a, b};
}

ParallelStep project_parallel(const ParallelStep& phi, const ParallelStep& psi, const Trs& R,
                              std::size_t depth_bound) {
  return tile(phi, psi, R, depth_bound).first;
}

// ---------------------------------------------------------------- parallel moves

namespace {

std::size_t deepest_variable(const Trs& R) {
  std::size_t m = 0;
  for (auto& rule : R.rules()) {
    std::vector<std::pair<Term, std::size_t>> stack{{rule.lhs, 0}};
    while (!stack.empty()) {
      auto [t, d] = stack.back();
      stack.pop_back();
      if (t.is_var()) m = std::max(m, d);
      else
        for (auto& a : t.args()) stack.emplace_back(a, d + 1);
    }
  }
  return m;
}

std::size_t plus_one(std::size_t d) { return d == ParallelStep::npos ? d : d + 1; }

/// κ as at most one stage.
StagedReduction one_stage(const StagedReduction& kappa) {
  if (kappa.divergent()) throw Error("missing-certificate", "a divergent reduction cannot be projected");
  for (std::size_t k = 0; k < kappa.stage_count(); ++k)
    if (kappa.is_limit_stage(k)) return compress(kappa);
  if (kappa.stage_count() <= 1) return kappa;
  std::vector<Redex> all;
  for (std::size_t k = 0; k < kappa.stage_count(); ++k)
    for (std::size_t i = 0; i < kappa.finite_length(k); ++i) all.push_back(kappa.redex(k, i));
  StagedReduction out(kappa.source(), kappa.trs_ptr());
  out.then_steps(all);
  return out;
}

void check_depths(const StagedReduction& kappa, const ParallelStep& phi, const ParallelMoves& m, const Trs& R) {
  auto dk = kappa.min_depth().value_or(ParallelStep::npos);
  auto dphi = phi.min_depth;
  auto dxi = m.xi.min_depth().value_or(ParallelStep::npos);
  auto dpsi = m.psi.min_depth;
  bool ok;
  if (R.has_collapsing()) ok = dxi >= std::min(dk, dphi) && dpsi >= std::min(dk, dphi);
  else ok = dxi >= std::min(dk, plus_one(dphi)) && dpsi >= std::min(dphi, plus_one(dk));
  if (!ok) throw Error("internal", "projection lifted steps further than the depth bounds allow");
}

} // namespace

ParallelMoves parallel_moves(const StagedReduction& kappa_in, const ParallelStep& phi, std::size_t depth_bound) {
  StagedReduction kappa = one_stage(kappa_in);
  require_same_source(kappa.source(), phi.source);
  const Trs& R = kappa.trs();
  auto Rp = kappa.trs_ptr();

  if (kappa.empty() || !kappa.is_limit_stage(0)) {
    ParallelStep cur = phi;
    std::vector<Redex> steps;
    std::size_t n = kappa.empty() ? 0 : kappa.finite_length(0);
    for (std::size_t i = 0; i < n; ++i) {
      auto q = ParallelStep::make(kappa.term(0, i), {kappa.redex(0, i)}, R);
      auto [phi_next, step] = tile(cur, q, R, depth_bound);
      steps.insert(steps.end(), step.redexes.begin(), step.redexes.end());
      cur = phi_next;
    }
    StagedReduction xi(phi.target, Rp);
    xi.then_steps(steps);
    ParallelMoves m{xi, cur};
    check_depths(kappa, phi, m, R);
    return m;
  }

  // φ projected over the first M steps settles at depth ≤ depth_bound
  const std::size_t M = kappa.certificate(0, depth_bound + R.max_pattern_depth());
  struct State {
    ParallelStep cur;
    std::vector<std::vector<Redex>> early;
  };
  auto st = std::make_shared<State>(State{phi, {}});
  auto advance = [st, kappa, depth_bound, Rp](std::size_t i) {
    auto q = ParallelStep::make(kappa.term(0, i), {kappa.redex(0, i)}, *Rp);
    auto [phi_next, step] = tile(st->cur, q, *Rp, depth_bound);
    st->cur = phi_next;
    return step.redexes;
  };
  for (std::size_t i = 0; i < M; ++i) st->early.push_back(advance(i));

  std::vector<Redex> kept;
  bool exact = !st->cur.horizon;
  for (auto& r : st->cur.redexes) {
    if (r.depth() <= depth_bound) kept.push_back(r);
    else exact = false;
  }
  auto psi = ParallelStep::make(kappa.target(), kept, R,
                                exact ? std::nullopt : std::optional<std::size_t>(depth_bound));

  auto stream = std::make_shared<detail::BatchStream>([st, advance](std::size_t i) {
    return i < st->early.size() ? st->early[i] : advance(i);
  });
  const std::size_t lift = deepest_variable(R);
  StagedReduction xi(phi.target, Rp);
  xi.then_limit([stream](std::size_t i) { return stream->at(i); },
                [stream, kappa, lift](std::size_t d) { return stream->start_of(kappa.certificate(0, d + lift)); },
                psi.target);
  ParallelMoves m{xi, psi};
  check_depths(kappa, phi, m, R);
  return m;
}

// ---------------------------------------------------------------- joining

namespace {

/// Levels on which a and b agree, capped at cap.
std::size_t agreeing_levels(const Term& a, const Term& b, std::size_t cap) {
  auto dist = metric_distance(a, b, cap);
  return dist.depth ? std::min(*dist.depth, cap) : cap;
}

/// κ without its first n steps (κ has at most one stage).
StagedReduction drop(const StagedReduction& kappa, std::size_t n) {
  StagedReduction out(kappa.term(0, n), kappa.trs_ptr());
  if (!kappa.is_limit_stage(0)) {
    std::vector<Redex> rest;
    for (std::size_t i = n; i < kappa.finite_length(0); ++i) rest.push_back(kappa.redex(0, i));
    out.then_steps(rest);
    return out;
  }
  out.then_limit([kappa, n](std::size_t i) { return kappa.redex(0, i + n); },
                 [kappa, n](std::size_t d) {
                   auto N = kappa.certificate(0, d);
                   return N > n ? N - n : 0;
                 },
                 kappa.target());
  return out;
}

std::vector<ParallelStep> singles(const StagedReduction& kappa, std::size_t n) {
  std::vector<ParallelStep> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(ParallelStep::make(kappa.term(0, i), {kappa.redex(0, i)}, kappa.trs()));
  return out;
}

} // namespace

Join join_bounded(const StagedReduction& kappa, const StagedReduction& xi, std::size_t agree_depth,
                  std::size_t budget) {
  const Trs& R = kappa.trs();
  for (auto& rule : R.rules())
    if (rule.collapsing())
      throw Error("collapsing-rules-present", "joining needs a system without collapsing rules, got " + rule.str());
  require_same_source(kappa.source(), xi.source());
  StagedReduction sigma = one_stage(kappa), tau = one_stage(xi);
  Join out{StagedReduction(kappa.target(), kappa.trs_ptr()), StagedReduction(xi.target(), kappa.trs_ptr()), {}};
  const std::size_t bound = agree_depth + kDefaultTruncation;

  while (!agree_to_depth(out.kappa_cont.target(), out.xi_cont.target(), agree_depth)) {
    if (out.rounds.size() == budget)
      throw Error("budget-exceeded", "frontiers still differ after " + std::to_string(budget) + " rounds");
    auto ds = sigma.min_depth(), dt = tau.min_depth();
    if (!ds && !dt) throw Error("budget-exceeded", "nothing left to join but the frontiers differ");
    std::size_t d = std::min(ds.value_or(ParallelStep::npos), dt.value_or(ParallelStep::npos));
    std::size_t ns = sigma.empty() ? 0 : sigma.certificate(0, d);
    std::size_t nt = tau.empty() ? 0 : tau.certificate(0, d);

    // finite diagram over the shallow prefixes
    auto top = singles(sigma, ns);
    std::vector<ParallelStep> right;
    for (auto& b : singles(tau, nt)) {
      ParallelStep cur = b;
      for (auto& a : top) {
        auto [a_next, b_next] = tile(a, cur, R, bound);
        a = a_next;
        cur = b_next;
      }
      right.push_back(cur);
    }
    auto rest_s = sigma.empty() ? sigma : drop(sigma, ns);
    auto rest_t = tau.empty() ? tau : drop(tau, nt);

    // push the deep remainders through the diagram's sides
    auto follow = [&](StagedReduction rest, const std::vector<ParallelStep>& side, StagedReduction& cont) {
      for (auto& phi : side) {
        auto m = parallel_moves(rest, phi, bound);
        cont.then_steps(m.psi.redexes);
        rest = m.xi;
      }
      return rest;
    };
    sigma = one_stage(follow(rest_s, right, out.kappa_cont));
    tau = one_stage(follow(rest_t, top, out.xi_cont));
    out.rounds.push_back(
        {d, agreeing_levels(out.kappa_cont.target(), out.xi_cont.target(), agree_depth + 1)});
  }
  out.kappa_cont = one_stage(out.kappa_cont);
  out.xi_cont = one_stage(out.xi_cont);
  return out;
}

} // namespace infrew
