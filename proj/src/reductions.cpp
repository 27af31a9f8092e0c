#include <algorithm>
#include <map>
#include <sstream>

#include "batch_stream.hpp"
#include "infrew/error.hpp"
#include "infrew/reductions.hpp"

namespace infrew {

struct StagedReduction::Stage {
  bool limit = false;
  Term source;
  std::vector<Redex> steps;
  std::vector<Term> terms;  // finite: all of them; limit: memo
  StepGenerator gen;
  Certificate cert;
  std::optional<Term> target;
  std::optional<DivergenceWitness> witness;
  std::vector<Redex> memo;

  const Redex& redex(std::size_t i) {
    if (!limit) return steps.at(i);
    while (memo.size() <= i) memo.push_back(gen(memo.size()));
    return memo[i];
  }

  const Term& term(std::size_t i, const Trs& R) {
    if (!limit) return terms.at(i);
    while (terms.size() <= i) terms.push_back(rewrite_at(terms.back(), redex(terms.size() - 1), R));
    return terms[i];
  }
};

StagedReduction::StagedReduction(Term source, Trs R)
    : StagedReduction(std::move(source), std::make_shared<const Trs>(std::move(R))) {}

StagedReduction::StagedReduction(Term source, std::shared_ptr<const Trs> R)
    : source_(std::move(source)), R_(std::move(R)) {}

namespace {

void require_open(bool divergent) {
  if (divergent) throw Error("precondition", "no stage can follow a divergent stage");
}

} // namespace

StagedReduction& StagedReduction::then_steps(const std::vector<Redex>& redexes) {
  require_open(divergent());
  if (redexes.empty()) return *this;
  auto s = std::make_shared<Stage>();
  s->source = target();
  s->steps = redexes;
  s->terms.push_back(s->source);
  for (auto& r : redexes) s->terms.push_back(rewrite_at(s->terms.back(), r, *R_));
  stages_.push_back(std::move(s));
  return *this;
}

StagedReduction& StagedReduction::then_limit(StepGenerator step, Certificate certificate, Term limit) {
  require_open(divergent());
  if (!step || !certificate) throw Error("not-strongly-convergent", "a limit stage needs a generator and a certificate");
  auto s = std::make_shared<Stage>();
  s->limit = true;
  s->source = target();
  s->terms.push_back(s->source);
  s->gen = std::move(step);
  s->cert = std::move(certificate);
  s->target = std::move(limit);
  stages_.push_back(std::move(s));
  return *this;
}

StagedReduction& StagedReduction::then_divergent(StepGenerator step, DivergenceWitness witness) {
  require_open(divergent());
  if (!step || !witness.index) throw Error("no-divergence-witness", "a divergent stage needs a witness");
  auto s = std::make_shared<Stage>();
  s->limit = true;
  s->source = target();
  s->terms.push_back(s->source);
  s->gen = std::move(step);
  s->witness = std::move(witness);
  stages_.push_back(std::move(s));
  return *this;
}

bool StagedReduction::is_limit_stage(std::size_t k) const { return stages_.at(k)->limit; }

bool StagedReduction::divergent() const { return !stages_.empty() && stages_.back()->witness.has_value(); }

std::size_t StagedReduction::finite_length(std::size_t k) const {
  if (stages_.at(k)->limit) throw Error("precondition", "stage " + std::to_string(k) + " has length ω");
  return stages_[k]->steps.size();
}

const Term& StagedReduction::stage_source(std::size_t k) const { return stages_.at(k)->source; }

const Term& StagedReduction::stage_target(std::size_t k) const {
  const Stage& s = *stages_.at(k);
  if (s.witness) throw Error("divergent", "a divergent stage has no target");
  return s.limit ? *s.target : s.terms.back();
}

const Term& StagedReduction::target() const {
  return stages_.empty() ? source_ : stage_target(stages_.size() - 1);
}

Redex StagedReduction::redex(std::size_t k, std::size_t i) const { return stages_.at(k)->redex(i); }

Term StagedReduction::term(std::size_t k, std::size_t i) const { return stages_.at(k)->term(i, *R_); }

std::size_t StagedReduction::certificate(std::size_t k, std::size_t d) const {
  const Stage& s = *stages_.at(k);
  if (!s.limit) {
    // one past the last step at depth ≤ d
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      if (s.steps[i].depth() <= d) n = i + 1;
    return n;
  }
  if (!s.cert) throw Error("not-strongly-convergent", "divergent stage has no certificate");
  return s.cert(d);
}

const DivergenceWitness& StagedReduction::witness(std::size_t k) const {
  const Stage& s = *stages_.at(k);
  if (!s.witness) throw Error("no-divergence-witness", "stage " + std::to_string(k) + " is not divergent");
  return *s.witness;
}

StagedReduction StagedReduction::first_stages(std::size_t k) const {
  StagedReduction out(source_, R_);
  out.stages_.assign(stages_.begin(), stages_.begin() + static_cast<std::ptrdiff_t>(std::min(k, stages_.size())));
  return out;
}

bool StagedReduction::empty() const { return stages_.empty(); }

std::optional<std::size_t> StagedReduction::length() const {
  std::size_t n = 0;
  for (auto& s : stages_) {
    if (s->limit) return std::nullopt;
    n += s->steps.size();
  }
  return n;
}

std::string StagedReduction::shape() const {
  std::size_t omegas = 0, tail = 0;
  for (auto& s : stages_) {
    if (s->limit) {
      ++omegas;
      tail = 0;
    } else {
      tail += s->steps.size();
    }
  }
  std::string out;
  if (omegas == 0) out = std::to_string(tail);
  else {
    out = omegas == 1 ? "ω" : "ω·" + std::to_string(omegas);
    if (tail) out += "+" + std::to_string(tail);
  }
  if (divergent()) out += " divergent";
  return out;
}

std::optional<std::size_t> StagedReduction::min_depth() const {
  std::optional<std::size_t> best;
  auto see = [&](std::size_t d) {
    if (!best || d < *best) best = d;
  };
  for (auto& sp : stages_) {
    Stage& s = *sp;
    if (!s.limit) {
      for (auto& r : s.steps) see(r.depth());
    } else if (s.witness) {
      see(s.witness->depth);
      for (std::size_t i = 0, n = s.witness->index(0); i < n; ++i) see(s.redex(i).depth());
    } else {
      // every step of depth ≤ d sits below N(d)
      std::optional<std::size_t> m;
      std::size_t scanned = 0;
      for (std::size_t d = 0;; ++d) {
        for (std::size_t n = s.cert(d); scanned < n; ++scanned) {
          auto e = s.redex(scanned).depth();
          if (!m || e < *m) m = e;
        }
        if (m && *m <= d) break;
      }
      see(*m);
    }
  }
  return best;
}

std::optional<std::size_t> StagedReduction::count_at_depth(std::size_t d) const {
  std::size_t n = 0;
  for (auto& sp : stages_) {
    Stage& s = *sp;
    std::size_t upto;
    if (!s.limit) upto = s.steps.size();
    else if (!s.witness) upto = s.cert(d);
    else {
      if (d == s.witness->depth) return std::nullopt;
      if (d > s.witness->depth)
        throw Error("precondition", "step count below the divergence depth is not determined");
      upto = s.witness->index(0);
    }
    for (std::size_t i = 0; i < upto; ++i) n += s.redex(i).depth() == d;
  }
  return n;
}

void StagedReduction::check(std::size_t horizon) const {
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    Stage& s = *stages_[k];
    if (!s.limit) continue;
    const std::string where = "stage " + std::to_string(k);
    if (s.witness) {
      const auto& w = *s.witness;
      std::size_t last = w.index(horizon);
      std::size_t next = 0;
      for (std::size_t i = w.index(0); i <= last; ++i) {
        auto e = s.redex(i).depth();
        bool listed = i == w.index(next);
        if (listed) ++next;
        if (e < w.depth || (e == w.depth) != listed)
          throw Error("invalid-certificate", where + ": step " + std::to_string(i) + " contradicts the witness");
      }
      s.term(last + 1, *R_);
      continue;
    }
    std::size_t n = s.cert(horizon);
    std::size_t prev = 0;
    for (std::size_t d = 0; d <= horizon; ++d) {
      std::size_t nd = s.cert(d);
      if (nd < prev) throw Error("invalid-certificate", where + ": N is not monotone at " + std::to_string(d));
      prev = nd;
      for (std::size_t i = nd; i < n; ++i)
        if (s.redex(i).depth() <= d)
          throw Error("invalid-certificate", where + ": step " + std::to_string(i) + " lies at depth ≤ " +
                                                 std::to_string(d) + " after N(d) = " + std::to_string(nd));
    }
    if (!agree_to_depth(s.term(n, *R_), *s.target, horizon))
      throw Error("invalid-certificate", where + ": the reduction does not approach its limit by step " +
                                             std::to_string(n));
  }
}

std::string StagedReduction::trace(std::size_t horizon) const {
  std::ostringstream out;
  auto line = [&](const Redex& r) {
    out << '@' << r.depth() << ' ' << r.root.str() << ' ' << R_->rule(r.rule).name << '\n';
  };
  for (auto& sp : stages_) {
    Stage& s = *sp;
    if (!s.limit) {
      for (auto& r : s.steps) line(r);
    } else if (s.witness) {
      for (std::size_t i = 0, n = s.witness->index(horizon); i <= n; ++i) line(s.redex(i));
      out << "--diverge(" << s.witness->depth << ")--\n";
    } else {
      for (std::size_t i = 0, n = s.cert(horizon); i < n; ++i) line(s.redex(i));
      out << "--limit(";
      for (std::size_t d = 0; d <= horizon; ++d) out << (d ? "," : "") << '(' << d << ',' << s.cert(d) << ')';
      out << ")--\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------- compression

namespace {

/// A single reduction of length ω.
struct Omega {
  StepGenerator gen;
  Certificate cert;
  Term limit;
};

struct RuleShape {
  std::map<std::string, Position> var_at;                // in the lhs
  std::map<std::string, std::vector<Position>> occurs;  // in the rhs
  std::size_t lift = 0;                                   // how far a copy can rise
};

void collect(const Term& t, Position at, std::map<std::string, std::vector<Position>>& out) {
  if (t.is_var()) {
    out[t.symbol()].push_back(at);
    return;
  }
  for (std::size_t i = 1; i <= t.arity(); ++i) collect(t.arg(i), at.child(static_cast<int>(i)), out);
}

RuleShape shape_of(const Rule& rule) {
  RuleShape s;
  std::map<std::string, std::vector<Position>> lhs;
  collect(rule.lhs, {}, lhs);
  for (auto& [x, ps] : lhs) {
    if (ps.size() != 1) throw Error("not-left-linear", rule.str());
    s.var_at[x] = ps.front();
  }
  collect(rule.rhs, {}, s.occurs);
  for (auto& [x, ps] : s.occurs) {
    std::sort(ps.begin(), ps.end());
    std::size_t up = s.var_at.at(x).depth();
    for (auto& o : ps)
      if (o.depth() < up) s.lift = std::max(s.lift, up - o.depth());
  }
  return s;
}

/// Moves the final step `last` in front of everything below its pattern and
/// follows each later step to its copies under the contracted redex.
Omega successor(const Omega& in, const Redex& last, std::shared_ptr<const Trs> R) {
  Term limit = rewrite_at(in.limit, last, *R);
  const Rule& rule = R->rule(last.rule);
  auto shape = std::make_shared<RuleShape>(shape_of(rule));
  const Position p = last.root;
  const std::size_t N = in.cert(p.depth() + rule.pattern_depth());

  auto copies = [shape, p, R, N](const Redex& q, std::size_t src) -> std::vector<Redex> {
    if (q.root.parallel(p)) return {q};
    const auto& path = q.root.path;
    for (auto& [x, ox] : shape->var_at) {
      Position at = p.concat(ox);
      if (!at.is_prefix_of(q.root)) continue;
      Position rest(std::vector<int>(path.begin() + static_cast<std::ptrdiff_t>(at.depth()), path.end()));
      std::vector<Redex> out;
      auto it = shape->occurs.find(x);
      if (it != shape->occurs.end())
        for (auto& o : it->second) out.push_back(Redex{p.concat(o).concat(rest), q.rule});
      return out;
    }
    throw Error("invalid-certificate", "step " + std::to_string(src) + " " + q.str(*R) +
                                           " touches the pattern of a step placed before it (N = " +
                                           std::to_string(N) + ")");
  };

  auto stream = std::make_shared<detail::BatchStream>([in, last, N, copies](std::size_t k) -> std::vector<Redex> {
    if (k < N) return {in.gen(k)};
    if (k == N) return {last};
    return copies(in.gen(k - 1), k - 1);
  });
  auto cert = [stream, in, N, lift = shape->lift](std::size_t d) {
    return stream->start_of(std::max(N, in.cert(d + lift)) + 1);
  };
  return Omega{[stream](std::size_t i) { return stream->at(i); }, cert, limit};
}

StagedReduction from_omega(const Term& source, std::shared_ptr<const Trs> R, const Omega& w) {
  StagedReduction out(source, std::move(R));
  out.then_limit(w.gen, w.cert, w.limit);
  return out;
}

/// The steps of finite stages [from, to).
std::vector<Redex> finite_steps(const StagedReduction& red, std::size_t from, std::size_t to) {
  std::vector<Redex> out;
  for (std::size_t k = from; k < to; ++k)
    for (std::size_t i = 0, n = red.finite_length(k); i < n; ++i) out.push_back(red.redex(k, i));
  return out;
}

/// Single limit stage for a strongly convergent reduction with one limit stage.
Omega compress_to_omega(const StagedReduction& red, std::size_t L) {
  auto prefix = std::make_shared<const std::vector<Redex>>(finite_steps(red, 0, L));
  const std::size_t P = prefix->size();
  Omega w;
  if (P == 0) {
    w = Omega{[red, L](std::size_t i) { return red.redex(L, i); },
              [red, L](std::size_t d) { return red.certificate(L, d); }, red.stage_target(L)};
  } else {
    w = Omega{[red, L, prefix, P](std::size_t i) { return i < P ? (*prefix)[i] : red.redex(L, i - P); },
              [red, L, P](std::size_t d) { return P + red.certificate(L, d); }, red.stage_target(L)};
  }
  for (auto& r : finite_steps(red, L + 1, red.stage_count())) w = successor(w, r, red.trs_ptr());
  return w;
}

std::size_t limit_stage(const StagedReduction& red, std::size_t upto) {
  std::size_t L = upto;
  for (std::size_t k = 0; k < upto; ++k) {
    if (!red.is_limit_stage(k)) continue;
    if (L != upto) throw Error("tail-not-finite", "more than one limit stage");
    L = k;
  }
  return L;
}

} // namespace

StagedReduction compress(const StagedReduction& red) {
  if (red.divergent()) throw Error("not-strongly-convergent", "the reduction is divergent");
  std::size_t L = limit_stage(red, red.stage_count());
  if (L == red.stage_count() || red.stage_count() == 1) return red;
  return from_omega(red.source(), red.trs_ptr(), compress_to_omega(red, L));
}

StagedReduction compress_divergent(const StagedReduction& red) {
  if (!red.divergent()) throw Error("no-divergence-witness", "the reduction carries no divergence witness");
  const std::size_t D = red.stage_count() - 1;
  const std::size_t L = limit_stage(red, D);
  if (L == D) return red;

  const DivergenceWitness w = red.witness(D);
  const std::size_t d = w.depth;
  struct State {
    Omega C;
    std::size_t segment = 0;
    std::size_t stable = 0;
  };
  auto st = std::make_shared<State>();
  st->C = compress_to_omega(red.first_stages(D), L);
  for (std::size_t e = 0, n = w.index(0); e < n; ++e) st->C = successor(st->C, red.redex(D, e), red.trs_ptr());
  st->stable = st->C.cert(d);
  const std::size_t shallow = d == 0 ? 0 : st->C.cert(d - 1);

  auto R = red.trs_ptr();
  auto advance = [st, red, w, d, D, R]() {
    std::size_t from = w.index(st->segment), to = w.index(st->segment + 1);
    if (to <= from) throw Error("no-divergence-witness", "witness indices must increase");
    for (std::size_t e = from; e < to; ++e) {
      Redex r = red.redex(D, e);
      if (e == from ? r.depth() != d : r.depth() <= d)
        throw Error("no-divergence-witness", "step " + std::to_string(e) + " contradicts the witness at depth " +
                                                 std::to_string(d));
      st->C = successor(st->C, r, R);
    }
    ++st->segment;
    st->stable = st->C.cert(d);
  };
  auto gen = [st, advance](std::size_t i) {
    while (st->stable <= i) advance();
    return st->C.gen(i);
  };
  auto found = std::make_shared<std::vector<std::size_t>>();
  auto index = [gen, found, shallow, d](std::size_t k) {
    std::size_t i = found->empty() ? shallow : found->back() + 1;
    while (found->size() <= k) {
      if (gen(i).depth() == d) found->push_back(i);
      ++i;
    }
    return (*found)[k];
  };
  StagedReduction out(red.source(), red.trs_ptr());
  out.then_divergent(gen, DivergenceWitness{d, index});
  return out;
}

} // namespace infrew
