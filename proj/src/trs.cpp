#include "infrew/trs.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "infrew/error.hpp"

namespace infrew {

// ---------------------------------------------------------------- rules

namespace {

void collect_pattern(const Term& t, Position& at, std::vector<Position>& out) {
  if (t.is_var()) return;
  out.push_back(at);
  for (std::size_t i = 1; i <= t.arity(); ++i) {
    at.path.push_back(static_cast<int>(i));
    collect_pattern(t.arg(i), at, out);
    at.path.pop_back();
  }
}

} // namespace

Rule Rule::make(std::string name, Term lhs, Term rhs) {
  if (!lhs.is_finite() || !rhs.is_finite())
    throw Error("bad-rule", name + ": both sides must be finite terms");
  if (lhs.is_var()) throw Error("bad-rule", name + ": left-hand side is a variable");
  auto lv = lhs.variables();
  for (auto& x : rhs.variables())
    if (!lv.count(x)) throw Error("bad-rule", name + ": variable " + x + " not bound by the left-hand side");
  Rule r;
  r.name = std::move(name);
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  Position at;
  collect_pattern(r.lhs, at, r.pattern_);
  for (auto& p : r.pattern_) r.pattern_depth_ = std::max(r.pattern_depth_, p.depth());
  return r;
}

std::string Rule::str() const { return name + ": " + lhs.str() + " -> " + rhs.str(); }

Trs::Trs(std::vector<Rule> rules) : rules_(std::move(rules)) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (rules_[i].name == rules_[j].name) throw Error("bad-trs", "duplicate rule name " + rules_[i].name);
    sig_.add(rules_[i].lhs);
    sig_.add(rules_[i].rhs);
  }
}

std::optional<std::size_t> Trs::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < rules_.size(); ++i)
    if (rules_[i].name == name) return i;
  return std::nullopt;
}

bool Trs::has_collapsing() const {
  return std::any_of(rules_.begin(), rules_.end(), [](const Rule& r) { return r.collapsing(); });
}

std::size_t Trs::max_pattern_depth() const {
  std::size_t d = 0;
  for (auto& r : rules_) d = std::max(d, r.pattern_depth());
  return d;
}

Trs parse_trs(std::string_view text) {
  std::vector<Rule> rules;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto colon = line.find(':');
    auto arrow = line.find("->");
    if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
      throw Error("parse-error", "line " + std::to_string(lineno) + ": expected 'name: lhs -> rhs'");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    auto name = trim(line.substr(0, colon));
    if (name.empty()) throw Error("parse-error", "line " + std::to_string(lineno) + ": missing rule name");
    auto lhs = parse_term(line.substr(colon + 1, arrow - colon - 1));
    auto rhs = parse_term(line.substr(arrow + 2));
    rules.push_back(Rule::make(name, lhs, rhs));
  }
  return Trs(std::move(rules));
}

Trs load_trs(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("io-error", "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_trs(ss.str());
}

bool is_left_linear(const Trs& R) {
  for (auto& r : R.rules()) {
    std::map<std::string, int> count;
    std::function<void(const Term&)> go = [&](const Term& t) {
      if (t.is_var()) ++count[t.symbol()];
      else
        for (auto& a : t.args()) go(a);
    };
    go(r.lhs);
    for (auto& [x, c] : count)
      if (c > 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------- unification

namespace {

Term resolve(const Term& t, const Substitution& s) {
  Term cur = t;
  for (std::size_t guard = 0; guard <= s.size() + 1; ++guard) {
    bool again = false;
    for (auto& x : cur.variables())
      if (s.count(x)) again = true;
    if (!again) return cur;
    cur = apply_subst(s, cur);
  }
  return cur;
}

Term deref(Term t, const Substitution& s) {
  while (t.is_var()) {
    auto it = s.find(t.symbol());
    if (it == s.end()) break;
    t = it->second;
  }
  return t;
}

bool occurs(const std::string& x, const Term& t, const Substitution& s) {
  Term u = deref(t, s);
  if (u.is_var()) return u.symbol() == x;
  for (auto& a : u.args())
    if (occurs(x, a, s)) return true;
  return false;
}

} // namespace

std::optional<Substitution> unify(const Term& a, const Term& b) {
  Substitution s;
  std::vector<std::pair<Term, Term>> work{{a, b}};
  while (!work.empty()) {
    auto [l, r] = work.back();
    work.pop_back();
    l = deref(l, s);
    r = deref(r, s);
    if (l.is_var() && r.is_var() && l.symbol() == r.symbol()) continue;
    if (l.is_var()) {
      if (occurs(l.symbol(), r, s)) return std::nullopt;
      s[l.symbol()] = r;
      continue;
    }
    if (r.is_var()) {
      if (occurs(r.symbol(), l, s)) return std::nullopt;
      s[r.symbol()] = l;
      continue;
    }
    if (l.symbol() != r.symbol() || l.arity() != r.arity()) return std::nullopt;
    for (std::size_t i = 1; i <= l.arity(); ++i) work.push_back({l.arg(i), r.arg(i)});
  }
  Substitution out;
  for (auto& [x, t] : s) out[x] = resolve(t, s);
  return out;
}

std::optional<Substitution> match(const Term& pattern, const Term& t) {
  Substitution s;
  std::function<bool(const Term&, const Term&)> go = [&](const Term& p, const Term& u) {
    if (p.is_var()) {
      auto [it, fresh] = s.emplace(p.symbol(), u);
      return fresh || bisim_equal(it->second, u);
    }
    if (u.is_var() || u.symbol() != p.symbol() || u.arity() != p.arity()) return false;
    for (std::size_t i = 1; i <= p.arity(); ++i)
      if (!go(p.arg(i), u.arg(i))) return false;
    return true;
  };
  if (!go(pattern, t)) return std::nullopt;
  return s;
}

// ---------------------------------------------------------------- critical pairs

std::vector<CriticalPair> critical_pairs(const Trs& R) {
  if (!is_left_linear(R))
    throw Error("not-left-linear",
                "left-linearity is required; with a rule like f(x,x) -> c next to a -> g(a) and "
                "b -> g(b), f(a,b) ->> f(g^w,g^w) -> c cannot be compressed to length omega");
  std::vector<CriticalPair> out;
  for (std::size_t i = 0; i < R.size(); ++i) {
    const auto& outer = R.rule(i);
    auto outer_vars = outer.lhs.variables();
    for (std::size_t j = 0; j < R.size(); ++j) {
      const auto& inner = R.rule(j);
      // rename the inner rule apart from the outer one
      Substitution ren;
      for (auto& x : inner.lhs.variables()) {
        std::string y = x + "'";
        while (outer_vars.count(y)) y += "'";
        ren[x] = Term::var(y);
      }
      Term l2 = apply_subst(ren, inner.lhs);
      Term r2 = apply_subst(ren, inner.rhs);
      for (auto& p : outer.pattern()) {
        if (p.is_root() && i == j) continue;
        auto theta = unify(subterm_at(outer.lhs, p), l2);
        if (!theta) continue;
        CriticalPair cp;
        cp.outer = i;
        cp.inner = j;
        cp.pos = p;
        for (auto& [x, t] : *theta) {
          if (outer_vars.count(x)) cp.sigma[x] = t;
          else cp.tau[x] = t;
        }
        cp.left = replace_at(apply_subst(*theta, outer.lhs), apply_subst(*theta, r2), p);
        cp.right = apply_subst(*theta, outer.rhs);
        cp.trivial = bisim_equal(cp.left, cp.right);
        out.push_back(std::move(cp));
      }
    }
  }
  return out;
}

std::string to_string(Orthogonality o) {
  switch (o) {
    case Orthogonality::Orthogonal: return "Orthogonal";
    case Orthogonality::WeaklyOrthogonal: return "WeaklyOrthogonal";
    case Orthogonality::Neither: return "Neither";
  }
  return "?";
}

Orthogonality classify_orthogonality(const Trs& R) {
  if (!is_left_linear(R)) return Orthogonality::Neither;
  auto cps = critical_pairs(R);
  if (cps.empty()) return Orthogonality::Orthogonal;
  for (auto& cp : cps)
    if (!cp.trivial) return Orthogonality::Neither;
  return Orthogonality::WeaklyOrthogonal;
}

// ---------------------------------------------------------------- redexes

std::vector<Position> Redex::pattern(const Trs& R) const {
  std::vector<Position> out;
  for (auto& q : R.rule(rule).pattern()) out.push_back(root.concat(q));
  return out;
}

std::string Redex::str(const Trs& R) const { return "redex@" + root.str() + "(" + R.rule(rule).name + ")"; }

Redex RedexFamily::instance(std::size_t k) const {
  Position p = generator;
  for (std::size_t i = 0; i < k; ++i) p = p.concat(period);
  return Redex{p, rule};
}

std::string RedexFamily::str(const Trs& R) const {
  return "family@" + generator.str() + "(" + period.str() + ")^*(" + R.rule(rule).name + ")";
}

std::vector<Redex> RedexSet::expand(std::size_t k) const {
  std::vector<Redex> out = finite;
  for (auto& f : families)
    for (std::size_t i = 0; i < k; ++i) out.push_back(f.instance(i));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool overlap(const Redex& u, const Redex& v, const Trs& R) {
  // patterns live below their roots, so comparable roots are necessary
  if (!u.root.comparable(v.root)) return false;
  const Redex& hi = u.root.depth() <= v.root.depth() ? u : v;
  const Redex& lo = u.root.depth() <= v.root.depth() ? v : u;
  Position rel(std::vector<int>(lo.root.path.begin() + static_cast<long>(hi.root.depth()), lo.root.path.end()));
  const auto& pat = R.rule(hi.rule).pattern();
  return std::find(pat.begin(), pat.end(), rel) != pat.end();
}

bool is_redex(const Term& t, const Redex& r, const Trs& R) {
  if (!has_position(t, r.root) || r.rule >= R.size()) return false;
  Term cur = t;
  for (int i : r.root.path) cur = cur.arg(static_cast<std::size_t>(i));
  return match(R.rule(r.rule).lhs, cur).has_value();
}

std::vector<Redex> find_redexes(const Term& t, const Trs& R, std::size_t depth_bound) {
  std::vector<Redex> out;
  std::vector<int> path;
  std::function<void(const Term&)> go = [&](const Term& u) {
    for (std::size_t k = 0; k < R.size(); ++k)
      if (match(R.rule(k).lhs, u)) out.push_back(Redex{Position(path), k});
    if (path.size() == depth_bound) return;
    for (std::size_t i = 1; i <= u.arity(); ++i) {
      path.push_back(static_cast<int>(i));
      go(u.arg(i));
      path.pop_back();
    }
  };
  go(t);
  std::sort(out.begin(), out.end());
  return out;
}

Term rewrite_at(const Term& t, const Redex& rdx, const Trs& R) {
  if (rdx.rule >= R.size()) throw Error("stale-redex", "unknown rule");
  if (!has_position(t, rdx.root)) throw Error("stale-redex", rdx.str(R) + " has no position in " + t.str());
  Term cur = t;
  for (int i : rdx.root.path) cur = cur.arg(static_cast<std::size_t>(i));
  const Rule& rule = R.rule(rdx.rule);
  auto sigma = match(rule.lhs, cur);
  if (!sigma) throw Error("stale-redex", rdx.str(R) + " does not match in " + t.str());
  return replace_at(t, apply_subst(*sigma, rule.rhs), rdx.root);
}

Term parallel_step(const Term& t, const std::vector<Redex>& U, const Trs& R) {
  for (std::size_t i = 0; i < U.size(); ++i)
    for (std::size_t j = i + 1; j < U.size(); ++j)
      if (!U[i].root.parallel(U[j].root))
        throw Error("not-parallel", U[i].str(R) + " and " + U[j].str(R) + " have comparable roots");
  for (auto& r : U)
    if (!is_redex(t, r, R)) throw Error("stale-redex", r.str(R) + " does not match in " + t.str());
  Term cur = t;
  for (auto& r : U) cur = rewrite_at(cur, r, R);
  return cur;
}

} // namespace infrew
