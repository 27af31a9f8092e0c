#include <algorithm>
#include <functional>
#include <limits>
#include <map>

#include "graph_util.hpp"
#include "infrew/clusters.hpp"
#include "infrew/error.hpp"

namespace infrew {

namespace {

// A labelled redex set read as a position automaton.  Each entry accepts
// prefix (finite) or prefix·loop^k (family); an item is an entry with an
// offset into prefix·loop·loop·...
struct Entry {
  bool contract;
  std::size_t rule;
  std::vector<int> prefix;
  std::vector<int> loop;
};

using Item = std::pair<std::uint32_t, std::uint32_t>;
using State = std::vector<Item>;

struct Automaton {
  std::vector<Entry> entries;
  std::map<State, std::uint32_t> ids;
  std::vector<State> states;

  std::uint32_t intern(State s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    auto [it, fresh] = ids.emplace(s, static_cast<std::uint32_t>(states.size()));
    if (fresh) states.push_back(std::move(s));
    return it->second;
  }

  bool accepts(const Item& it) const { return it.second == entries[it.first].prefix.size(); }

  std::uint32_t step(std::uint32_t sid, int child) {
    State next;
    for (auto [e, off] : states[sid]) {
      const Entry& en = entries[e];
      std::size_t total = en.prefix.size() + en.loop.size();
      if (en.loop.empty() && off == en.prefix.size()) continue;
      int want = off < en.prefix.size() ? en.prefix[off] : en.loop[off - en.prefix.size()];
      if (want != child) continue;
      std::size_t n = off + 1;
      if (!en.loop.empty() && n == total) n = en.prefix.size();
      next.emplace_back(e, static_cast<std::uint32_t>(n));
    }
    return intern(std::move(next));
  }
};

void check_member(const Term& t, const Redex& r, const Trs& R) {
  if (!is_redex(t, r, R)) throw Error("stale-redex", r.str(R) + " does not match in " + t.str());
}

void check_family(const Term& t, const RedexFamily& f, const Trs& R) {
  if (f.period.is_root()) throw Error("invalid-family", f.str(R) + " has an empty period");
  for (std::size_t k = 0; k < 4; ++k) check_member(t, f.instance(k), R);
}

} // namespace

LabelledTerm label_redexes(const Term& t, const RedexSet& contract, const RedexSet& track, const Trs& R) {
  Automaton A;
  auto add = [&](const RedexSet& S, bool c) {
    for (auto& r : S.finite) {
      check_member(t, r, R);
      A.entries.push_back({c, r.rule, r.root.path, {}});
    }
    for (auto& f : S.families) {
      check_family(t, f, R);
      A.entries.push_back({c, f.rule, f.generator.path, f.period.path});
    }
  };
  add(contract, true);
  add(track, false);

  State init;
  for (std::uint32_t e = 0; e < A.entries.size(); ++e) init.emplace_back(e, 0);
  std::uint32_t s0 = A.intern(std::move(init));

  const auto& g = t.graph();
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> ids;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> todo;
  Term::Graph out;
  LabelledTerm lt;
  auto get = [&](std::uint32_t node, std::uint32_t state) {
    auto [it, fresh] = ids.emplace(std::make_pair(node, state), static_cast<std::uint32_t>(out.size()));
    if (fresh) {
      out.emplace_back();
      lt.contract.emplace_back();
      lt.track.emplace_back();
      todo.emplace_back(node, state);
    }
    return it->second;
  };
  get(t.root(), s0);
  for (std::size_t k = 0; k < todo.size(); ++k) {
    auto [node, state] = todo[k];
    TermNode copy{g[node].is_var, g[node].name, {}};
    for (std::size_t i = 0; i < g[node].args.size(); ++i)
      copy.args.push_back(get(g[node].args[i], A.step(state, static_cast<int>(i + 1))));
    out[k] = std::move(copy);
    for (auto& it : A.states[state]) {
      if (!A.accepts(it)) continue;
      const Entry& en = A.entries[it.first];
      auto& slot = en.contract ? lt.contract[k] : lt.track[k];
      if (slot && *slot != en.rule && en.contract)
        throw Error("not-a-multiredex", "two rules contracted at the same position");
      slot = en.rule;
    }
  }
  lt.term = Term(std::make_shared<const Term::Graph>(std::move(out)), 0);
  return lt;
}

LabelledTerm develop_labelled(const LabelledTerm& lt, const Trs& R) {
  const auto& g = lt.term.graph();
  const std::uint32_t n = static_cast<std::uint32_t>(g.size());
  const auto live = detail::reachable_mask(g, lt.term.root());
  const auto inf = detail::infinitely_occurring(g, lt.term.root());

  // match every live contract label; collapsing ones become aliases
  std::vector<std::map<std::string, std::uint32_t>> binds(n);
  std::vector<std::optional<std::uint32_t>> alias(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (!live[v] || !lt.contract[v]) continue;
    const Rule& rule = R.rule(*lt.contract[v]);
    if (rule.collapsing() && inf[v])
      throw Error("would-not-converge",
                  "collapsing rule " + rule.name + " is contracted at infinitely many positions");
    auto& b = binds[v];
    std::function<void(const Term&, std::uint32_t, bool)> go = [&](const Term& pat, std::uint32_t m, bool top) {
      if (pat.is_var()) {
        if (!b.emplace(pat.symbol(), m).second) throw Error("not-left-linear", rule.str());
        return;
      }
      if (g[m].is_var || g[m].name != pat.symbol() || g[m].args.size() != pat.arity())
        throw Error("stale-redex", "rule " + rule.name + " does not match its labelled position");
      if (!top && lt.contract[m]) throw Error("not-a-multiredex", "contracted redexes overlap");
      for (std::size_t i = 1; i <= pat.arity(); ++i) go(pat.arg(i), g[m].args[i - 1], false);
    };
    go(rule.lhs, v, true);
    if (rule.collapsing()) alias[v] = b.at(rule.rhs.symbol());
  }

  auto rep = [&](std::uint32_t v) {
    for (std::uint32_t hops = 0; alias[v]; ++hops) {
      if (hops > n) throw Error("would-not-converge", "collapsing redexes form a cycle");
      v = *alias[v];
    }
    return v;
  };

  Term::Graph out;
  LabelledTerm res;
  std::vector<std::int64_t> out_of(n, -1);
  std::vector<std::uint32_t> work;
  auto fresh_node = [&]() {
    out.emplace_back();
    res.track.emplace_back();
    return static_cast<std::uint32_t>(out.size() - 1);
  };
  auto get = [&](std::uint32_t v) {
    v = rep(v);
    if (out_of[v] < 0) {
      out_of[v] = fresh_node();
      work.push_back(v);
    }
    return static_cast<std::uint32_t>(out_of[v]);
  };

  std::uint32_t root = get(lt.term.root());
  while (!work.empty()) {
    std::uint32_t v = work.back();
    work.pop_back();
    auto id = static_cast<std::uint32_t>(out_of[v]);
    if (!lt.contract[v]) {
      TermNode copy{g[v].is_var, g[v].name, {}};
      for (auto c : g[v].args) copy.args.push_back(get(c));
      out[id] = std::move(copy);
      res.track[id] = lt.track[v];
      continue;
    }
    // instantiate the right-hand side
    const Term& rhs = R.rule(*lt.contract[v]).rhs;
    const auto& rg = rhs.graph();
    std::map<std::uint32_t, std::uint32_t> at{{rhs.root(), id}};
    std::vector<std::uint32_t> stack{rhs.root()};
    while (!stack.empty()) {
      auto w = stack.back();
      stack.pop_back();
      TermNode node{false, rg[w].name, {}};
      for (auto c : rg[w].args) {
        if (rg[c].is_var) {
          node.args.push_back(get(binds[v].at(rg[c].name)));
          continue;
        }
        auto [it, added] = at.emplace(c, 0);
        if (added) {
          it->second = fresh_node();
          stack.push_back(c);
        }
        node.args.push_back(it->second);
      }
      out[at.at(w)] = std::move(node);
    }
  }
  res.term = Term(std::make_shared<const Term::Graph>(std::move(out)), root);
  res.contract.assign(res.track.size(), std::nullopt);
  return res;
}

LabelledTerm promote_tracked(const LabelledTerm& lt) {
  LabelledTerm out = lt;
  out.contract = lt.track;
  out.track.assign(lt.track.size(), std::nullopt);
  return out;
}

bool tracked_finite(const LabelledTerm& lt) {
  const auto inf = detail::infinitely_occurring(lt.term.graph(), lt.term.root());
  for (std::size_t v = 0; v < inf.size(); ++v)
    if (inf[v] && lt.track[v]) return false;
  return true;
}

std::vector<Redex> tracked_redexes(const LabelledTerm& lt, std::size_t depth_bound) {
  const auto& g = lt.term.graph();
  // only descend where a tracked node is still reachable
  std::vector<bool> useful(g.size(), false);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (useful[v]) continue;
      bool u = lt.track[v].has_value();
      for (auto c : g[v].args) u = u || useful[c];
      if (u) useful[v] = changed = true;
    }
  }
  std::vector<Redex> out;
  std::vector<std::pair<std::uint32_t, std::vector<int>>> stack;
  if (useful[lt.term.root()]) stack.emplace_back(lt.term.root(), std::vector<int>{});
  while (!stack.empty()) {
    auto [v, path] = std::move(stack.back());
    stack.pop_back();
    if (lt.track[v]) out.push_back(Redex{Position(path), *lt.track[v]});
    if (path.size() == depth_bound) continue;
    for (std::size_t i = 0; i < g[v].args.size(); ++i) {
      if (!useful[g[v].args[i]]) continue;
      auto p = path;
      p.push_back(static_cast<int>(i + 1));
      stack.emplace_back(g[v].args[i], std::move(p));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Term develop(const Term& t, const MultiRedex& U, const Trs& R) {
  if (U.empty()) return t;
  return develop_labelled(label_redexes(t, U, {}, R), R).term.minimized();
}

std::vector<Redex> residual_multiredex(const Term& t, const MultiRedex& U, const MultiRedex& V, const Trs& R,
                                       std::size_t depth_bound) {
  auto res = develop_labelled(label_redexes(t, V, U, R), R);
  return tracked_redexes(res, tracked_finite(res) ? std::numeric_limits<std::size_t>::max() : depth_bound);
}

} // namespace infrew
