#include "infrew/term.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "infrew/error.hpp"

namespace infrew {

// ---------------------------------------------------------------- positions

Position Position::child(int i) const {
  Position q = *this;
  q.path.push_back(i);
  return q;
}

Position Position::concat(const Position& q) const {
  Position r = *this;
  r.path.insert(r.path.end(), q.path.begin(), q.path.end());
  return r;
}

Position Position::prefix(std::size_t n) const {
  return Position(std::vector<int>(path.begin(), path.begin() + std::min(n, path.size())));
}

bool Position::is_prefix_of(const Position& q) const {
  return depth() <= q.depth() && std::equal(path.begin(), path.end(), q.path.begin());
}

std::string Position::str() const {
  if (path.empty()) return "ε";
  bool small = std::all_of(path.begin(), path.end(), [](int i) { return i >= 1 && i <= 9; });
  std::string s;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (!small && k > 0) s += '.';
    s += std::to_string(path[k]);
  }
  return s;
}

Position Position::parse(std::string_view s) {
  if (s.empty() || s == "ε" || s == "e" || s == "eps") return {};
  Position p;
  if (s.find('.') == std::string_view::npos) {
    for (char c : s) {
      if (c < '1' || c > '9') throw Error("bad-position", std::string(s));
      p.path.push_back(c - '0');
    }
    return p;
  }
  std::size_t i = 0;
  while (i <= s.size()) {
    std::size_t j = s.find('.', i);
    if (j == std::string_view::npos) j = s.size();
    std::string part(s.substr(i, j - i));
    if (part.empty() || !std::all_of(part.begin(), part.end(), ::isdigit))
      throw Error("bad-position", std::string(s));
    p.path.push_back(std::stoi(part));
    i = j + 1;
  }
  return p;
}

// ---------------------------------------------------------------- graph helpers

namespace {

using Graph = Term::Graph;

std::vector<std::uint32_t> reachable(const Graph& g, std::uint32_t root) {
  std::vector<char> seen(g.size(), 0);
  std::vector<std::uint32_t> order, stack{root};
  while (!stack.empty()) {
    auto n = stack.back();
    stack.pop_back();
    if (seen[n]) continue;
    seen[n] = 1;
    order.push_back(n);
    for (auto it = g[n].args.rbegin(); it != g[n].args.rend(); ++it)
      if (!seen[*it]) stack.push_back(*it);
  }
  return order;
}

/// Copies the reachable parts of several terms into one graph.
class Merger {
public:
  std::uint32_t add(const Term& t) {
    auto& remap = maps_[t.graph_ptr().get()];
    for (auto n : reachable(t.graph(), t.root())) {
      if (remap.count(n)) continue;
      remap[n] = static_cast<std::uint32_t>(nodes.size());
      nodes.push_back(t.graph()[n]);
      pending_.push_back({t.graph_ptr().get(), remap[n]});
    }
    fix();
    return remap.at(t.root());
  }

  Graph nodes;

private:
  void fix() {
    for (auto [src, idx] : pending_) {
      auto& remap = maps_[src];
      for (auto& a : nodes[idx].args) a = remap.at(a);
    }
    pending_.clear();
  }

  std::unordered_map<const Graph*, std::unordered_map<std::uint32_t, std::uint32_t>> maps_;
  std::vector<std::pair<const Graph*, std::uint32_t>> pending_;
};

Term make(Graph g, std::uint32_t root) {
  return Term(std::make_shared<const Graph>(std::move(g)), root);
}

} // namespace

// ---------------------------------------------------------------- Term

Term Term::var(std::string name) {
  Graph g{TermNode{true, std::move(name), {}}};
  return make(std::move(g), 0);
}

Term Term::fun(std::string symbol, std::vector<Term> args) {
  Merger m;
  std::vector<std::uint32_t> ids;
  ids.reserve(args.size());
  for (auto& a : args) ids.push_back(m.add(a));
  auto root = static_cast<std::uint32_t>(m.nodes.size());
  m.nodes.push_back(TermNode{false, std::move(symbol), std::move(ids)});
  return make(std::move(m.nodes), root);
}

Term Term::from_graph(Graph nodes, std::uint32_t root) {
  if (root >= nodes.size()) throw Error("bad-graph", "root out of range");
  std::map<std::string, std::size_t> ar;
  for (auto& n : nodes) {
    if (n.is_var && !n.args.empty()) throw Error("bad-graph", "variable with arguments");
    for (auto a : n.args)
      if (a >= nodes.size()) throw Error("bad-graph", "child index out of range");
    if (!n.is_var) {
      auto [it, fresh] = ar.emplace(n.name, n.args.size());
      if (!fresh && it->second != n.args.size())
        throw Error("arity-mismatch", "symbol " + n.name + " used with different arities");
    }
  }
  return make(std::move(nodes), root).compact();
}

Term Term::arg(std::size_t i) const {
  const auto& n = node();
  if (i < 1 || i > n.args.size()) throw Error("invalid-position", "no argument " + std::to_string(i));
  return Term(g_, n.args[i - 1]);
}

std::vector<Term> Term::args() const {
  std::vector<Term> r;
  for (auto a : node().args) r.emplace_back(g_, a);
  return r;
}

bool Term::is_finite() const {
  const auto& g = *g_;
  std::vector<char> state(g.size(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{root_, 0}};
  state[root_] = 1;
  while (!stack.empty()) {
    auto& [n, k] = stack.back();
    if (k < g[n].args.size()) {
      auto c = g[n].args[k++];
      if (state[c] == 1) return false;
      if (state[c] == 0) {
        state[c] = 1;
        stack.push_back({c, 0});
      }
    } else {
      state[n] = 2;
      stack.pop_back();
    }
  }
  return true;
}

std::size_t Term::height() const {
  if (!is_finite()) throw Error("infinite-term", "height of an infinite term");
  std::unordered_map<std::uint32_t, std::size_t> memo;
  std::function<std::size_t(std::uint32_t)> h = [&](std::uint32_t n) -> std::size_t {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    std::size_t best = 0;
    for (auto a : (*g_)[n].args) best = std::max(best, h(a) + 1);
    return memo[n] = best;
  };
  return h(root_);
}

std::size_t Term::size() const { return reachable(*g_, root_).size(); }

std::set<std::string> Term::variables() const {
  std::set<std::string> vs;
  for (auto n : reachable(*g_, root_))
    if ((*g_)[n].is_var) vs.insert((*g_)[n].name);
  return vs;
}

Term Term::compact() const {
  Merger m;
  auto r = m.add(*this);
  return make(std::move(m.nodes), r);
}

Term Term::minimized() const {
  Term c = compact();
  const auto& g = c.graph();
  std::size_t n = g.size();
  std::vector<std::size_t> cls(n);
  {
    std::map<std::tuple<bool, std::string, std::size_t>, std::size_t> ids;
    for (std::size_t i = 0; i < n; ++i)
      cls[i] = ids.emplace(std::tuple{g[i].is_var, g[i].name, g[i].args.size()}, ids.size()).first->second;
  }
  std::size_t count = 0;
  for (;;) {
    std::map<std::vector<std::size_t>, std::size_t> ids;
    std::vector<std::size_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> key{cls[i]};
      for (auto a : g[i].args) key.push_back(cls[a]);
      next[i] = ids.emplace(std::move(key), ids.size()).first->second;
    }
    cls.swap(next);
    if (ids.size() == count) break;
    count = ids.size();
  }
  Graph out(count);
  std::vector<char> done(count, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (done[cls[i]]) continue;
    done[cls[i]] = 1;
    TermNode node = g[i];
    for (auto& a : node.args) a = static_cast<std::uint32_t>(cls[a]);
    out[cls[i]] = std::move(node);
  }
  return make(std::move(out), static_cast<std::uint32_t>(cls[c.root()])).compact();
}

std::string Term::str() const {
  Term m = minimized();
  const auto& g = m.graph();
  // cycle entry points = targets of back edges in a DFS from the root
  std::vector<char> state(g.size(), 0);
  std::vector<std::uint32_t> order;
  std::set<std::uint32_t> named;
  std::function<void(std::uint32_t)> dfs = [&](std::uint32_t v) {
    state[v] = 1;
    order.push_back(v);
    for (auto a : g[v].args) {
      if (state[a] == 1) named.insert(a);
      else if (state[a] == 0) dfs(a);
    }
    state[v] = 2;
  };
  dfs(m.root());

  std::map<std::uint32_t, std::string> names;
  if (!named.empty()) {
    std::set<std::string> used;
    for (auto& nd : g) used.insert(nd.name);
    named.insert(m.root());
    int k = 1;
    for (auto v : order) {
      if (!named.count(v)) continue;
      std::string nm;
      do nm = "X" + std::to_string(k++);
      while (used.count(nm));
      names[v] = nm;
    }
  }

  std::function<void(std::ostringstream&, std::uint32_t, bool)> body =
      [&](std::ostringstream& os, std::uint32_t v, bool top) {
        if (!top && names.count(v)) {
          os << names[v];
          return;
        }
        os << g[v].name;
        if (g[v].args.empty()) return;
        os << '(';
        for (std::size_t i = 0; i < g[v].args.size(); ++i) {
          if (i) os << ", ";
          body(os, g[v].args[i], false);
        }
        os << ')';
      };

  std::ostringstream os;
  if (names.empty()) {
    body(os, m.root(), true);
    return os.str();
  }
  os << "rec ";
  bool first = true;
  for (auto v : order) {
    if (!names.count(v)) continue;
    if (!first) os << "; ";
    first = false;
    os << names[v] << " = ";
    body(os, v, true);
  }
  return os.str();
}

// ---------------------------------------------------------------- equality

bool bisim_equal(const Term& s, const Term& t) {
  const auto& gs = s.graph();
  const auto& gt = t.graph();
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{s.root(), t.root()}};
  while (!stack.empty()) {
    auto pr = stack.back();
    stack.pop_back();
    if (!seen.insert(pr).second) continue;
    const auto& a = gs[pr.first];
    const auto& b = gt[pr.second];
    if (a.is_var != b.is_var || a.name != b.name || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i) stack.push_back({a.args[i], b.args[i]});
  }
  return true;
}

namespace {

/// Depth of the shallowest disagreement, up to `limit`.
std::optional<std::size_t> first_difference(const Term& s, const Term& t, std::size_t limit) {
  const auto& gs = s.graph();
  const auto& gt = t.graph();
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::deque<std::tuple<std::uint32_t, std::uint32_t, std::size_t>> queue{{s.root(), t.root(), 0}};
  while (!queue.empty()) {
    auto [x, y, d] = queue.front();
    queue.pop_front();
    if (!seen.insert({x, y}).second) continue;
    const auto& a = gs[x];
    const auto& b = gt[y];
    if (a.is_var != b.is_var || a.name != b.name || a.args.size() != b.args.size()) return d;
    if (d == limit) continue;
    for (std::size_t i = 0; i < a.args.size(); ++i) queue.push_back({a.args[i], b.args[i], d + 1});
  }
  return std::nullopt;
}

} // namespace

double Distance::value() const { return depth ? std::ldexp(1.0, -static_cast<int>(*depth)) : 0.0; }

std::string Distance::str() const { return depth ? "2^-" + std::to_string(*depth) : "0"; }

Distance metric_distance(const Term& s, const Term& t, std::size_t probe_depth) {
  // Breadth-first search over the product graph finds the least differing
  // depth exactly; the probe only caps the search for huge inputs.
  std::size_t cap = std::max<std::size_t>(probe_depth, s.size() * t.size() + 1);
  return Distance{first_difference(s, t, cap)};
}

bool agree_to_depth(const Term& s, const Term& t, std::size_t d) {
  return !first_difference(s, t, d).has_value();
}

Term truncate(const Term& t, std::size_t d, const std::string& marker) {
  std::function<Term(const Term&, std::size_t)> go = [&](const Term& u, std::size_t k) -> Term {
    if (u.is_var()) return Term::var(u.symbol());
    if (k == d && u.arity() > 0) return Term::fun(marker);
    std::vector<Term> as;
    for (auto& a : u.args()) as.push_back(go(a, k + 1));
    return Term::fun(u.symbol(), std::move(as));
  };
  return go(t, 0);
}

// ---------------------------------------------------------------- positions

std::set<Position> positions_up_to(const Term& t, std::size_t d) {
  std::set<Position> out;
  const auto& g = t.graph();
  std::vector<int> path;
  std::function<void(std::uint32_t)> go = [&](std::uint32_t n) {
    out.insert(Position(path));
    if (path.size() == d) return;
    for (std::size_t i = 0; i < g[n].args.size(); ++i) {
      path.push_back(static_cast<int>(i + 1));
      go(g[n].args[i]);
      path.pop_back();
    }
  };
  go(t.root());
  return out;
}

namespace {

std::optional<std::uint32_t> walk(const Term& t, const Position& p) {
  const auto& g = t.graph();
  auto n = t.root();
  for (int i : p.path) {
    if (i < 1 || static_cast<std::size_t>(i) > g[n].args.size()) return std::nullopt;
    n = g[n].args[i - 1];
  }
  return n;
}

} // namespace

bool has_position(const Term& t, const Position& p) { return walk(t, p).has_value(); }

const TermNode& node_at(const Term& t, const Position& p) {
  auto n = walk(t, p);
  if (!n) throw Error("invalid-position", p.str() + " not in " + t.str());
  return t.graph()[*n];
}

Term subterm_at(const Term& t, const Position& p) {
  auto n = walk(t, p);
  if (!n) throw Error("invalid-position", p.str() + " not in " + t.str());
  return Term(t.graph_ptr(), *n).compact();
}

Term replace_at(const Term& s, const Term& t, const Position& p) {
  if (!walk(s, p)) throw Error("invalid-position", p.str() + " not in " + s.str());
  Merger m;
  auto src = m.add(s);
  auto repl = m.add(t);
  // fresh copies of the nodes along p; everything off the path stays shared
  std::vector<std::uint32_t> along{src};
  for (int i : p.path) along.push_back(m.nodes[along.back()].args[i - 1]);
  std::uint32_t below = repl;
  for (std::size_t k = p.depth(); k-- > 0;) {
    TermNode copy = m.nodes[along[k]];
    copy.args[p.path[k] - 1] = below;
    below = static_cast<std::uint32_t>(m.nodes.size());
    m.nodes.push_back(std::move(copy));
  }
  return make(std::move(m.nodes), below).compact();
}

Term apply_subst(const Substitution& sigma, const Term& t) {
  if (sigma.empty()) return t;
  Merger m;
  auto root = m.add(t);
  auto base = m.nodes.size();
  std::map<std::string, std::uint32_t> target;
  for (auto& [x, u] : sigma) target[x] = m.add(u);
  std::vector<std::uint32_t> redirect(m.nodes.size());
  for (std::uint32_t i = 0; i < redirect.size(); ++i) {
    redirect[i] = i;
    if (i < base && m.nodes[i].is_var) {
      auto it = target.find(m.nodes[i].name);
      if (it != target.end()) redirect[i] = it->second;
    }
  }
  for (std::uint32_t i = 0; i < base; ++i)
    for (auto& a : m.nodes[i].args) a = redirect[a];
  return make(std::move(m.nodes), redirect[root]).compact();
}

// ---------------------------------------------------------------- context

const std::string Context::hole_symbol = "[]";

Context Context::around(const Term& t, const Position& p) {
  return Context{replace_at(t, Term::fun(hole_symbol), p), p};
}

// ---------------------------------------------------------------- signature

void Signature::add(const Term& t) {
  for (auto n : reachable(t.graph(), t.root())) {
    const auto& nd = t.graph()[n];
    if (nd.is_var) continue;
    auto [it, fresh] = arity.emplace(nd.name, nd.args.size());
    if (!fresh && it->second != nd.args.size())
      throw Error("arity-mismatch", "symbol " + nd.name + " used with arities " +
                                        std::to_string(it->second) + " and " +
                                        std::to_string(nd.args.size()));
  }
}

// ---------------------------------------------------------------- parser

bool is_variable_name(std::string_view id) {
  if (id.empty() || (id[0] != 'x' && id[0] != 'y' && id[0] != 'z')) return false;
  return std::all_of(id.begin() + 1, id.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '\''; });
}

namespace {

class Parser {
public:
  explicit Parser(std::string_view s) : s_(s) {}

  Term parse() {
    skip();
    if (peek_word() == "rec") {
      pos_ += 3;
      return parse_rec();
    }
    std::vector<Raw> pool;
    auto r = parse_raw(pool);
    expect_end();
    std::map<std::string, std::size_t> none;
    return build(pool, {r}, none, 0);
  }

private:
  struct Raw {
    std::string name;
    std::vector<std::size_t> args;
    bool has_parens = false;
  };

  Term parse_rec() {
    std::vector<Raw> pool;
    std::vector<std::string> names;
    std::vector<std::size_t> bodies;
    for (;;) {
      skip();
      auto nm = ident();
      skip();
      if (!eat('=')) fail("expected '='");
      bodies.push_back(parse_raw(pool));
      names.push_back(nm);
      skip();
      if (!eat(';')) break;
      skip();
      if (pos_ == s_.size()) break;  // trailing ';'
    }
    expect_end();
    std::map<std::string, std::size_t> eq;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (!eq.emplace(names[i], i).second) fail("duplicate equation " + names[i]);
    return build(pool, bodies, eq, 0);
  }

  std::size_t parse_raw(std::vector<Raw>& pool) {
    skip();
    Raw r;
    r.name = ident();
    skip();
    if (eat('(')) {
      r.has_parens = true;
      skip();
      if (!eat(')')) {
        for (;;) {
          r.args.push_back(parse_raw(pool));
          skip();
          if (eat(')')) break;
          if (!eat(',')) fail("expected ',' or ')'");
        }
      }
    }
    pool.push_back(std::move(r));
    return pool.size() - 1;
  }

  Term build(const std::vector<Raw>& pool, const std::vector<std::size_t>& bodies,
             const std::map<std::string, std::size_t>& eq, std::size_t entry) {
    // one graph node per raw node; references are resolved through the
    // equation table, chasing X = Y aliases with a guardedness check
    Graph g(pool.size());
    std::vector<std::optional<std::size_t>> ref(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& r = pool[i];
      if (auto it = eq.find(r.name); it != eq.end()) {
        if (r.has_parens) fail("recursion reference " + r.name + " applied to arguments");
        ref[i] = it->second;
        continue;
      }
      if (is_variable_name(r.name)) {
        if (r.has_parens) fail("variable " + r.name + " applied to arguments");
        g[i] = TermNode{true, r.name, {}};
      } else {
        TermNode n{false, r.name, {}};
        for (auto a : r.args) n.args.push_back(static_cast<std::uint32_t>(a));
        g[i] = std::move(n);
      }
    }
    auto resolve = [&](std::size_t i) {
      std::set<std::size_t> seen;
      while (ref[i]) {
        if (!seen.insert(*ref[i]).second) fail("unguarded recursion");
        i = bodies[*ref[i]];
      }
      return static_cast<std::uint32_t>(i);
    };
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!ref[i])
        for (auto& a : g[i].args) a = resolve(a);
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (ref[i]) g[i] = TermNode{false, "_ref", {}};  // unreachable after resolution
    return Term::from_graph(std::move(g), resolve(bodies[entry]));
  }

  std::string_view peek_word() {
    std::size_t j = pos_;
    while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
    if (j < s_.size() && s_[j] == '\'') return {};
    return s_.substr(pos_, j - pos_);
  }

  std::string ident() {
    std::size_t j = pos_;
    auto ok = [&](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; };
    if (j < s_.size() && s_.substr(j, 2) == "[]") {
      pos_ += 2;
      return Context::hole_symbol;
    }
    while (j < s_.size() && ok(s_[j])) ++j;
    if (j == pos_) fail("expected identifier");
    std::string r(s_.substr(pos_, j - pos_));
    pos_ = j;
    return r;
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_end() {
    skip();
    if (pos_ != s_.size()) fail("trailing input");
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw Error("parse-error", msg + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

} // namespace

Term parse_term(std::string_view text) { return Parser(text).parse(); }

} // namespace infrew
