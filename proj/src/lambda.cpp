#include "infrew/lambda.hpp"

#include <algorithm>
#include <functional>

#include "infrew/error.hpp"

namespace infrew {

using i64 = std::int64_t;

// ---------------------------------------------------------------- terms

Lambda::Lambda() : n_(std::make_shared<const Node>(Node{Kind::Trunc, 0, std::nullopt, nullptr, nullptr})) {}

Lambda Lambda::var(i64 i) { return Lambda(std::make_shared<const Node>(Node{Kind::Var, i, std::nullopt, nullptr, nullptr})); }

Lambda Lambda::app(Lambda f, Lambda a) {
  return Lambda(std::make_shared<const Node>(
      Node{Kind::App, 0, std::nullopt, std::make_shared<const Lambda>(std::move(f)), std::make_shared<const Lambda>(std::move(a))}));
}

Lambda Lambda::apps(Lambda f, const std::vector<Lambda>& args) {
  for (auto& a : args) f = app(std::move(f), a);
  return f;
}

Lambda Lambda::abs(i64 i, Lambda body) {
  return Lambda(std::make_shared<const Node>(
      Node{Kind::Abs, i, std::nullopt, std::make_shared<const Lambda>(std::move(body)), nullptr}));
}

Lambda Lambda::trunc(std::optional<i64> bound) {
  return Lambda(std::make_shared<const Node>(Node{Kind::Trunc, 0, bound, nullptr, nullptr}));
}

const Lambda& Lambda::child(int i) const {
  if (is(Kind::App) && (i == 1 || i == 2)) return i == 1 ? fun() : arg();
  if (is(Kind::Abs) && i == 1) return body();
  throw Error("invalid-position", "no child " + std::to_string(i) + " below " + str());
}

std::size_t Lambda::height() const {
  switch (kind()) {
    case Kind::App: return 1 + std::max(fun().height(), arg().height());
    case Kind::Abs: return 1 + body().height();
    default: return 0;
  }
}

namespace {

std::string name(i64 i) { return "x" + std::to_string(i); }

void print(const Lambda& t, std::string& out) {
  switch (t.kind()) {
    case Lambda::Kind::Var: out += name(t.index()); return;
    case Lambda::Kind::Trunc: out += "_"; return;
    case Lambda::Kind::Abs:
      out += "\\" + name(t.index()) + ". ";
      print(t.body(), out);
      return;
    case Lambda::Kind::App: {
      std::vector<const Lambda*> spine;
      const Lambda* h = &t;
      while (h->is(Lambda::Kind::App)) {
        spine.push_back(&h->arg());
        h = &h->fun();
      }
      out += "(";
      auto item = [&](const Lambda& x) {
        if (x.is(Lambda::Kind::Abs)) {
          out += "(";
          print(x, out);
          out += ")";
        } else {
          print(x, out);
        }
      };
      item(*h);
      for (auto it = spine.rbegin(); it != spine.rend(); ++it) {
        out += " ";
        item(**it);
      }
      out += ")";
      return;
    }
  }
}

} // namespace

std::string Lambda::str() const {
  std::string out;
  print(*this, out);
  return out;
}

bool alpha_equal(const Lambda& s, const Lambda& t, std::size_t limit) {
  // binder stacks; a bound variable is identified by its binder's depth
  std::vector<i64> bs, bt;
  std::function<bool(const Lambda&, const Lambda&, std::size_t)> go = [&](const Lambda& a, const Lambda& b,
                                                                          std::size_t d) -> bool {
    if (d >= limit) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Lambda::Kind::Trunc: return true;
      case Lambda::Kind::Var: {
        auto find = [](const std::vector<i64>& st, i64 i) -> std::ptrdiff_t {
          for (std::size_t k = st.size(); k-- > 0;)
            if (st[k] == i) return static_cast<std::ptrdiff_t>(k);
          return -1;
        };
        auto ka = find(bs, a.index()), kb = find(bt, b.index());
        return ka == kb && (ka >= 0 || a.index() == b.index());
      }
      case Lambda::Kind::App: return go(a.fun(), b.fun(), d + 1) && go(a.arg(), b.arg(), d + 1);
      case Lambda::Kind::Abs: {
        bs.push_back(a.index());
        bt.push_back(b.index());
        bool ok = go(a.body(), b.body(), d + 1);
        bs.pop_back();
        bt.pop_back();
        return ok;
      }
    }
    return false;
  };
  return go(s, t, 0);
}

bool same_term(const Lambda& s, const Lambda& t) {
  if (s.kind() != t.kind()) return false;
  switch (s.kind()) {
    case Lambda::Kind::Trunc: return s.bound() == t.bound();
    case Lambda::Kind::Var: return s.index() == t.index();
    case Lambda::Kind::App: return same_term(s.fun(), t.fun()) && same_term(s.arg(), t.arg());
    case Lambda::Kind::Abs: return s.index() == t.index() && same_term(s.body(), t.body());
  }
  return false;
}

const Lambda& lambda_at(const Lambda& t, const Position& p) {
  const Lambda* cur = &t;
  for (int i : p.path) cur = &cur->child(i);
  return *cur;
}

Lambda replace_at(const Lambda& t, const Position& p, const Lambda& s) {
  std::function<Lambda(const Lambda&, std::size_t)> go = [&](const Lambda& u, std::size_t k) -> Lambda {
    if (k == p.depth()) return s;
    int i = p.path[k];
    const Lambda& c = u.child(i);
    if (u.is(Lambda::Kind::Abs)) return Lambda::abs(u.index(), go(c, k + 1));
    return i == 1 ? Lambda::app(go(c, k + 1), u.arg()) : Lambda::app(u.fun(), go(c, k + 1));
  };
  return go(t, 0);
}

// ---------------------------------------------------------------- substitution

std::optional<bool> occurs_free(const Lambda& t, i64 i) {
  switch (t.kind()) {
    case Lambda::Kind::Var: return t.index() == i;
    case Lambda::Kind::Trunc:
      if (t.bound() && *t.bound() < i) return false;
      return std::nullopt;
    case Lambda::Kind::Abs:
      if (t.index() == i) return false;
      return occurs_free(t.body(), i);
    case Lambda::Kind::App: {
      auto a = occurs_free(t.fun(), i), b = occurs_free(t.arg(), i);
      if (a == true || b == true) return true;
      if (!a || !b) return std::nullopt;
      return false;
    }
  }
  return std::nullopt;
}

namespace {

/// Largest index mentioned anywhere (variables, binders, bounds); nullopt
/// when an unbounded truncation leaf occurs.
std::optional<i64> max_index(const Lambda& t, i64 floor) {
  switch (t.kind()) {
    case Lambda::Kind::Var: return std::max(floor, t.index());
    case Lambda::Kind::Trunc:
      if (!t.bound()) return std::nullopt;
      return std::max(floor, *t.bound());
    case Lambda::Kind::Abs: return max_index(t.body(), std::max(floor, t.index()));
    case Lambda::Kind::App: {
      auto a = max_index(t.fun(), floor);
      if (!a) return a;
      return max_index(t.arg(), *a);
    }
  }
  return std::nullopt;
}

Lambda subst(const Lambda& m, i64 x, const Lambda& n, i64& fresh) {
  switch (m.kind()) {
    case Lambda::Kind::Var: return m.index() == x ? n : m;
    case Lambda::Kind::Trunc: {
      if (m.bound() && *m.bound() < x) return m;
      if (!m.bound()) return m;
      // the hidden part may now contain the free variables of n
      auto top = max_index(n, *m.bound());
      return Lambda::trunc(top);
    }
    case Lambda::Kind::App: return Lambda::app(subst(m.fun(), x, n, fresh), subst(m.arg(), x, n, fresh));
    case Lambda::Kind::Abs: {
      i64 y = m.index();
      if (y == x || occurs_free(m.body(), x) == false) return m;
      if (occurs_free(n, y) == false) return Lambda::abs(y, subst(m.body(), x, n, fresh));
      i64 z = fresh++;
      Lambda renamed = subst(m.body(), y, Lambda::var(z), fresh);
      return Lambda::abs(z, subst(renamed, x, n, fresh));
    }
  }
  return m;
}

} // namespace

Lambda substitute(const Lambda& m, i64 i, const Lambda& n) {
  if (n.is(Lambda::Kind::Var) && n.index() == i) return m;
  auto a = max_index(m, i), b = max_index(n, i);
  if (!a || !b) {
    // renaming is only needed when a binder of m could capture
    bool risky = false;
    std::function<void(const Lambda&)> scan = [&](const Lambda& t) {
      if (t.is(Lambda::Kind::Abs)) {
        if (occurs_free(n, t.index()) != false) risky = true;
        scan(t.body());
      } else if (t.is(Lambda::Kind::App)) {
        scan(t.fun());
        scan(t.arg());
      }
    };
    scan(m);
    if (risky) throw Error("undecidable-freeness", "no fresh variable is guaranteed below a truncation leaf");
  }
  i64 fresh = std::max(a.value_or(i), b.value_or(i)) + 1;
  return subst(m, i, n, fresh);
}

// ---------------------------------------------------------------- steps

bool is_beta_redex(const Lambda& t, const Position& p) {
  try {
    auto& r = lambda_at(t, p);
    return r.is(Lambda::Kind::App) && r.fun().is(Lambda::Kind::Abs);
  } catch (const Error&) {
    return false;
  }
}

bool is_eta_redex(const Lambda& t, const Position& p) {
  try {
    auto& r = lambda_at(t, p);
    return r.is(Lambda::Kind::Abs) && r.body().is(Lambda::Kind::App) && r.body().arg().is(Lambda::Kind::Var) &&
           r.body().arg().index() == r.index();
  } catch (const Error&) {
    return false;
  }
}

Lambda beta_step(const Lambda& t, const Position& p) {
  if (!is_beta_redex(t, p)) throw Error("not-a-redex", "no β-redex at " + p.str());
  auto& r = lambda_at(t, p);
  return replace_at(t, p, substitute(r.fun().body(), r.fun().index(), r.arg()));
}

Lambda eta_step(const Lambda& t, const Position& p) {
  if (!is_eta_redex(t, p)) throw Error("not-a-redex", "no η-redex at " + p.str());
  auto& r = lambda_at(t, p);
  auto free = occurs_free(r.body().fun(), r.index());
  if (!free) throw Error("undecidable-freeness", "a truncation leaf may hide " + name(r.index()) + " at " + p.str());
  if (*free) throw Error("not-a-redex", name(r.index()) + " is free in the η-body at " + p.str());
  return replace_at(t, p, r.body().fun());
}

// ---------------------------------------------------------------- translation

namespace {

Lambda translate_letters(const std::string& letters, i64 i) {
  std::vector<i64> level{i};
  for (char c : letters) level.push_back(level.back() + (c == 'S' ? 1 : -1));
  Lambda t = Lambda::trunc(level.back());
  for (std::size_t k = letters.size(); k-- > 0;)
    t = letters[k] == 'P' ? Lambda::app(std::move(t), Lambda::var(level[k])) : Lambda::abs(level[k] + 1, std::move(t));
  return t;
}

std::string letters_of(const SPWord& w, std::size_t depth) {
  auto letters = w.take(depth);
  if (letters.size() < depth)
    throw Error("precondition", "the finite word " + w.str() + " is shorter than depth " + std::to_string(depth));
  return letters;
}

} // namespace

Lambda translate(const SPWord& w, i64 i, std::size_t depth) { return translate_letters(letters_of(w, depth), i); }

CommutingSquare commuting_square(const SPWord& w, i64 i, std::size_t pos, std::size_t depth) {
  if (pos + 2 > depth || (!w.infinite() && w.length() < depth))
    throw Error("no-factor-at-position", "depth " + std::to_string(pos) + " is not within depth " + std::to_string(depth));
  auto letters = letters_of(w, depth);
  auto factor = letters.substr(pos, 2);
  if (factor != "PS" && factor != "SP")
    throw Error("no-factor-at-position", "letters " + factor + " at depth " + std::to_string(pos));
  CommutingSquare sq;
  sq.step = factor == "PS" ? "β" : "η";
  Position p(std::vector<int>(pos, 1));
  auto t = translate_letters(letters, i);
  sq.stepped = factor == "PS" ? beta_step(t, p) : eta_step(t, p);
  sq.translated = translate_letters(letters.substr(0, pos) + letters.substr(pos + 2), i);
  sq.agree = same_term(sq.stepped, sq.translated);
  return sq;
}

bool check_commuting_square(const SPWord& w, i64 i, std::size_t pos, std::size_t depth) {
  return commuting_square(w, i, pos, depth).agree;
}

// ---------------------------------------------------------------- W W I

namespace {

using L = Lambda;

// free x0 is index 0; binders get distinct positive indices
constexpr i64 kW = 1, kF = 2, kA = 3, kB = 4, kC = 5, kI = 6;

L x0() { return L::var(0); }

/// λabc. F (a b c)
L wrap(const L& f) {
  return L::abs(kA, L::abs(kB, L::abs(kC, L::app(f, L::apps(L::var(kA), {L::var(kB), L::var(kC)})))));
}

/// λw f. f (w w (λabc. f (a b c)) x0)
L W() {
  L f = L::var(kF), w = L::var(kW);
  return L::abs(kW, L::abs(kF, L::app(f, L::apps(w, {w, wrap(f), x0()}))));
}

L I() { return L::abs(kI, L::var(kI)); }

/// λv1...vn. (v1 ... vn)
L V(int n, i64 base = 100) {
  std::vector<L> rest;
  for (int k = 2; k <= n; ++k) rest.push_back(L::var(base + k));
  L t = L::apps(L::var(base + 1), rest);
  for (int k = n; k >= 1; --k) t = L::abs(base + k, t);
  return t;
}

L WW(const std::vector<L>& args) {
  std::vector<L> all{W()};
  all.insert(all.end(), args.begin(), args.end());
  return L::apps(W(), all);
}

struct Script {
  std::string rule;
  std::vector<std::pair<char, std::string>> steps;  // ('b' | 'e', position digits)
  std::size_t displayed_steps;
  std::string displayed;
  L expected;
};

} // namespace

bool WwiDemo::ok() const {
  return !lines.empty() && std::all_of(lines.begin(), lines.end(), [](const DemoLine& l) { return l.matches; });
}

WwiDemo wwi_demo() {
  L v3 = L::var(203), v5 = L::var(205);
  std::vector<Script> beta{
      {"β", {{'b', "1"}, {'b', ""}}, 2, "I (W W (λabc.I (a b c)) x0)", L::app(I(), WW({wrap(I()), x0()}))},
      {"β", {{'b', ""}, {'b', "12111"}}, 2, "W W V3 x0", WW({V(3), x0()})},
      {"β", {{'b', "11"}, {'b', "1"}}, 2, "V3 (W W (λabc.V3 (a b c)) x0) x0",
       L::apps(V(3), {WW({wrap(V(3)), x0()}), x0()})},
      {"β", {{'b', "1"}, {'b', ""}, {'b', "11112111"}}, 3, "λv3.W W V5 x0 x0 v3",
       L::abs(203, WW({V(5), x0(), x0(), v3}))},
      {"β",
       {{'b', "11111"}, {'b', "1111"}, {'b', "1111"}, {'b', "111"}, {'b', "11"}, {'b', "1"}, {'b', "11111112111"}},
       6, "λv3 v5.W W V7 x0 x0 x0 v3 v5", L::abs(203, L::abs(205, WW({V(7), x0(), x0(), x0(), v3, v5})))},
  };
  std::vector<Script> eta{
      {"η", {{'e', "1211"}, {'e', "121"}}, 2, "(W W I) x0", WW({I(), x0()})},
      {"βη", {{'b', "11"}, {'b', "1"}, {'b', "1"}, {'b', "112111"}, {'e', "11211"}, {'e', "1121"}}, 0,
       "(W W I) x0 x0", WW({I(), x0(), x0()})},
  };

  WwiDemo demo;
  auto run = [&](L t, const std::vector<Script>& script) {
    for (auto& s : script) {
      for (auto& [kind, digits] : s.steps) {
        auto p = Position::parse(digits.empty() ? "ε" : digits);
        t = kind == 'b' ? beta_step(t, p) : eta_step(t, p);
      }
      demo.lines.push_back({s.rule, s.steps.size(), s.displayed_steps, s.displayed, t, alpha_equal(t, s.expected)});
    }
  };
  run(WW({I()}), beta);
  run(WW({V(3), x0()}), eta);
  return demo;
}

} // namespace infrew
