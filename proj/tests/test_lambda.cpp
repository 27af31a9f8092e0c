#include <doctest.h>

#include <memory>
#include <random>

#include "infrew/error.hpp"
#include "infrew/lambda.hpp"

using namespace infrew;
using L = Lambda;

namespace {

/// The coinductive clauses read literally, cut after `depth` letters.
L translate_ref(const std::string& w, std::int64_t i, std::size_t depth) {
  if (depth == 0 || w.empty()) return L::trunc(i);
  std::string rest = w.substr(1);
  if (w[0] == 'P') return L::app(translate_ref(rest, i - 1, depth - 1), L::var(i));
  return L::abs(i + 1, translate_ref(rest, i + 1, depth - 1));
}

/// a is b with some subterms cut off
bool is_prefix(const L& a, const L& b) {
  if (a.is(L::Kind::Trunc)) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case L::Kind::Var: return a.index() == b.index();
    case L::Kind::Abs: return a.index() == b.index() && is_prefix(a.body(), b.body());
    case L::Kind::App: return is_prefix(a.fun(), b.fun()) && is_prefix(a.arg(), b.arg());
    default: return false;
  }
}

// ---- de Bruijn reference for β

struct DB {
  enum K { Bound, Free, App, Abs } k;
  long v = 0;  // de Bruijn index or free name
  std::shared_ptr<DB> a, b;
};
using DBP = std::shared_ptr<DB>;

DBP mk(DB::K k, long v, DBP a = nullptr, DBP b = nullptr) { return std::make_shared<DB>(DB{k, v, std::move(a), std::move(b)}); }

DBP to_db(const L& t, std::vector<std::int64_t>& env) {
  switch (t.kind()) {
    case L::Kind::Var:
      for (std::size_t k = env.size(); k-- > 0;)
        if (env[k] == t.index()) return mk(DB::Bound, static_cast<long>(env.size() - 1 - k));
      return mk(DB::Free, static_cast<long>(t.index()));
    case L::Kind::App: return mk(DB::App, 0, to_db(t.fun(), env), to_db(t.arg(), env));
    case L::Kind::Abs: {
      env.push_back(t.index());
      auto body = to_db(t.body(), env);
      env.pop_back();
      return mk(DB::Abs, 0, body);
    }
    default: throw std::logic_error("no truncation in the reference");
  }
}

DBP to_db(const L& t) {
  std::vector<std::int64_t> env;
  return to_db(t, env);
}

DBP shift(const DBP& t, long by, long cutoff) {
  switch (t->k) {
    case DB::Bound: return t->v >= cutoff ? mk(DB::Bound, t->v + by) : t;
    case DB::Free: return t;
    case DB::App: return mk(DB::App, 0, shift(t->a, by, cutoff), shift(t->b, by, cutoff));
    case DB::Abs: return mk(DB::Abs, 0, shift(t->a, by, cutoff + 1));
  }
  return t;
}

DBP db_subst(const DBP& t, long j, const DBP& s) {
  switch (t->k) {
    case DB::Bound: return t->v == j ? s : t;
    case DB::Free: return t;
    case DB::App: return mk(DB::App, 0, db_subst(t->a, j, s), db_subst(t->b, j, s));
    case DB::Abs: return mk(DB::Abs, 0, db_subst(t->a, j + 1, shift(s, 1, 0)));
  }
  return t;
}

DBP db_beta(const DBP& t, const Position& p, std::size_t k = 0) {
  if (k == p.depth()) {
    auto body = t->a->a;
    return shift(db_subst(body, 0, shift(t->b, 1, 0)), -1, 0);
  }
  int i = p.path[k];
  if (t->k == DB::Abs) return mk(DB::Abs, 0, db_beta(t->a, p, k + 1));
  return i == 1 ? mk(DB::App, 0, db_beta(t->a, p, k + 1), t->b)
                : mk(DB::App, 0, t->a, db_beta(t->b, p, k + 1));
}

bool db_equal(const DBP& s, const DBP& t) {
  if (s->k != t->k) return false;
  if (s->k == DB::Bound || s->k == DB::Free) return s->v == t->v;
  if (s->k == DB::Abs) return db_equal(s->a, t->a);
  return db_equal(s->a, t->a) && db_equal(s->b, t->b);
}

L random_lambda(std::mt19937& rng, std::size_t depth) {
  std::uniform_int_distribution<int> pick(0, 5), idx(0, 3);
  int k = depth == 0 ? 0 : pick(rng);
  if (k <= 1) return L::var(idx(rng));
  if (k <= 3) return L::app(random_lambda(rng, depth - 1), random_lambda(rng, depth - 1));
  return L::abs(idx(rng), random_lambda(rng, depth - 1));
}

void collect(const L& t, Position p, std::vector<Position>& beta, std::vector<Position>& eta) {
  if (is_beta_redex(t, p)) beta.push_back(p);
  if (is_eta_redex(t, p)) eta.push_back(p);
  auto& s = lambda_at(t, p);
  if (s.is(L::Kind::App)) {
    collect(t, p.child(1), beta, eta);
    collect(t, p.child(2), beta, eta);
  } else if (s.is(L::Kind::Abs)) {
    collect(t, p.child(1), beta, eta);
  }
}

Position spine(std::size_t k) { return Position(std::vector<int>(k, 1)); }

} // namespace

TEST_CASE("translation") {
  auto p = translate(SPWord::finite("PSSP"), 0, 1);
  REQUIRE(p.is(L::Kind::App));
  CHECK(p.fun().is(L::Kind::Trunc));
  CHECK(p.fun().bound() == -1);
  CHECK(p.arg().is(L::Kind::Var));
  CHECK(p.arg().index() == 0);
  CHECK(p.str() == "(_ x0)");

  auto s = translate(SPWord::finite("SPSP"), 0, 1);
  REQUIRE(s.is(L::Kind::Abs));
  CHECK(s.index() == 1);
  CHECK(s.body().bound() == 1);
  CHECK(s.str() == "\\x1. _");

  auto psi = translate(builtin_spword("psi"), 0, 8);
  CHECK(psi.str() == "((\\x0. \\x1. ((\\x-1. \\x0. _) x-1 x0 x1)) x0)");
  // the figure's spine: ·, λx0, λx1, ·, ·, ·, λx-1, λx0 with arguments x0, x1, x0, x-1
  CHECK(lambda_at(psi, spine(1)).index() == 0);
  CHECK(lambda_at(psi, spine(2)).index() == 1);
  CHECK(lambda_at(psi, Position{2}).index() == 0);
  CHECK(lambda_at(psi, Position{1, 1, 1, 2}).index() == 1);
  CHECK(lambda_at(psi, Position{1, 1, 1, 1, 2}).index() == 0);
  CHECK(lambda_at(psi, Position{1, 1, 1, 1, 1, 2}).index() == -1);
  CHECK(lambda_at(psi, spine(6)).index() == -1);
  CHECK(lambda_at(psi, spine(7)).index() == 0);

  CHECK_THROWS_WITH_AS(translate(SPWord::finite("PS"), 0, 3), doctest::Contains("precondition"), Error);
  CHECK(translate(SPWord::finite("PS"), 0, 2).str() == "((\\x0. _) x0)");

  std::mt19937 rng(3);
  std::vector<SPWord> words;
  for (auto& n : builtin_spword_names()) words.push_back(builtin_spword(n));
  for (int k = 0; k < 30; ++k) {
    std::string letters;
    for (int j = 0; j < 24; ++j) letters += rng() % 2 ? 'S' : 'P';
    words.push_back(SPWord::finite(letters));
  }
  for (auto& w : words)
    for (std::int64_t i : {-2, 0, 5})
      for (std::size_t d = 0; d < 20; ++d) {
        auto t = translate(w, i, d);
        CHECK(same_term(t, translate_ref(w.take(d), i, d)));
        CHECK(is_prefix(t, translate(w, i, d + 1)));
      }
}

TEST_CASE("the two normal forms") {
  auto s = translate(builtin_spword("s_omega"), 0, 16);
  auto p = translate(builtin_spword("p_omega"), 0, 16);
  for (std::size_t k = 0; k < 16; ++k) {
    CHECK(lambda_at(s, spine(k)).is(L::Kind::Abs));
    CHECK(lambda_at(p, spine(k)).is(L::Kind::App));
    CHECK(lambda_at(p, spine(k).child(2)).index() == -static_cast<std::int64_t>(k));
  }
  std::vector<Position> beta, eta;
  collect(s, Position{}, beta, eta);
  collect(p, Position{}, beta, eta);
  CHECK(beta.empty());
  CHECK(eta.empty());
}

TEST_CASE("β and η steps") {
  auto id = L::abs(1, L::var(1));
  CHECK(same_term(beta_step(L::app(id, L::var(7)), Position{}), L::var(7)));
  CHECK(same_term(eta_step(L::abs(1, L::app(L::var(9), L::var(1))), Position{}), L::var(9)));

  CHECK_THROWS_WITH_AS(eta_step(L::abs(1, L::app(L::trunc(), L::var(1))), Position{}),
                       doctest::Contains("undecidable-freeness"), Error);
  // a bound below the binder's index settles the question
  CHECK(eta_step(L::abs(1, L::app(L::trunc(0), L::var(1))), Position{}).is(L::Kind::Trunc));
  CHECK_THROWS_WITH_AS(eta_step(L::abs(1, L::app(L::trunc(1), L::var(1))), Position{}),
                       doctest::Contains("undecidable-freeness"), Error);
  CHECK_THROWS_WITH_AS(eta_step(L::abs(1, L::app(L::var(1), L::var(1))), Position{}),
                       doctest::Contains("not-a-redex"), Error);
  CHECK_THROWS_WITH_AS(beta_step(L::app(L::var(1), L::var(1)), Position{}), doctest::Contains("not-a-redex"), Error);
  CHECK_THROWS_WITH_AS(beta_step(id, Position{2}), doctest::Contains("not-a-redex"), Error);
  CHECK_THROWS_AS(lambda_at(id, Position{2}), Error);

  // (λx1.λx2.(x1 x2)) x2 must not capture
  auto t = L::app(L::abs(1, L::abs(2, L::app(L::var(1), L::var(2)))), L::var(2));
  auto r = beta_step(t, Position{});
  REQUIRE(r.is(L::Kind::Abs));
  CHECK(r.index() != 2);
  CHECK(alpha_equal(r, L::abs(5, L::app(L::var(2), L::var(5)))));
  CHECK(!alpha_equal(r, L::abs(2, L::app(L::var(2), L::var(2)))));

  CHECK(occurs_free(L::abs(1, L::var(1)), 1) == false);
  CHECK(occurs_free(L::app(L::trunc(), L::var(3)), 3) == true);
  CHECK(!occurs_free(L::trunc(4), 4).has_value());

  // substituting into a bounded leaf widens its bound
  auto under = substitute(L::app(L::trunc(3), L::var(3)), 3, L::var(8));
  CHECK(under.fun().bound() == 8);
  CHECK(same_term(substitute(L::trunc(2), 3, L::var(8)), L::trunc(2)));
}

TEST_CASE("property: β against a de Bruijn reference") {
  std::mt19937 rng(11);
  int checked = 0, etas = 0;
  for (int round = 0; round < 3000; ++round) {
    auto t = random_lambda(rng, 6);
    std::vector<Position> beta, eta;
    collect(t, Position{}, beta, eta);
    for (auto& p : beta) {
      INFO((t.str() + " at " + p.str()));
      auto r = beta_step(t, p);
      CHECK(db_equal(to_db(r), db_beta(to_db(t), p)));
      ++checked;
    }
    for (auto& p : eta) {
      auto& s = lambda_at(t, p);
      bool free = *occurs_free(s.body().fun(), s.index());
      if (free) {
        CHECK_THROWS_AS(eta_step(t, p), Error);
      } else {
        CHECK(alpha_equal(eta_step(t, p), replace_at(t, p, s.body().fun())));
        ++etas;
      }
    }
  }
  CHECK(checked > 500);
  CHECK(etas > 20);
}

TEST_CASE("commuting squares") {
  auto psi = builtin_spword("psi");
  auto sq = commuting_square(psi, 0, 0, 12);
  CHECK(sq.step == "β");
  CHECK(sq.agree);
  CHECK(check_commuting_square(SPWord::periodic("", "SP"), 0, 0, 12));
  CHECK(commuting_square(SPWord::periodic("", "SP"), 0, 0, 12).step == "η");
  CHECK_THROWS_WITH_AS(check_commuting_square(builtin_spword("s_omega"), 0, 3, 12),
                       doctest::Contains("no-factor-at-position"), Error);
  CHECK_THROWS_WITH_AS(check_commuting_square(psi, 0, 11, 12), doctest::Contains("no-factor-at-position"), Error);
  CHECK_THROWS_WITH_AS(check_commuting_square(psi, 0, 1, 12), doctest::Contains("no-factor-at-position"), Error);

  // the same index can be bound twice on one path (S P S P ...), yet every
  // β-redex of a translation is (λx_j. M) x_j, so no capture arises
  auto nested = translate(SPWord::periodic("", "SP"), 0, 4);
  CHECK(lambda_at(nested, Position{}).index() == 1);
  CHECK(lambda_at(nested, Position{1, 1}).index() == 1);

  for (const char* name : {"psi", "zeta", "xi"}) {
    auto w = builtin_spword(name);
    auto letters = w.take(16);
    std::size_t squares = 0;
    for (std::int64_t i : {-3, 0, 2}) {
      auto t = translate(w, i, 16);
      std::vector<Position> beta, eta;
      collect(t, Position{}, beta, eta);
      for (auto& p : beta) CHECK(lambda_at(t, p).arg().index() == lambda_at(t, p).fun().index());
      for (std::size_t k = 0; k + 2 <= 16; ++k) {
        INFO((std::string(name) + " factor at " + std::to_string(k)));
        bool ps = letters[k] == 'P' && letters[k + 1] == 'S';
        bool sp = letters[k] == 'S' && letters[k + 1] == 'P';
        CHECK(is_beta_redex(t, spine(k)) == ps);
        CHECK(is_eta_redex(t, spine(k)) == sp);
        if (!ps && !sp) {
          CHECK_THROWS_AS(check_commuting_square(w, i, k, 16), Error);
          continue;
        }
        auto s = commuting_square(w, i, k, 16);
        CHECK(s.step == (ps ? "β" : "η"));
        CHECK(s.agree);
        CHECK(alpha_equal(s.stepped, s.translated));
        ++squares;
      }
    }
    CHECK(squares > 0);
  }
}

TEST_CASE("W W I") {
  auto demo = wwi_demo();
  REQUIRE(demo.lines.size() == 7);
  CHECK(demo.ok());
  std::vector<std::size_t> steps, shown;
  for (auto& l : demo.lines) {
    INFO(l.displayed);
    CHECK(l.matches);
    steps.push_back(l.steps);
    shown.push_back(l.displayed_steps);
  }
  CHECK(steps == std::vector<std::size_t>{2, 2, 2, 3, 7, 2, 6});
  CHECK(shown == std::vector<std::size_t>{2, 2, 2, 3, 6, 2, 0});
  CHECK(demo.lines[1].displayed == "W W V3 x0");

  auto v3 = L::abs(1, L::abs(2, L::abs(3, L::apps(L::var(1), {L::var(2), L::var(3)}))));
  CHECK(alpha_equal(lambda_at(demo.lines[1].term, Position{1, 2}), v3));
  CHECK(alpha_equal(lambda_at(demo.lines[5].term, Position{1, 2}), L::abs(9, L::var(9))));
  CHECK(!alpha_equal(lambda_at(demo.lines[5].term, Position{1, 2}), v3));
}
