// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "infrew/cli.hpp"
#include "infrew/clusters.hpp"
#include "infrew/error.hpp"
#include "infrew/lambda.hpp"
#include "infrew/reductions.hpp"
#include "infrew/spwords.hpp"
#include "support.hpp"

using namespace infrew;
using testing_support::fixture;
using testing_support::multiredexes;
using testing_support::tower;

namespace {

std::string data(const std::string& f) { return std::string(INFREW_TEST_DATA) + "/" + f; }
Term T(const char* s) { return parse_term(s); }
Redex rd(const char* pos, std::size_t rule) { return Redex{Position::parse(pos), rule}; }

struct Failure {
  std::string why;
};

void expect(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

int cli(std::vector<std::string> args, std::string& out) {
  std::ostringstream o, e;
  int rc = run_cli(args, o, e);
  out = o.str();
  return rc;
}

bool multistep_reaches(const Term& s, const Term& target, const Trs& R) {
  for (auto& V : multiredexes(find_redexes(s, R, 64), R))
    if (bisim_equal(develop(s, V, R), target)) return true;
  return false;
}

// ---------------------------------------------------------------- criteria

void sp_weakly_orthogonal() {
  std::string out;
  expect(cli({"check", "wo", data("sp.trs")}, out) == 0, "exit status");
  expect(out == "WeaklyOrthogonal, 2 critical pairs, all trivial\n", "report: " + out);
  Trs R = parse_trs("ps: P(S(x)) -> x\nsp: S(P(x)) -> x");
  auto cps = critical_pairs(R);
  expect(classify_orthogonality(R) == Orthogonality::WeaklyOrthogonal, "classification");
  expect(cps.size() == 2 && cps[0].trivial && cps[1].trivial, "two trivial critical pairs");
}

void un_failure() {
  auto d = un_failure_demo(8);
  expect(!d.classification.snorm && !d.classification.pnorm, "both norms of psi infinite");
  expect(d.to_s.size() == 8 && d.to_p.size() == 8, "eight segments each");
  for (auto* side : {&d.to_s, &d.to_p})
    for (auto& s : *side) {
      long sum = 0;
      for (char c : s.word) sum += c == 'S' ? 1 : -1;
      expect(sum == (side == &d.to_s ? 1 : -1), "segment sum of " + s.word);
      expect(nf_finite(s.word) == std::string(1, s.letter), "segment normal form of " + s.word);
    }
  expect(d.segments_valid, "segments slice psi and their steps reach one letter");
  Term so = to_trs_term(builtin_spword("s_omega")), po = to_trs_term(builtin_spword("p_omega"));
  expect(!bisim_equal(so, po), "S^ω and P^ω terms distinct");
}

void word_table() {
  auto z = classify(builtin_spword("zeta"));
  expect(z.root_active && z.snorm && z.pnorm, "zeta root-active with finite norms");
  auto x = classify(builtin_spword("xi"));
  expect(x.root_active && !x.snorm && x.pnorm == 0u, "xi root-active, snorm ∞, pnorm 0");
  auto xp = classify(builtin_spword("xi_prime"));
  expect(!xp.root_active && !xp.sn_inf && xp.reduces_to_S_omega, "xi' not RA, not SN, reduces to S^ω");
  auto ssp = classify(builtin_spword("ssp_omega"));
  expect(ssp.sn_inf && ssp.reduces_to_S_omega, "(SSP)^ω SN and reduces to S^ω");
  std::string out;
  expect(cli({"sp", "classify", "psi"}, out) == 0 && out.find("RA-core") != std::string::npos, "psi table");
}

void norm_oracle() {
  for (std::size_t n = 0; n <= 10; ++n)
    for (unsigned bits = 0; bits < (1u << n); ++bits) {
      std::string w;
      for (std::size_t i = 0; i < n; ++i) w += bits >> i & 1 ? 'S' : 'P';
      auto brute = [](const std::string& u) {
        long sum = 0, hi = 0, lo = 0;
        for (char c : u) {
          sum += c == 'S' ? 1 : -1;
          hi = std::max(hi, sum);
          lo = std::min(lo, sum);
        }
        return std::pair<long, long>{hi, -lo};
      };
      auto [s, p] = brute(w);
      SPWord word = SPWord::finite(w);
      expect(s_norm(word) == static_cast<std::uint64_t>(s), "s-norm of " + w);
      expect(p_norm(word) == static_cast<std::uint64_t>(p), "p-norm of " + w);
      for (std::size_t at = 0; at + 1 < w.size(); ++at) {
        if (w[at] == w[at + 1]) continue;
        std::string v = apply_word_steps(w, {{at, w[at] == 'P' ? "ps" : "sp"}});
        expect(sp_sum(v) == sp_sum(w), "step keeps the sum of " + w);
        long before = static_cast<long>(*s_norm(word)), after = static_cast<long>(*s_norm(SPWord::finite(v)));
        expect(after <= before && before - after <= 1, "step changes the s-norm of " + w + " by at most 1");
      }
    }
}

void refined_compression() {
  Trs R = parse_trs("grow: a -> g(a)\nfh: f(x) -> h(x)");
  StagedReduction red(T("f(a)"), R);
  red.then_limit([](std::size_t i) { return Redex{Position(std::vector<int>(i + 1, 1)), 0}; },
                 [](std::size_t d) { return d; }, T("rec s = f(t); t = g(t)"));
  red.then_steps({rd("ε", 1)});
  expect(red.shape() == "ω+1", "input shape " + red.shape());
  auto out = compress(red);
  out.check(32);
  expect(out.shape() == "ω", "output shape " + out.shape());
  expect(bisim_equal(out.source(), red.source()), "same source");
  expect(truncate(out.target(), 32).str() == truncate(red.target(), 32).str(), "same target to depth 32");
  expect(out.min_depth() == 0u, "minimal depth 0");
  expect(out.count_at_depth(0) == 1u, "exactly one depth-0 step");
}

void orthogonalization_cases() {
  Trs A = fixture("a3.trs"), Y = fixture("ysys.trs"), M = fixture("minus_two.trs");
  Redex u1 = rd("", 0), v1 = rd("1", 0);
  auto i1 = orthogonalize(tower("A", 5), {u1, v1}, A, true).apply({u1, v1});
  expect(i1.size() == 1 && (i1[0] == u1 || i1[0] == v1), "case (i): one of u, v");
  std::vector<Redex> W2{rd("", 2), rd("1", 3), rd("2", 3)};
  expect(orthogonalize(T("f(g(a,a),g(a,a))"), W2, Y, true).apply(W2).empty(), "case (ii): empty");
  Redex u = rd("", 1), v = rd("1", 0), w = rd("1111", 0);
  expect(orthogonalize(tower("A", 7), {u, v, w}, M, true).apply({u, v, w}) == std::vector<Redex>{v, w},
         "case (iii): {v, w}");
  std::vector<Redex> W4{rd("", 0), rd("1", 1), rd("11", 3), rd("12", 3)};
  expect(orthogonalize(T("k(f(g(a,a),g(a,a)))"), W4, Y, true).apply(W4).empty(), "case (iv): empty");

  RedexFamily chain{Position{}, Position{1, 1}, 0};
  std::vector<Redex> W;
  for (std::size_t i = 0; i < 16; ++i) W.push_back(chain.instance(i));
  auto m = orthogonalize(T("rec t = A(t)"), W, A, true);
  for (std::size_t i = 0; i < 8; ++i) {
    expect(m(chain.instance(2 * i)) == chain.instance(2 * i), "chain: u_i ↦ u_i");
    expect(m(chain.instance(2 * i + 1)) == chain.instance(2 * i), "chain: v_i ↦ u_i");
  }
}

void algorithm_invariants() {
  struct Fx {
    Trs R;
    std::vector<testing_support::Sym> sig;
  };
  std::vector<Fx> fxs{{fixture("sp.trs"), {{"P", 1}, {"S", 1}, {"Q", 2}, {"c", 0}}},
                      {fixture("minus_two.trs"), {{"A", 1}, {"B", 2}, {"c", 0}}},
                      {fixture("overlay.trs"), {{"f", 1}, {"g", 2}, {"a", 0}, {"b", 0}}}};
  for (auto& fx : fxs) expect(classify_orthogonality(fx.R) != Orthogonality::Neither, "fixture weakly orthogonal");
  std::mt19937 rng(2024);
  std::size_t done = 0, checked = 0, overlapping = 0;
  for (std::size_t k = 0; done < 500; ++k) {
    auto& fx = fxs[k % fxs.size()];
    Term t = testing_support::random_finite(rng, fx.sig, 7);
    auto W = find_redexes(t, fx.R, 64);
    if (W.empty() || W.size() > 8) continue;
    ++done;
    auto m = orthogonalize(t, W, fx.R, true);
    auto img = m.apply(W);
    overlapping += img.size() < W.size();
    for (std::size_t i = 0; i < img.size(); ++i)
      for (std::size_t j = i + 1; j < img.size(); ++j) expect(!overlap(img[i], img[j], fx.R), "image orthogonal");
    for (auto& w : W)
      if (auto i = m(w)) expect(overlap(w, *i, fx.R), "image overlaps its redex");
    for (auto& V : multiredexes(W, fx.R)) {
      expect(bisim_equal(develop(t, m.apply(V), fx.R), develop(t, V, fx.R)), "develop(V^⊥) = develop(V) on " + t.str());
      ++checked;
    }
  }
  expect(overlapping >= 100 && checked >= 2000, "random terms too tame: " + std::to_string(overlapping) +
                                                    " with overlaps, " + std::to_string(checked) + " multi-redexes");
}

void triangle_and_diamond() {
  Trs A = fixture("a3.trs");
  for (std::size_t n = 0; n <= 9; ++n) {
    Term t = tower("A", n);
    auto W = find_redexes(t, A, 64);
    Term b = bullet(t, W, A);
    auto Us = multiredexes(W, A);
    for (auto& U : Us) {
      expect(multistep_reaches(develop(t, U, A), b, A), "triangle on A^" + std::to_string(n) + "(c)");
      for (auto& V : Us) {
        auto d = diamond_join(t, U, V, A);
        expect(bisim_equal(d.u_target, develop(t, U, A)) && bisim_equal(d.v_target, develop(t, V, A)), "peak");
        expect(bisim_equal(develop(d.u_target, d.join_u, A), d.common) &&
                   bisim_equal(develop(d.v_target, d.join_v, A), d.common),
               "diamond on A^" + std::to_string(n) + "(c)");
      }
    }
  }
}

void trivial_clusters() {
  Trs A = fixture("a3.trs");
  Term omega = T("rec t = A(t)");
  RedexSet fam;
  fam.families.push_back(RedexFamily{Position{}, Position{1}, 0});
  auto cs = clusters(omega, fam, A);
  expect(cs.size() == 1 && cs[0].extent == Extent::Infinite && cs[0].kind == ClusterKind::I, "A^ω I-cluster");
  expect(is_trivial(cs[0]) && trivial_cluster_step_is_identity(omega, cs[0], A), "A^ω cluster trivial");
  for (std::size_t i = 0; i < 12; ++i)
    expect(bisim_equal(rewrite_at(omega, fam.families[0].instance(i), A), omega), "A^ω member step");

  Trs Y = fixture("ysys.trs");
  Term t = T("k(f(g(a,a),g(a,a)))");
  auto W = find_redexes(t, Y, 64);
  auto ys = clusters(t, W, Y);
  expect(ys.size() == 1 && ys[0].kind == ClusterKind::Y && is_trivial(ys[0]), "Y-cluster trivial");
  for (auto& r : ys[0].redexes) expect(bisim_equal(rewrite_at(t, r, Y), t), "Y member step " + r.str(Y));
}

void collapsing_counterexample() {
  auto d = collapse_demo();
  expect(bisim_equal(d.to_a.target(), T("rec t = f(t, a)")), "t1 = f(t1, a)");
  expect(bisim_equal(d.to_b.target(), T("rec t = f(t, b)")), "t2 = f(t2, b)");
  expect(d.distinct, "t1, t2 bisim-distinct");
  expect(d.join_error == "collapsing-rules-present", "join refused: " + d.join_error);
  std::string out;
  expect(cli({"demo", "collapse"}, out) == 0, "demo collapse exit status");
}

void lambda_squares() {
  std::size_t squares = 0;
  for (auto name : {"psi", "zeta", "xi"}) {
    SPWord w = builtin_spword(name);
    for (std::size_t pos = 0; pos + 2 <= 16; ++pos) {
      if (w.at(pos + 1) == w.at(pos + 2)) continue;
      expect(check_commuting_square(w, 0, pos, 16), std::string("square of ") + name + " at " + std::to_string(pos));
      ++squares;
    }
  }
  expect(squares > 0, "some factors");
  expect(wwi_demo().ok(), "W W I lines");
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit;
    std::function<void()> run;
  };
  std::vector<Criterion> all{
      {"weak orthogonality of the SP system", 1, sp_weakly_orthogonal},
      {"UN-infinity failure on psi", 1, un_failure},
      {"word table zeta, xi, xi', (SSP)^ω", 1, word_table},
      {"norm oracle on all words up to length 10", 10, norm_oracle},
      {"refined compression of an (ω+1)-reduction", 1, refined_compression},
      {"orthogonalization cases and the A^ω chain", 1, orthogonalization_cases},
      {"orthogonalization invariants on 500 random terms", 60, algorithm_invariants},
      {"triangle and diamond on A^n(c), n <= 9", 60, triangle_and_diamond},
      {"trivial clusters step to themselves", 1, trivial_clusters},
      {"collapsing counterexample", 1, collapsing_counterexample},
      {"λ commuting squares and W W I", 5, lambda_squares},
  };
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    std::string why;
    try {
      all[i].run();
    } catch (const Failure& f) {
      why = f.why;
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (why.empty() && secs > all[i].limit) why = "over the time limit";
    std::printf("%s %2zu  %s  (%.3f s)%s%s\n", why.empty() ? "PASS" : "FAIL", i + 1, all[i].name, secs,
                why.empty() ? "" : "  ", why.c_str());
    failed += !why.empty();
  }
  return failed ? 1 : 0;
}
