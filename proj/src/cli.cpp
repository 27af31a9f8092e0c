#include "infrew/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "infrew/clusters.hpp"
#include "infrew/error.hpp"
#include "infrew/lambda.hpp"

namespace infrew {

using json = nlohmann::json;

namespace {

const char* const kVerbs =
    "verbs:\n"
    "  check wo|ortho TRS          orthogonality class and critical pairs\n"
    "  critical-pairs TRS          list critical pairs\n"
    "  redexes TRS --term T        redexes up to --depth\n"
    "  clusters TRS --term T       clusters of the redexes\n"
    "  orthogonalize TRS --term T  orthogonalization map\n"
    "  develop TRS --term T --redexes U\n"
    "  bullet TRS --term T         full multi-redex and t-bullet\n"
    "  triangle-test TRS [--term T]\n"
    "  diamond-join TRS --term T --left U --right V\n"
    "  compress TRS --term T --stage S...\n"
    "  pml TRS --term T --stage S... --parallel U\n"
    "  join TRS --term T --stage S... --other S...\n"
    "  sp classify|witness|nf WORD\n"
    "  lambda translate|square WORD, lambda wwi\n"
    "  demo un-failure|collapse\n";

struct Options {
  std::optional<std::size_t> depth;
  std::size_t segments = kDefaultSegments;
  std::string format = "text";
  std::uint64_t seed = 1;
  std::size_t budget = 64;
  std::string trs, term, redexes, left, right, parallel, to, pos;
  std::vector<std::string> stages, other, words;
  std::int64_t index = 0;
  std::size_t count = 20;
  bool check = false;

  std::size_t depth_or(std::size_t d) const { return depth.value_or(d); }
};

class Report {
public:
  Report(std::ostream& out, bool json) : out_(out), json_(json) {}

  bool json_mode() const { return json_; }
  void line(const std::string& text, const json& rec) {
    if (json_)
      out_ << rec.dump() << '\n';
    else
      out_ << text << '\n';
  }
  void text(const std::string& text) {
    if (!json_) out_ << text << '\n';
  }

private:
  std::ostream& out_;
  bool json_;
};

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::string> split_items(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::size_t rule_index(const std::string& name, const Trs& R) {
  if (auto i = R.index_of(name)) return *i;
  throw Error("unknown-rule", name);
}

/// The only rule with a redex at p.
std::size_t infer_rule(const Term& t, const Position& p, const Trs& R) {
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < R.size(); ++i)
    if (is_redex(t, Redex{p, i}, R)) hits.push_back(i);
  if (hits.empty()) throw Error("stale-redex", "no redex at " + p.str());
  if (hits.size() > 1) throw Error("ambiguous-redex", "several rules match at " + p.str() + ", name one");
  return hits.front();
}

/// `pos[:rule]` or `generator*period[:rule]`.
struct RedexItem {
  Position root;
  std::optional<Position> period;
  std::optional<std::string> rule;
};

RedexItem parse_item(const std::string& item) {
  RedexItem r;
  std::string where = item;
  if (auto c = item.find(':'); c != std::string::npos) {
    r.rule = item.substr(c + 1);
    where = item.substr(0, c);
  }
  if (auto s = where.find('*'); s != std::string::npos) {
    r.period = Position::parse(where.substr(s + 1));
    if (r.period->is_root()) throw Error("invalid-redex", "empty period in " + item);
    where = where.substr(0, s);
  }
  r.root = Position::parse(where);
  return r;
}

Redex resolve(const RedexItem& it, const Term& t, const Trs& R) {
  return Redex{it.root, it.rule ? rule_index(*it.rule, R) : infer_rule(t, it.root, R)};
}

RedexSet parse_redex_set(const std::string& text, const Term& t, const Trs& R) {
  RedexSet out;
  for (auto& item : split_items(text)) {
    auto it = parse_item(item);
    Redex r = resolve(it, t, R);
    if (it.period)
      out.families.push_back(RedexFamily{r.root, *it.period, r.rule});
    else
      out.finite.push_back(r);
  }
  std::sort(out.finite.begin(), out.finite.end());
  return out;
}

std::vector<Redex> parse_redex_list(const std::string& text, const Term& t, const Trs& R) {
  auto set = parse_redex_set(text, t, R);
  if (!set.is_finite()) throw Error("invalid-redex", "families are not accepted here");
  return set.finite;
}

std::string redexes_str(const std::vector<Redex>& U, const Trs& R) {
  std::string s = "{";
  for (std::size_t i = 0; i < U.size(); ++i) s += (i ? ", " : "") + U[i].str(R);
  return s + "}";
}

json redex_json(const Redex& r, const Trs& R) { return {{"root", r.root.str()}, {"rule", R.rule(r.rule).name}}; }

json redexes_json(const std::vector<Redex>& U, const Trs& R) {
  json a = json::array();
  for (auto& r : U) a.push_back(redex_json(r, R));
  return a;
}

std::string yes(bool b) { return b ? "yes" : "no"; }

Position ones(std::size_t n) {
  Position p;
  for (std::size_t i = 0; i < n; ++i) p = p.child(1);
  return p;
}

Position repeat(const Position& gen, const Position& period, std::size_t k) {
  Position p = gen;
  for (std::size_t i = 0; i < k; ++i) p = p.concat(period);
  return p;
}

/// Stages: `pos:rule pos:rule ...`, `omega gen*period:rule = LIMIT`,
/// `diverge pos:rule`.
StagedReduction parse_reduction(const Term& source, const Trs& R, const std::vector<std::string>& stages) {
  StagedReduction red(source, R);
  for (auto& raw : stages) {
    std::string st = trim(raw);
    Term cur = red.empty() ? source : red.target();
    if (st.rfind("omega ", 0) == 0) {
      auto eq = st.find('=');
      if (eq == std::string::npos) throw Error("invalid-stage", "omega stage needs `= limit`: " + st);
      auto it = parse_item(trim(st.substr(6, eq - 6)));
      if (!it.period) throw Error("invalid-stage", "omega stage needs generator*period: " + st);
      Redex first = resolve(it, cur, R);
      Position gen = it.root, per = *it.period;
      std::size_t rule = first.rule;
      std::size_t g = gen.depth(), p = per.depth();
      red.then_limit([gen, per, rule](std::size_t i) { return Redex{repeat(gen, per, i), rule}; },
                     [g, p](std::size_t d) { return d < g ? std::size_t{0} : (d - g) / p + 1; },
                     parse_term(trim(st.substr(eq + 1))));
    } else if (st.rfind("diverge ", 0) == 0) {
      auto it = parse_item(trim(st.substr(8)));
      if (it.period) throw Error("invalid-stage", "a divergent stage repeats one position: " + st);
      Redex r = resolve(it, cur, R);
      red.then_divergent([r](std::size_t) { return r; },
                         DivergenceWitness{r.root.depth(), [](std::size_t k) { return k; }});
    } else {
      std::vector<Redex> steps;
      for (auto& item : split_items(st)) {
        auto it = parse_item(item);
        if (it.period) throw Error("invalid-stage", "families need an omega stage: " + item);
        Redex r = resolve(it, cur, R);
        cur = rewrite_at(cur, r, R);
        steps.push_back(r);
      }
      red.then_steps(steps);
    }
  }
  return red;
}

/// Non-overlapping subsets of W, by backtracking.
std::vector<std::vector<Redex>> multiredexes(const std::vector<Redex>& W, const Trs& R) {
  if (W.size() > 16) throw Error("too-many-redexes", std::to_string(W.size()) + " redexes");
  std::vector<std::vector<Redex>> out;
  std::vector<Redex> cur;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == W.size()) {
      out.push_back(cur);
      return;
    }
    go(i + 1);
    for (auto& u : cur)
      if (overlap(u, W[i], R)) return;
    cur.push_back(W[i]);
    go(i + 1);
    cur.pop_back();
  };
  go(0);
  return out;
}

bool multistep_reaches(const Term& s, const Term& target, const Trs& R) {
  for (auto& V : multiredexes(find_redexes(s, R, s.height()), R))
    if (bisim_equal(develop(s, V, R), target)) return true;
  return false;
}

std::string pad(const std::string& s, std::size_t width) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return s + std::string(width > w ? width - w : 0, ' ');
}

std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::size_t w = 0;
      for (unsigned char c : r[i]) w += (c & 0xC0) != 0x80;
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], w);
    }
  std::string out;
  for (auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) line += i + 1 < r.size() ? pad(r[i], width[i] + 2) : r[i];
    out += line + (&r == &rows.back() ? "" : "\n");
  }
  return out;
}

std::string steps_str(const std::vector<WordStep>& steps) {
  std::string s;
  for (auto& st : steps) s += (s.empty() ? "" : " ") + std::to_string(st.at) + ":" + st.rule;
  return s.empty() ? "-" : s;
}

json steps_json(const std::vector<WordStep>& steps) {
  json a = json::array();
  for (auto& st : steps) a.push_back({{"at", st.at}, {"rule", st.rule}});
  return a;
}

json norm_json(const Norm& n) { return n ? json(*n) : json("inf"); }

// ---------------------------------------------------------------- verbs

Term need_term(const Options& o) {
  if (o.term.empty()) throw Error("usage", "--term is required");
  return parse_term(o.term);
}

void cmd_check(const Options& o, bool ortho, Report& rep) {
  Trs R = load_trs(o.trs);
  auto cls = classify_orthogonality(R);
  auto cps = critical_pairs(R);
  std::size_t trivial = std::count_if(cps.begin(), cps.end(), [](auto& c) { return c.trivial; });
  std::string summary = std::to_string(cps.size()) + " critical pairs";
  if (!cps.empty())
    summary += trivial == cps.size() ? ", all trivial" : ", " + std::to_string(cps.size() - trivial) + " non-trivial";
  std::string verdict = to_string(cls);
  if (ortho && cls != Orthogonality::Orthogonal) verdict = "not Orthogonal (" + verdict + ")";
  rep.line(verdict + ", " + summary, {{"verb", ortho ? "check ortho" : "check wo"},
                                      {"classification", to_string(cls)},
                                      {"holds", ortho ? cls == Orthogonality::Orthogonal : cls != Orthogonality::Neither},
                                      {"critical_pairs", cps.size()},
                                      {"trivial", trivial}});
}

void cmd_critical_pairs(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  auto cps = critical_pairs(R);
  for (auto& c : cps)
    rep.line(R.rule(c.outer).name + "/" + R.rule(c.inner).name + " at " + c.pos.str() + ": " + c.left.str() +
                 " = " + c.right.str() + (c.trivial ? " trivial" : " non-trivial"),
             {{"outer", R.rule(c.outer).name},
              {"inner", R.rule(c.inner).name},
              {"pos", c.pos.str()},
              {"left", c.left.str()},
              {"right", c.right.str()},
              {"trivial", c.trivial}});
  rep.text(std::to_string(cps.size()) + " critical pairs");
}

void cmd_redexes(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  auto W = find_redexes(t, R, o.depth_or(kDefaultRedexDepth));
  for (auto& r : W) rep.line(r.str(R), redex_json(r, R));
  rep.text(std::to_string(W.size()) + " redexes");
}

RedexSet redexes_or_all(const Options& o, const Term& t, const Trs& R) {
  if (!o.redexes.empty()) return parse_redex_set(o.redexes, t, R);
  return RedexSet(find_redexes(t, R, o.depth_or(kDefaultRedexDepth)));
}

void cmd_clusters(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  auto W = redexes_or_all(o, t, R);
  for (auto& c : clusters(t, W, R)) {
    json fams = json::array();
    for (auto& f : c.families) fams.push_back(f.str(R));
    rep.line(c.str(),
             {{"kind", c.kind == ClusterKind::I ? "I" : "Y"},
              {"infinite", c.extent == Extent::Infinite},
              {"root", c.root.str()},
              {"trivial", is_trivial(c)},
              {"redexes", redexes_json(c.redexes, R)},
              {"families", fams}});
    for (auto& r : c.redexes) rep.text("  " + r.str(R));
    for (auto& f : c.families) rep.text("  " + f.str(R));
    if (is_trivial(c)) rep.text("  one step is the identity: " + yes(trivial_cluster_step_is_identity(t, c, R)));
  }
}

void cmd_orthogonalize(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  std::vector<Redex> W = o.redexes.empty() ? find_redexes(t, R, o.depth_or(kDefaultRedexDepth))
                                           : parse_redex_list(o.redexes, t, R);
  auto m = orthogonalize(t, W, R, o.check);
  for (auto& r : m.domain) {
    auto img = m(r);
    rep.line(r.str(R) + " -> " + (img ? img->str(R) : "UNDEF"),
             {{"redex", redex_json(r, R)}, {"image", img ? redex_json(*img, R) : json(nullptr)}});
  }
  rep.text("image " + redexes_str(m.apply(W), R));
}

void cmd_develop(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  if (o.redexes.empty()) throw Error("usage", "--redexes is required");
  Term s = develop(t, parse_redex_set(o.redexes, t, R), R);
  rep.line(s.str(), {{"target", s.str()}});
}

void cmd_bullet(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  auto W = redexes_or_all(o, t, R);
  auto full = full_multiredex(t, W, R);
  Term b = develop(t, full, R);
  std::string fams;
  for (auto& f : full.families) fams += " " + f.str(R);
  rep.line("full multi-redex " + redexes_str(full.finite, R) + fams + "\nbullet " + b.str(),
           {{"full", redexes_json(full.finite, R)}, {"bullet", b.str()}});
}

Term random_term(std::mt19937_64& rng, const std::vector<std::pair<std::string, std::size_t>>& sig, std::size_t d) {
  std::vector<std::size_t> pick;
  for (std::size_t i = 0; i < sig.size(); ++i)
    if (d > 0 || sig[i].second == 0) pick.push_back(i);
  auto& [f, n] = sig[pick[std::uniform_int_distribution<std::size_t>(0, pick.size() - 1)(rng)]];
  std::vector<Term> args;
  for (std::size_t i = 0; i < n; ++i) args.push_back(random_term(rng, sig, d - 1));
  return Term::fun(f, args);
}

void cmd_triangle(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  std::vector<Term> terms;
  if (!o.term.empty()) {
    terms.push_back(parse_term(o.term));
  } else {
    std::vector<std::pair<std::string, std::size_t>> sig(R.signature().arity.begin(), R.signature().arity.end());
    if (std::none_of(sig.begin(), sig.end(), [](auto& s) { return s.second == 0; })) sig.push_back({"c", 0});
    std::mt19937_64 rng(o.seed);
    std::set<std::string> seen;
    for (std::size_t k = 0; terms.size() < o.count && k < 100 * o.count; ++k) {
      Term t = random_term(rng, sig, o.depth_or(4));
      if (find_redexes(t, R, t.height()).size() <= 10 && seen.insert(t.str()).second) terms.push_back(t);
    }
  }
  std::size_t failed = 0;
  for (auto& t : terms) {
    if (!t.is_finite()) throw Error("precondition", "triangle-test needs finite terms");
    auto W = find_redexes(t, R, t.height());
    Term b = bullet(t, W, R);
    auto Us = multiredexes(W, R);
    std::vector<std::vector<Redex>> bad;
    for (auto& U : Us)
      if (!multistep_reaches(develop(t, U, R), b, R)) bad.push_back(U);
    failed += bad.size();
    std::string verdict = bad.empty() ? "ok" : "fails for " + redexes_str(bad.front(), R);
    rep.line(t.str() + ": " + std::to_string(Us.size()) + (Us.size() == 1 ? " multi-redex" : " multi-redexes") + ", bullet " + b.str() + ", " + verdict,
             {{"term", t.str()}, {"multiredexes", Us.size()}, {"bullet", b.str()}, {"failures", bad.size()}});
  }
  if (failed) throw Error("triangle-failed", std::to_string(failed) + " multi-redexes do not reach the bullet");
}

void cmd_diamond(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  auto U = parse_redex_set(o.left, t, R), V = parse_redex_set(o.right, t, R);
  auto d = diamond_join(t, U, V, R);
  bool closed = bisim_equal(develop(d.u_target, d.join_u, R), d.common) &&
                bisim_equal(develop(d.v_target, d.join_v, R), d.common);
  rep.line("left  " + d.u_target.str() + "\nright " + d.v_target.str() + "\njoin left  " +
               redexes_str(d.join_u, R) + "\njoin right " + redexes_str(d.join_v, R) + "\ncommon " +
               d.common.str() + "\nclosed " + yes(closed),
           {{"left", d.u_target.str()},
            {"right", d.v_target.str()},
            {"join_left", redexes_json(d.join_u, R)},
            {"join_right", redexes_json(d.join_v, R)},
            {"common", d.common.str()},
            {"closed", closed}});
}

std::string depth_summary(const StagedReduction& r) {
  auto md = r.min_depth();
  if (!md) return "empty";
  auto n = r.count_at_depth(*md);
  std::string count = !n ? "infinitely many steps" : std::to_string(*n) + (*n == 1 ? " step" : " steps");
  return "min depth " + std::to_string(*md) + " with " + count;
}

json reduction_json(const StagedReduction& r, std::size_t horizon) {
  auto md = r.min_depth();
  json j{{"shape", r.shape()}, {"trace", r.trace(horizon)}};
  j["min_depth"] = md ? json(*md) : json(nullptr);
  auto n = md ? r.count_at_depth(*md) : std::nullopt;
  j["at_min_depth"] = n ? json(*n) : json(nullptr);
  j["target"] = r.divergent() ? json(nullptr) : json(r.target().str());
  return j;
}

void cmd_compress(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  auto red = parse_reduction(t, R, o.stages);
  std::size_t horizon = o.depth_or(kDefaultTruncation);
  red.check(horizon);
  auto out = red.divergent() ? compress_divergent(red) : compress(red);
  out.check(horizon);
  std::string text = "input  " + red.shape() + ", " + depth_summary(red) + "\noutput " + out.shape() + ", " +
                     depth_summary(out) + "\n" + out.trace(4);
  if (!out.divergent()) text += "target " + out.target().str();
  if (!text.empty() && text.back() == '\n') text.pop_back();
  rep.line(text, {{"input", reduction_json(red, 4)}, {"output", reduction_json(out, 4)}});
}

void cmd_pml(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  auto kappa = parse_reduction(t, R, o.stages);
  auto phi = ParallelStep::make(t, parse_redex_list(o.parallel, t, R), R);
  auto m = parallel_moves(kappa, phi, o.depth_or(kDefaultTruncation));
  std::string text = "xi  " + m.xi.shape() + ", " + depth_summary(m.xi) + "\n" + m.xi.trace(4) + "psi " +
                     m.psi.str(R) + "\ncommon " + m.psi.target.str();
  rep.line(text, {{"xi", reduction_json(m.xi, 4)}, {"psi", m.psi.str(R)}, {"common", m.psi.target.str()}});
}

void cmd_join(const Options& o, Report& rep) {
  Trs R = load_trs(o.trs);
  Term t = need_term(o);
  auto kappa = parse_reduction(t, R, o.stages);
  auto xi = parse_reduction(t, R, o.other);
  std::size_t agree = o.depth_or(kDefaultTruncation);
  auto j = join_bounded(kappa, xi, agree, o.budget);
  json rounds = json::array();
  for (std::size_t i = 0; i < j.rounds.size(); ++i) {
    rounds.push_back({{"depth", j.rounds[i].depth}, {"agreeing_levels", j.rounds[i].agreeing_levels}});
    rep.text("round " + std::to_string(i) + ": depth " + std::to_string(j.rounds[i].depth) + ", agree on " +
             std::to_string(j.rounds[i].agreeing_levels) + " levels");
  }
  std::string text = "left  " + j.kappa_cont.shape() + "\n" + j.kappa_cont.trace(4) + "right " +
                     j.xi_cont.shape() + "\n" + j.xi_cont.trace(4) + "end left  " +
                     truncate(j.kappa_cont.empty() ? kappa.target() : j.kappa_cont.target(), agree).str() +
                     "\nend right " +
                     truncate(j.xi_cont.empty() ? xi.target() : j.xi_cont.target(), agree).str();
  rep.line(text, {{"left", reduction_json(j.kappa_cont, 4)}, {"right", reduction_json(j.xi_cont, 4)}, {"rounds", rounds}});
}

void cmd_sp_classify(const Options& o, Report& rep) {
  std::vector<std::vector<std::string>> rows{{"word", "s-norm", "p-norm", "to-S", "to-P", "RA", "SN", "WN", "region"}};
  for (auto& name : o.words) {
    SPWord w = parse_spword(name);
    auto c = classify(w);
    rows.push_back({name, norm_str(c.snorm), norm_str(c.pnorm), yes(c.reduces_to_S_omega), yes(c.reduces_to_P_omega),
                    yes(c.root_active), yes(c.sn_inf), yes(c.wn_inf), to_string(c.venn_region)});
    if (rep.json_mode())
      rep.line("", {{"word", name},
                    {"definition", w.str()},
                    {"snorm", norm_json(c.snorm)},
                    {"pnorm", norm_json(c.pnorm)},
                    {"reduces_to_S_omega", c.reduces_to_S_omega},
                    {"reduces_to_P_omega", c.reduces_to_P_omega},
                    {"root_active", c.root_active},
                    {"sn_inf", c.sn_inf},
                    {"wn_inf", c.wn_inf},
                    {"venn_region", to_string(c.venn_region)}});
  }
  rep.text(table(rows));
}

void cmd_sp_witness(const Options& o, Report& rep) {
  SPWord w = parse_spword(o.words.at(0));
  std::string to = o.to.empty() ? "S" : o.to;
  auto segs = to == "S" || to == "P" ? witness_to(w, to[0], o.segments) : witness_to_word(w, parse_spword(to), o.segments);
  for (std::size_t k = 0; k < segs.size(); ++k) {
    auto& s = segs[k];
    rep.line("#" + std::to_string(k) + " at " + std::to_string(s.start) + " " + s.word + " -> " + s.letter + "  [" +
                 steps_str(s.steps) + "]",
             {{"segment", k},
              {"start", s.start},
              {"word", s.word},
              {"letter", std::string(1, s.letter)},
              {"steps", steps_json(s.steps)},
              {"valid", valid_witness_segment(w, s)}});
  }
}

void cmd_sp_nf(const Options& o, Report& rep) {
  SPWord w = parse_spword(o.words.at(0));
  if (!w.infinite()) {
    auto steps = reduce_to_normal_form(w.prefix());
    std::string nf = nf_finite(w.prefix());
    rep.line((nf.empty() ? "ε" : nf) + "  [" + steps_str(steps) + "]", {{"normal_form", nf}, {"steps", steps_json(steps)}});
    return;
  }
  auto c = classify(w);
  json forms = json::array();
  if (c.reduces_to_S_omega) forms.push_back("S^ω");
  if (c.reduces_to_P_omega) forms.push_back("P^ω");
  std::string text;
  for (auto& f : forms) text += (text.empty() ? "" : ", ") + f.get<std::string>();
  rep.line(text.empty() ? "no normal form" : text, {{"normal_forms", forms}});
}

void cmd_lambda_translate(const Options& o, Report& rep) {
  SPWord w = parse_spword(o.words.at(0));
  Lambda l = translate(w, o.index, o.depth_or(kDefaultRedexDepth));
  rep.line(l.str(), {{"term", l.str()}});
}

void cmd_lambda_square(const Options& o, Report& rep) {
  SPWord w = parse_spword(o.words.at(0));
  std::size_t depth = o.depth_or(kDefaultRedexDepth);
  std::vector<std::size_t> at;
  if (!o.pos.empty()) {
    at.push_back(std::stoul(o.pos));
  } else {
    std::size_t n = w.infinite() ? depth : std::min(depth, w.length());
    for (std::size_t p = 0; p + 2 <= n; ++p)
      if (w.at(p + 1) != w.at(p + 2)) at.push_back(p);
  }
  std::size_t failed = 0;
  for (auto p : at) {
    auto sq = commuting_square(w, o.index, p, depth);
    failed += !sq.agree;
    std::string text = "factor at " + std::to_string(p) + " " + sq.step + ": " + (sq.agree ? "commutes" : "differs");
    if (!o.pos.empty()) text += "\nstep then translate " + sq.stepped.str() + "\ntranslate then step " + sq.translated.str();
    rep.line(text, {{"pos", p},
                    {"step", sq.step},
                    {"agree", sq.agree},
                    {"stepped", sq.stepped.str()},
                    {"translated", sq.translated.str()}});
  }
  if (failed) throw Error("square-failed", std::to_string(failed) + " squares do not commute");
}

void cmd_lambda_wwi(Report& rep) {
  auto demo = wwi_demo();
  for (auto& l : demo.lines) {
    std::string shown = l.displayed_steps ? " (displayed " + std::to_string(l.displayed_steps) + ")" : " (not displayed)";
    rep.line(l.rule + " " + std::to_string(l.steps) + shown + ": " + l.displayed + "  " + (l.matches ? "ok" : "MISMATCH"),
             {{"rule", l.rule},
              {"steps", l.steps},
              {"displayed_steps", l.displayed_steps},
              {"displayed", l.displayed},
              {"term", l.term.str()},
              {"matches", l.matches}});
  }
  if (!demo.ok()) throw Error("wwi-mismatch", "a line does not match its displayed form");
}

void cmd_demo_un_failure(const Options& o, Report& rep) {
  auto d = un_failure_demo(o.segments);
  auto& c = d.classification;
  rep.line("psi = " + d.word.str() + "\ns-norm " + norm_str(c.snorm) + ", p-norm " + norm_str(c.pnorm) + ", region " +
               to_string(c.venn_region),
           {{"word", d.word.str()},
            {"snorm", norm_json(c.snorm)},
            {"pnorm", norm_json(c.pnorm)},
            {"venn_region", to_string(c.venn_region)}});
  for (auto* side : {&d.to_s, &d.to_p}) {
    std::string text = std::string("toward ") + (side == &d.to_s ? "S^ω:" : "P^ω:");
    json segs = json::array();
    for (auto& s : *side) {
      text += " " + s.word;
      segs.push_back(s.word);
    }
    rep.line(text, {{"target", side == &d.to_s ? "S^ω" : "P^ω"}, {"segments", segs}});
  }
  rep.line("segments valid " + yes(d.segments_valid) + ", normal forms distinct " + yes(d.targets_distinct),
           {{"segments_valid", d.segments_valid}, {"targets_distinct", d.targets_distinct}});
  if (!d.segments_valid || !d.targets_distinct) throw Error("demo-failed", "un-failure witnesses do not check");
}

void cmd_demo_collapse(Report& rep) {
  auto d = collapse_demo();
  rep.line("rule " + d.trs.rule(0).str() + "\nsource " + d.source.str(),
           {{"rule", d.trs.rule(0).str()}, {"source", d.source.str()}});
  for (auto* r : {&d.to_a, &d.to_b})
    rep.line("reduct " + r->target().str() + "  by " + r->shape() + "\n" + trim(r->trace(3)),
             {{"target", r->target().str()}, {"shape", r->shape()}, {"trace", r->trace(3)}});
  rep.line("bisim-distinct " + yes(d.distinct) + ", join refused: " + d.join_error,
           {{"distinct", d.distinct}, {"join_error", d.join_error}});
  if (!d.distinct || d.join_error != "collapsing-rules-present")
    throw Error("demo-failed", "collapse counterexample does not check");
}

} // namespace

bool valid_witness_segment(const SPWord& w, const WitnessSegment& seg) {
  if (seg.word.empty() || seg.start == 0) return false;
  std::string slice = w.take(seg.start - 1 + seg.word.size());
  if (slice.size() < seg.start - 1 + seg.word.size() || slice.substr(seg.start - 1) != seg.word) return false;
  std::string letter(1, seg.letter);
  return sp_sum(seg.word) == (seg.letter == 'S' ? 1 : -1) && nf_finite(seg.word) == letter &&
         apply_word_steps(seg.word, seg.steps) == letter;
}

UnFailureDemo un_failure_demo(std::size_t segments) {
  SPWord psi = builtin_spword("psi");
  UnFailureDemo d{psi, classify(psi), witness_to(psi, 'S', segments), witness_to(psi, 'P', segments)};
  d.segments_valid = d.to_s.size() == segments && d.to_p.size() == segments;
  for (auto* side : {&d.to_s, &d.to_p}) {
    std::size_t next = 1;
    for (auto& s : *side) {
      d.segments_valid = d.segments_valid && s.start == next && valid_witness_segment(psi, s);
      next = s.start + s.word.size();
    }
  }
  d.targets_distinct = !bisim_equal(to_trs_term(builtin_spword("s_omega")), to_trs_term(builtin_spword("p_omega")));
  return d;
}

CollapseDemo collapse_demo() {
  Trs R = parse_trs("p: f(x, y) -> x");
  Term s = parse_term("rec s = f(f(s, b), a)");
  // contract the f(_, b) nodes, or the f(_, a) nodes, top-down
  StagedReduction to_a(s, R), to_b(s, R);
  to_a.then_limit([](std::size_t i) { return Redex{ones(i + 1), 0}; }, [](std::size_t d) { return d; },
                  parse_term("rec t = f(t, a)"));
  to_b.then_limit([](std::size_t i) { return Redex{ones(i), 0}; }, [](std::size_t d) { return d + 1; },
                  parse_term("rec t = f(t, b)"));
  to_a.check(kDefaultTruncation);
  to_b.check(kDefaultTruncation);
  CollapseDemo d{R, s, to_a, to_b, false, ""};
  d.distinct = !bisim_equal(to_a.target(), to_b.target());
  try {
    join_bounded(to_a, to_b, kDefaultTruncation);
  } catch (const Error& e) {
    d.join_error = e.code();
  }
  return d;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Infinitary rewriting workbench", "infrew"};
  app.fallthrough();
  app.require_subcommand(1);
  app.footer(kVerbs);
  app.add_option("--depth", o.depth, "redex search depth or comparison horizon");
  app.add_option("--segments", o.segments, "witness segments")->capture_default_str();
  app.add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  app.add_option("--seed", o.seed, "seed for random terms")->capture_default_str();
  app.add_option("--budget", o.budget, "join round cap")->capture_default_str();

  auto with_trs = [&](CLI::App* c) { c->add_option("trs", o.trs, "rule file")->required(); };
  auto with_term = [&](CLI::App* c) { c->add_option("--term", o.term, "term, finite or `rec X = ...`"); };
  auto with_redexes = [&](CLI::App* c) {
    c->add_option("--redexes", o.redexes, "pos[:rule] or gen*period[:rule], comma separated");
  };
  auto with_word = [&](CLI::App* c) { c->add_option("word", o.words, "builtin name or word definition")->required(); };

  std::string verb;
  auto verb_of = [&](CLI::App* c, std::string name) { c->callback([&verb, name] { verb = name; }); };

  auto* check = app.add_subcommand("check", "orthogonality check")->require_subcommand(1);
  for (auto name : {"wo", "ortho"}) {
    auto* c = check->add_subcommand(name);
    with_trs(c);
    verb_of(c, std::string("check ") + name);
  }
  auto* cp = app.add_subcommand("critical-pairs", "critical pairs");
  with_trs(cp);
  verb_of(cp, "critical-pairs");
  for (auto name : {"redexes", "clusters", "orthogonalize", "develop", "bullet", "triangle-test", "diamond-join"}) {
    auto* c = app.add_subcommand(name);
    with_trs(c);
    with_term(c);
    std::string n = name;
    if (n == "clusters" || n == "orthogonalize" || n == "develop" || n == "bullet") with_redexes(c);
    if (n == "orthogonalize") c->add_flag("--check", o.check, "verify the loop invariant after every iteration");
    if (n == "triangle-test") c->add_option("--count", o.count, "random terms when --term is absent");
    if (n == "diamond-join") {
      c->add_option("--left", o.left, "first multi-redex")->required();
      c->add_option("--right", o.right, "second multi-redex")->required();
    }
    verb_of(c, n);
  }
  for (auto name : {"compress", "pml", "join"}) {
    auto* c = app.add_subcommand(name);
    with_trs(c);
    with_term(c);
    c->add_option("--stage", o.stages, "`pos:rule ...`, `omega gen*period:rule = LIMIT` or `diverge pos:rule`");
    std::string n = name;
    if (n == "pml") c->add_option("--parallel", o.parallel, "parallel step")->required();
    if (n == "join") c->add_option("--other", o.other, "stages of the second reduction");
    verb_of(c, n);
  }
  auto* sp = app.add_subcommand("sp", "PS-words")->require_subcommand(1);
  for (auto name : {"classify", "witness", "nf"}) {
    auto* c = sp->add_subcommand(name);
    with_word(c);
    if (std::string(name) == "witness") c->add_option("--to", o.to, "S, P or a target word");
    verb_of(c, std::string("sp ") + name);
  }
  auto* lam = app.add_subcommand("lambda", "λ-calculus bridge")->require_subcommand(1);
  for (auto name : {"translate", "square"}) {
    auto* c = lam->add_subcommand(name);
    with_word(c);
    c->add_option("--index", o.index, "index of the outermost variable");
    if (std::string(name) == "square") c->add_option("--pos", o.pos, "word depth of the factor");
    verb_of(c, std::string("lambda ") + name);
  }
  verb_of(lam->add_subcommand("wwi"), "lambda wwi");
  auto* demo = app.add_subcommand("demo", "counterexample demos")->require_subcommand(1);
  verb_of(demo->add_subcommand("un-failure"), "demo un-failure");
  verb_of(demo->add_subcommand("collapse"), "demo collapse");

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' && !app.get_subcommand_no_throw(args[0])) {
    err << "infrew: unknown verb '" << args[0] << "'\n" << kVerbs;
    return 2;
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "infrew: " << e.what() << "\n" << kVerbs;
    return 2;
  }
  if (verb.empty()) {
    err << "infrew: missing verb\n" << kVerbs;
    return 2;
  }

  Report rep(out, o.format == "json");
  try {
    if (verb == "check wo") cmd_check(o, false, rep);
    else if (verb == "check ortho") cmd_check(o, true, rep);
    else if (verb == "critical-pairs") cmd_critical_pairs(o, rep);
    else if (verb == "redexes") cmd_redexes(o, rep);
    else if (verb == "clusters") cmd_clusters(o, rep);
    else if (verb == "orthogonalize") cmd_orthogonalize(o, rep);
    else if (verb == "develop") cmd_develop(o, rep);
    else if (verb == "bullet") cmd_bullet(o, rep);
    else if (verb == "triangle-test") cmd_triangle(o, rep);
    else if (verb == "diamond-join") cmd_diamond(o, rep);
    else if (verb == "compress") cmd_compress(o, rep);
    else if (verb == "pml") cmd_pml(o, rep);
    else if (verb == "join") cmd_join(o, rep);
    else if (verb == "sp classify") cmd_sp_classify(o, rep);
    else if (verb == "sp witness") cmd_sp_witness(o, rep);
    else if (verb == "sp nf") cmd_sp_nf(o, rep);
    else if (verb == "lambda translate") cmd_lambda_translate(o, rep);
    else if (verb == "lambda square") cmd_lambda_square(o, rep);
    else if (verb == "lambda wwi") cmd_lambda_wwi(rep);
    else if (verb == "demo un-failure") cmd_demo_un_failure(o, rep);
    else if (verb == "demo collapse") cmd_demo_collapse(rep);
  } catch (const Error& e) {
    if (e.code() == "usage") {
      err << "infrew " << verb << ": " << e.what() << "\n" << kVerbs;
      return 2;
    }
    err << "infrew " << verb << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "infrew " << verb << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace infrew
