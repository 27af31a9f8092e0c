#include "infrew/spwords.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <limits>

#include "infrew/error.hpp"

namespace infrew {

namespace {

using i64 = std::int64_t;

int sign_of(char c) { return c == 'S' ? 1 : -1; }

void check_letters(std::string_view s, const char* what) {
  for (char c : s)
    if (c != 'P' && c != 'S') throw Error("invalid-word", std::string(what) + " contains '" + c + "'");
}

/// Shared view of an infinite tail: a periodic tail is the block list with
/// one (letter, 1, 0) block per letter.
struct Cycles {
  std::vector<AffineBlock> blocks;
  i64 A = 0, B = 0;         // cycle k has A + B·k letters
  i64 alpha = 0, beta = 0;  // and sum alpha + beta·k
  /// Boundary j of cycle k sits at sum start(k) + u[j] + v[j]·k, j = 0..m.
  std::vector<i64> u, v;

  explicit Cycles(const SPWord& w) {
    if (w.tail() == SPWord::Tail::Periodic)
      for (char c : w.period()) blocks.push_back({c, 1, 0});
    else
      blocks = w.blocks();
    u.push_back(0);
    v.push_back(0);
    for (auto& b : blocks) {
      A += static_cast<i64>(b.a);
      B += static_cast<i64>(b.b);
      alpha += sign_of(b.letter) * static_cast<i64>(b.a);
      beta += sign_of(b.letter) * static_cast<i64>(b.b);
      u.push_back(alpha);
      v.push_back(beta);
    }
  }

  std::size_t m() const { return blocks.size(); }
  i64 len(const AffineBlock& b, i64 k) const { return static_cast<i64>(b.a) + static_cast<i64>(b.b) * k; }
  /// Letters in cycles 0..K−1.
  i64 letters_before(i64 K) const { return K * A + B * (K * (K - 1) / 2); }
  /// Sum over cycles 0..K−1.
  i64 sum_before(i64 K) const { return K * alpha + beta * (K * (K - 1) / 2); }

  /// Largest K with letters_before(K) ≤ n.
  i64 full_cycles(i64 n) const {
    i64 lo = 0, hi = 1;
    while (letters_before(hi) <= n) hi *= 2;
    while (hi - lo > 1) {
      i64 mid = lo + (hi - lo) / 2;
      (letters_before(mid) <= n ? lo : hi) = mid;
    }
    return lo;
  }

  /// Sum of the first n letters of the tail.
  i64 sum(i64 n) const {
    i64 K = full_cycles(n);
    i64 s = sum_before(K), rest = n - letters_before(K);
    for (auto& b : blocks) {
      i64 take = std::min(rest, len(b, K));
      s += sign_of(b.letter) * take;
      rest -= take;
    }
    return s;
  }

  /// Letter i (1-based) of the tail.
  char at(i64 i) const {
    i64 K = full_cycles(i - 1);
    i64 r = i - letters_before(K);
    for (auto& b : blocks) {
      if (r <= len(b, K)) return b.letter;
      r -= len(b, K);
    }
    throw Error("internal", "letter lookup ran past its cycle");
  }

  i64 boundary(std::size_t j, i64 k, i64 base) const { return base + sum_before(k) + u[j] + v[j] * k; }

  /// sup over the tail of σ·sum, starting from `base`; nullopt when unbounded.
  std::optional<i64> sup(int sigma, i64 base) const {
    if (sigma * beta > 0) return std::nullopt;
    i64 best = std::numeric_limits<i64>::min();
    for (std::size_t j = 0; j <= m(); ++j) {
      // increment from cycle k to k+1 is σ(alpha + v_j + beta·k)
      i64 c = sigma * (alpha + v[j]), d = -sigma * beta;
      i64 k = 0;
      if (d == 0) {
        if (c > 0) return std::nullopt;
      } else if (c > 0) {
        k = (c + d - 1) / d;
      }
      best = std::max(best, sigma * boundary(j, k, base));
    }
    return best;
  }
};

/// Sequential letters of an infinite word.
class Cursor {
public:
  explicit Cursor(const SPWord& w) : w_(w), cy_(w) {
    if (cy_.m() > 0) left_ = cy_.len(cy_.blocks[0], 0);
  }

  char next() {
    if (i_ < w_.prefix().size()) return w_.prefix()[i_++];
    while (left_ == 0) {
      if (++j_ == cy_.m()) {
        j_ = 0;
        ++k_;
      }
      left_ = cy_.len(cy_.blocks[j_], k_);
    }
    --left_;
    return cy_.blocks[j_].letter;
  }

private:
  const SPWord& w_;
  Cycles cy_;
  std::size_t i_ = 0;
  std::size_t j_ = 0;
  i64 k_ = 0;
  i64 left_ = 0;
};

i64 prefix_sup(std::string_view p, int sigma, i64& end_sum) {
  i64 s = 0, best = 0;
  for (char c : p) {
    s += sign_of(c);
    best = std::max(best, sigma * s);
  }
  end_sum = s;
  return best;
}

Norm norm(const SPWord& w, int sigma) {
  i64 base = 0;
  i64 best = prefix_sup(w.prefix(), sigma, base);
  if (!w.infinite()) return static_cast<std::uint64_t>(best);
  auto t = Cycles(w).sup(sigma, base);
  if (!t) return std::nullopt;
  return static_cast<std::uint64_t>(std::max(best, *t));
}

// ---------------------------------------------------------------- parsing

struct Reader {
  std::string_view s;
  std::size_t i = 0;

  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("invalid-word", msg + " at offset " + std::to_string(i) + " in \"" + std::string(s) + "\"");
  }
  std::string ident() {
    ws();
    std::size_t b = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    if (b == i) fail("expected a name");
    return std::string(s.substr(b, i - b));
  }
  std::string quoted() {
    expect('"');
    std::size_t b = i;
    while (i < s.size() && s[i] != '"') ++i;
    if (i == s.size()) fail("unterminated string");
    return std::string(s.substr(b, i++ - b));
  }
  std::uint64_t number() {
    ws();
    std::size_t b = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (b == i || i - b > 9) fail("expected a number below 10^9");
    return std::stoull(std::string(s.substr(b, i - b)));
  }
  char letter() {
    ws();
    if (i < s.size() && (s[i] == 'P' || s[i] == 'S')) return s[i++];
    fail("expected P or S");
  }
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

} // namespace

// ---------------------------------------------------------------- SPWord

SPWord SPWord::finite(std::string word) {
  check_letters(word, "word");
  SPWord w;
  w.prefix_ = std::move(word);
  return w;
}

SPWord SPWord::periodic(std::string prefix, std::string period) {
  check_letters(prefix, "prefix");
  check_letters(period, "period");
  if (period.empty()) throw Error("invalid-word", "empty period");
  SPWord w;
  w.tail_ = Tail::Periodic;
  w.prefix_ = std::move(prefix);
  w.period_ = std::move(period);
  return w;
}

SPWord SPWord::affine(std::string prefix, std::vector<AffineBlock> blocks) {
  check_letters(prefix, "prefix");
  bool grows = false;
  for (auto& b : blocks) {
    check_letters(std::string(1, b.letter), "block");
    grows = grows || b.a + b.b > 0;
  }
  if (!grows) throw Error("invalid-word", "every block is empty in every cycle");
  SPWord w;
  w.tail_ = Tail::AffineBlocks;
  w.prefix_ = std::move(prefix);
  w.blocks_ = std::move(blocks);
  return w;
}

char SPWord::at(std::size_t i) const {
  if (i == 0) throw Error("precondition", "letters are numbered from 1");
  if (i <= prefix_.size()) return prefix_[i - 1];
  if (!infinite()) throw Error("precondition", "letter " + std::to_string(i) + " past the end of a finite word");
  return Cycles(*this).at(static_cast<i64>(i - prefix_.size()));
}

std::string SPWord::take(std::size_t n) const {
  if (!infinite()) return prefix_.substr(0, n);
  std::string out;
  Cursor c(*this);
  for (std::size_t i = 0; i < n; ++i) out += c.next();
  return out;
}

std::string SPWord::str() const {
  std::string out = "prefix=\"" + prefix_ + "\"";
  if (tail_ == Tail::Periodic) out += "; periodic=\"" + period_ + "\"";
  if (tail_ == Tail::AffineBlocks) {
    out += "; blocks=[";
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      auto& b = blocks_[j];
      if (j) out += ",";
      out += "(" + std::string(1, b.letter) + "," + std::to_string(b.a) + "," + std::to_string(b.b) + ")";
    }
    out += "]";
  }
  return out;
}

std::vector<std::string> builtin_spword_names() {
  return {"psi", "zeta", "xi", "xi_prime", "s_omega", "p_omega", "ssp_omega"};
}

SPWord builtin_spword(std::string_view name) {
  if (name == "psi") return SPWord::affine("", {{'P', 1, 2}, {'S', 2, 2}});
  if (name == "zeta") return SPWord::periodic("", "PS");
  if (name == "xi") return SPWord::affine("", {{'S', 1, 1}, {'P', 1, 1}});
  if (name == "xi_prime") return SPWord::affine("S", {{'S', 1, 1}, {'P', 1, 1}});
  if (name == "s_omega") return SPWord::periodic("", "S");
  if (name == "p_omega") return SPWord::periodic("", "P");
  if (name == "ssp_omega") return SPWord::periodic("", "SSP");
  throw Error("invalid-word", "unknown builtin word '" + std::string(name) + "'");
}

SPWord parse_spword(std::string_view text) {
  auto t = trim(text);
  for (auto& n : builtin_spword_names())
    if (t == n) return builtin_spword(t);
  if (t.find('=') == std::string_view::npos) {
    if (t == "ε") return SPWord::finite("");
    return SPWord::finite(std::string(t));
  }
  Reader r{t};
  std::string prefix;
  std::optional<std::string> period;
  std::optional<std::vector<AffineBlock>> blocks;
  for (;;) {
    auto key = r.ident();
    r.expect('=');
    if (key == "prefix") {
      prefix = r.quoted();
    } else if (key == "periodic") {
      period = r.quoted();
    } else if (key == "blocks") {
      blocks.emplace();
      r.expect('[');
      if (!r.eat(']')) {
        do {
          r.expect('(');
          AffineBlock b;
          b.letter = r.letter();
          r.expect(',');
          b.a = r.number();
          r.expect(',');
          b.b = r.number();
          r.expect(')');
          blocks->push_back(b);
        } while (r.eat(','));
        r.expect(']');
      }
    } else {
      r.fail("unknown key '" + key + "'");
    }
    if (!r.eat(';')) break;
    r.ws();
    if (r.i == t.size()) break;
  }
  r.ws();
  if (r.i != t.size()) r.fail("trailing input");
  if (period && blocks) throw Error("invalid-word", "both periodic and blocks given");
  if (period) return SPWord::periodic(prefix, *period);
  if (blocks) return SPWord::affine(prefix, *blocks);
  return SPWord::finite(prefix);
}

// ---------------------------------------------------------------- sums and norms

std::int64_t sp_sum(std::string_view word) {
  i64 s = 0;
  for (char c : word) s += sign_of(c);
  return s;
}

std::int64_t sp_sum(const SPWord& w, std::size_t n) {
  const auto& p = w.prefix();
  if (n <= p.size()) return sp_sum(std::string_view(p).substr(0, n));
  if (!w.infinite()) throw Error("precondition", "depth " + std::to_string(n) + " past the end of a finite word");
  return sp_sum(p) + Cycles(w).sum(static_cast<i64>(n - p.size()));
}

std::string norm_str(const Norm& n) { return n ? std::to_string(*n) : "∞"; }

Norm s_norm(const SPWord& w) { return norm(w, 1); }
Norm p_norm(const SPWord& w) { return norm(w, -1); }

std::string to_string(VennRegion r) {
  switch (r) {
    case VennRegion::SNtoS: return "SN-to-S";
    case VennRegion::SNtoP: return "SN-to-P";
    case VennRegion::RACore: return "RA-core";
    case VennRegion::SOnlyNonSN: return "S-only-non-SN";
    case VennRegion::POnlyNonSN: return "P-only-non-SN";
    case VennRegion::RAOther: return "RA-other";
    case VennRegion::Stuck: return "stuck";
  }
  return "?";
}

SPClassification classify(const SPWord& w) {
  if (!w.infinite()) throw Error("precondition", "classification needs an infinite word");
  SPClassification c;
  c.snorm = s_norm(w);
  c.pnorm = p_norm(w);
  c.reduces_to_S_omega = !c.snorm;
  c.reduces_to_P_omega = !c.pnorm;
  c.wn_inf = c.reduces_to_S_omega || c.reduces_to_P_omega;

  Cycles cy(w);
  i64 base = sp_sum(w.prefix());
  if (cy.beta != 0) {
    // the sum tends to ±∞ quadratically
    c.sn_inf = true;
  } else {
    // cycle k sweeps every value between its lowest and highest boundary;
    // boundary j moves by slope alpha + v_j per cycle
    i64 lo_slope = std::numeric_limits<i64>::max(), hi_slope = std::numeric_limits<i64>::min();
    for (std::size_t j = 0; j <= cy.m(); ++j) {
      lo_slope = std::min(lo_slope, cy.alpha + cy.v[j]);
      hi_slope = std::max(hi_slope, cy.alpha + cy.v[j]);
    }
    i64 lo = std::numeric_limits<i64>::max(), hi = std::numeric_limits<i64>::min();
    for (std::size_t j = 0; j <= cy.m(); ++j) {
      if (cy.alpha + cy.v[j] == lo_slope) lo = std::min(lo, base + cy.u[j]);
      if (cy.alpha + cy.v[j] == hi_slope) hi = std::max(hi, base + cy.u[j]);
    }
    c.sn_inf = lo_slope > 0 || hi_slope < 0;
    if (!c.sn_inf) {
      bool low_ok = lo_slope < 0 || lo <= 0;
      bool high_ok = hi_slope > 0 || hi >= 0;
      c.root_active = low_ok && high_ok;
    }
  }

  if (c.reduces_to_S_omega && c.reduces_to_P_omega) c.venn_region = VennRegion::RACore;
  else if (c.root_active) c.venn_region = VennRegion::RAOther;
  else if (c.sn_inf) c.venn_region = c.reduces_to_S_omega ? VennRegion::SNtoS : VennRegion::SNtoP;
  else if (c.reduces_to_S_omega) c.venn_region = VennRegion::SOnlyNonSN;
  else if (c.reduces_to_P_omega) c.venn_region = VennRegion::POnlyNonSN;
  else c.venn_region = VennRegion::Stuck;
  return c;
}

// ---------------------------------------------------------------- finite reductions

std::string apply_word_steps(std::string word, const std::vector<WordStep>& steps) {
  for (auto& st : steps) {
    std::string want = st.rule == "ps" ? "PS" : st.rule == "sp" ? "SP" : "";
    if (want.empty()) throw Error("unknown-rule", "no word rule '" + st.rule + "'");
    if (st.at + 2 > word.size() || word.compare(st.at, 2, want) != 0)
      throw Error("stale-redex", "no " + want + " factor at depth " + std::to_string(st.at) + " of " + word);
    word.erase(st.at, 2);
  }
  return word;
}

std::vector<WordStep> reduce_to_normal_form(std::string word, std::optional<std::string> only) {
  std::vector<WordStep> out;
  std::size_t from = 0;
  for (;;) {
    std::size_t i = from;
    while (i + 1 < word.size()) {
      bool ps = word[i] == 'P' && word[i + 1] == 'S';
      bool sp = word[i] == 'S' && word[i + 1] == 'P';
      if ((ps && only.value_or("ps") == "ps") || (sp && only.value_or("sp") == "sp")) break;
      ++i;
    }
    if (i + 1 >= word.size()) return out;
    out.push_back({i, word[i] == 'P' ? "ps" : "sp"});
    word.erase(i, 2);
    // everything left of i - 1 was already free of redexes
    from = i > 0 ? i - 1 : 0;
  }
}

std::string nf_finite(std::string_view word) {
  i64 z = sp_sum(word);
  return z >= 0 ? std::string(static_cast<std::size_t>(z), 'S') : std::string(static_cast<std::size_t>(-z), 'P');
}

namespace {

std::vector<WitnessSegment> partition(const SPWord& w, const std::function<char(std::size_t)>& letter_of,
                                      std::size_t segments) {
  std::vector<WitnessSegment> out;
  Cursor cur(w);
  std::size_t pos = 1;
  for (std::size_t i = 1; i <= segments; ++i) {
    WitnessSegment seg;
    seg.start = pos;
    seg.letter = letter_of(i);
    int want = sign_of(seg.letter);
    i64 s = 0;
    // first passage to ±1; exists because the matching norm is infinite
    while (s != want) {
      char c = cur.next();
      seg.word += c;
      s += sign_of(c);
      ++pos;
    }
    seg.steps = reduce_to_normal_form(seg.word, want > 0 ? "ps" : "sp");
    out.push_back(std::move(seg));
  }
  return out;
}

} // namespace

std::vector<WitnessSegment> witness_to(const SPWord& w, char target, std::size_t segments) {
  if (target != 'S' && target != 'P') throw Error("precondition", "target must be S or P");
  if (!w.infinite()) throw Error("precondition", "witnesses need an infinite word");
  Norm n = target == 'S' ? s_norm(w) : p_norm(w);
  if (n) throw Error("norm-finite", std::string(1, target) + "-norm of " + w.str() + " is " + norm_str(n));
  return partition(w, [target](std::size_t) { return target; }, segments);
}

std::vector<WitnessSegment> witness_to_word(const SPWord& w, const SPWord& u, std::size_t segments) {
  if (!w.infinite() || !u.infinite()) throw Error("precondition", "witnesses need infinite words");
  if (s_norm(w) || p_norm(w)) throw Error("precondition", "both norms of " + w.str() + " must be infinite");
  return partition(w, [&u](std::size_t i) { return u.at(i); }, segments);
}

// ---------------------------------------------------------------- terms

Term to_trs_term(const SPWord& w, std::size_t depth) {
  std::string letters = w.tail() == SPWord::Tail::AffineBlocks ? w.take(depth) : w.prefix() + w.period();
  Term::Graph g;
  for (std::size_t i = 0; i < letters.size(); ++i)
    g.push_back({false, std::string(1, letters[i]), {static_cast<std::uint32_t>(i + 1)}});
  if (w.tail() == SPWord::Tail::Periodic)
    g.back().args[0] = static_cast<std::uint32_t>(w.prefix().size());
  else
    g.push_back({true, "x", {}});
  return Term::from_graph(std::move(g), 0);
}

std::string word_of_term(const Term& t, std::size_t depth) {
  std::string out;
  Term cur = t;
  while (out.size() < depth && !cur.is_var() && cur.arity() == 1 && (cur.symbol() == "P" || cur.symbol() == "S")) {
    out += cur.symbol();
    cur = cur.arg(1);
  }
  return out;
}

} // namespace infrew
