#include <algorithm>
#include <numeric>
#include <tuple>

#include "infrew/clusters.hpp"
#include "infrew/error.hpp"

namespace infrew {

namespace {

// family instances looked at when comparing two families
constexpr std::size_t kFamilyWindow = 64;

auto depth_key(const Redex& r) { return std::make_tuple(r.root.depth(), r.root, r.rule); }
bool shallower(const Redex& a, const Redex& b) { return depth_key(a) < depth_key(b); }

/// y is below z: root strictly under z's root and patterns disjoint.
bool below(const Redex& y, const Redex& z, const Trs& R) {
  return z.root.strictly_above(y.root) && !overlap(y, z, R);
}

void require_member(const Term& t, const Redex& r, const Trs& R) {
  if (!is_redex(t, r, R)) throw Error("stale-redex", r.str(R) + " does not match in " + t.str());
}

std::vector<Redex> sorted_unique(std::vector<Redex> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool is_instance(const Redex& r, const RedexFamily& f) {
  if (r.rule != f.rule) return false;
  for (std::size_t k = 0;; ++k) {
    Redex i = f.instance(k);
    if (i.root == r.root) return true;
    if (i.root.depth() > r.root.depth()) return false;
  }
}

struct UnionFind {
  std::vector<std::size_t> up;
  explicit UnionFind(std::size_t n) : up(n) { std::iota(up.begin(), up.end(), 0); }
  std::size_t find(std::size_t x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) { up[find(a)] = find(b); }
};

void require_weakly_orthogonal(const Trs& R) {
  if (classify_orthogonality(R) == Orthogonality::Neither)
    throw Error("not-weakly-orthogonal", "the system has a non-trivial critical pair or is not left-linear");
}

} // namespace

// ---------------------------------------------------------------- clusters

std::string Cluster::str() const {
  std::string size = extent == Extent::Infinite ? "omega" : std::to_string(redexes.size());
  return std::string("kind=") + (kind == ClusterKind::I ? "I" : "Y") +
         " extent=" + (extent == Extent::Finite ? "fin" : "inf") + " root=" + root.str() + " size=" + size +
         " trivial=" + (is_trivial(*this) ? "true" : "false");
}

std::vector<Cluster> clusters(const Term& t, const RedexSet& W, const Trs& R) {
  for (auto& f : W.families) {
    if (f.period.is_root()) throw Error("invalid-family", f.str(R) + " has an empty period");
    for (std::size_t k = 0; k < 4; ++k) require_member(t, f.instance(k), R);
    if (!overlap(f.instance(0), f.instance(1), R))
      throw Error("unbounded-cluster-count", f.str(R) + " has non-overlapping instances");
  }
  std::vector<Redex> fin;
  for (auto& r : sorted_unique(W.finite)) {
    require_member(t, r, R);
    if (std::none_of(W.families.begin(), W.families.end(), [&](auto& f) { return is_instance(r, f); }))
      fin.push_back(r);
  }
  const auto& fam = W.families;
  const std::size_t F = fin.size();
  UnionFind uf(F + fam.size());
  for (std::size_t i = 0; i < F; ++i)
    for (std::size_t j = i + 1; j < F; ++j)
      if (overlap(fin[i], fin[j], R)) uf.join(i, j);
  for (std::size_t i = 0; i < F; ++i)
    for (std::size_t j = 0; j < fam.size(); ++j) {
      std::size_t reach = fin[i].depth() + R.rule(fin[i].rule).pattern_depth();
      for (std::size_t k = 0; fam[j].instance(k).depth() <= reach; ++k)
        if (overlap(fin[i], fam[j].instance(k), R)) {
          uf.join(i, F + j);
          break;
        }
    }
  for (std::size_t i = 0; i < fam.size(); ++i)
    for (std::size_t j = i + 1; j < fam.size(); ++j) {
      bool hit = false;
      for (std::size_t a = 0; a < kFamilyWindow && !hit; ++a)
        for (std::size_t b = 0; b < kFamilyWindow && !hit; ++b)
          hit = overlap(fam[i].instance(a), fam[j].instance(b), R);
      if (hit) uf.join(F + i, F + j);
    }

  std::map<std::size_t, Cluster> comps;
  for (std::size_t i = 0; i < F; ++i) comps[uf.find(i)].redexes.push_back(fin[i]);
  for (std::size_t j = 0; j < fam.size(); ++j) comps[uf.find(F + j)].families.push_back(fam[j]);

  std::vector<Cluster> out;
  for (auto& [_, c] : comps) {
    std::vector<Position> roots;
    for (auto& r : c.redexes) roots.push_back(r.root);
    std::vector<Position> heads = roots;
    for (auto& f : c.families) {
      heads.push_back(f.generator);
      for (std::size_t k = 0; k < kFamilyWindow; ++k) roots.push_back(f.instance(k).root);
    }
    c.extent = c.families.empty() ? Extent::Finite : Extent::Infinite;
    c.kind = ClusterKind::I;
    for (std::size_t i = 0; i < roots.size() && c.kind == ClusterKind::I; ++i)
      for (std::size_t j = i + 1; j < roots.size(); ++j)
        if (roots[i].parallel(roots[j])) {
          c.kind = ClusterKind::Y;
          break;
        }
    std::sort(heads.begin(), heads.end(), [](auto& a, auto& b) { return std::make_pair(a.depth(), a) < std::make_pair(b.depth(), b); });
    heads.erase(std::unique(heads.begin(), heads.end()), heads.end());
    c.root = heads.front();
    if (c.kind == ClusterKind::I) c.root_path = heads;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
    return std::make_pair(a.root.depth(), a.root) < std::make_pair(b.root.depth(), b.root);
  });
  return out;
}

bool is_trivial(const Cluster& c) { return c.kind == ClusterKind::Y || c.extent == Extent::Infinite; }

bool trivial_cluster_step_is_identity(const Term& t, const Cluster& c, const Trs& R) {
  if (!is_trivial(c)) throw Error("precondition", "cluster " + c.str() + " is not trivial");
  Redex member = c.redexes.empty() ? c.families.front().instance(0) : c.redexes.front();
  return bisim_equal(rewrite_at(t, member, R), t);
}

Position tail(const Redex& r, const Cluster& c, const Trs& R) {
  if (is_trivial(c)) throw Error("precondition", "tails are defined for finite I-clusters only");
  const Position& deepest = c.root_path.back();
  Position best = r.root;
  for (auto& q : r.pattern(R))
    if (q.comparable(deepest) && q.depth() > best.depth()) best = q;
  return best;
}

MultiRedex full_multiredex(const Term& t, const RedexSet& W, const Trs& R) {
  std::vector<Redex> out;
  for (auto& c : clusters(t, W, R)) {
    if (is_trivial(c)) continue;
    std::vector<Redex> chosen;
    for (;;) {
      std::optional<Redex> best;
      std::tuple<std::size_t, Position, Position, std::size_t> best_key;
      for (auto& r : c.redexes) {
        if (std::find(chosen.begin(), chosen.end(), r) != chosen.end()) continue;
        if (!std::all_of(chosen.begin(), chosen.end(), [&](const Redex& s) { return below(r, s, R); })) continue;
        Position tl = tail(r, c, R);
        auto key = std::make_tuple(tl.depth(), tl, r.root, r.rule);
        if (!best || key < best_key) {
          best = r;
          best_key = key;
        }
      }
      if (!best) break;
      chosen.push_back(*best);
    }
    out.insert(out.end(), chosen.begin(), chosen.end());
  }
  return sorted_unique(std::move(out));
}

Term bullet(const Term& t, const RedexSet& W, const Trs& R) {
  require_weakly_orthogonal(R);
  if (R.has_collapsing()) throw Error("collapsing-present", "bullet needs a system without collapsing rules");
  return develop(t, full_multiredex(t, W, R), R);
}

// ---------------------------------------------------------------- orthogonalization

std::optional<Redex> OrthogonalizationMap::operator()(const Redex& r) const {
  auto it = image.find(r);
  if (it != image.end()) return it->second;
  if (std::find(undefined.begin(), undefined.end(), r) != undefined.end()) return std::nullopt;
  return r;
}

std::vector<Redex> OrthogonalizationMap::apply(const std::vector<Redex>& U) const {
  std::vector<Redex> out;
  for (auto& r : U)
    if (auto i = (*this)(r)) out.push_back(*i);
  return sorted_unique(std::move(out));
}

std::string OrthogonalizationMap::str(const Trs& R) const {
  std::string s;
  for (auto& r : sorted_unique(domain)) {
    auto i = (*this)(r);
    s += r.str(R) + " -> " + (i ? i->str(R) : std::string("UNDEF")) + "\n";
  }
  return s;
}

bool orthogonalization_invariant(const std::vector<Redex>& W, const std::vector<Redex>& C,
                                 const OrthogonalizationMap& m, const Trs& R) {
  std::vector<Redex> done;
  for (auto& w : W)
    if (std::find(C.begin(), C.end(), w) == C.end()) done.push_back(w);
  auto img = m.apply(done);
  for (std::size_t i = 0; i < img.size(); ++i)
    for (std::size_t j = i + 1; j < img.size(); ++j)
      if (overlap(img[i], img[j], R)) return false;
  for (auto& c : C) {
    for (auto& d : done)
      if (c.root.is_prefix_of(d.root)) return false;
    for (auto& i : img)
      for (auto& q : i.pattern(R))
        if (c.root.is_prefix_of(q)) return false;
  }
  return true;
}

OrthogonalizationMap orthogonalize(const Term& t, const std::vector<Redex>& W0, const Trs& R, bool check_invariant) {
  require_weakly_orthogonal(R);
  auto W = sorted_unique(W0);
  for (auto& r : W) require_member(t, r, R);

  OrthogonalizationMap m;
  std::vector<Redex> C = W;
  auto members = [&](auto pred) {
    std::vector<Redex> v;
    for (auto& c : C)
      if (pred(c)) v.push_back(c);
    return v;
  };
  while (!C.empty()) {
    Redex x = *std::min_element(C.begin(), C.end(), shallower);
    auto X1 = members([&](const Redex& c) { return overlap(c, x, R); });
    auto X = members([&](const Redex& c) {
      return std::any_of(X1.begin(), X1.end(), [&](const Redex& y) { return overlap(c, y, R); });
    });
    bool forked = false;
    for (std::size_t i = 0; i < X.size() && !forked; ++i)
      for (std::size_t j = i + 1; j < X.size() && !forked; ++j) forked = X[i].root.parallel(X[j].root);
    if (forked) {
      m.undefined.insert(m.undefined.end(), X.begin(), X.end());
    } else {
      std::vector<Redex> B;
      for (auto& y : X)
        if (std::any_of(X.begin(), X.end(), [&](const Redex& z) { return below(y, z, R); })) B.push_back(y);
      std::optional<Redex> pick;
      for (auto& c : X)
        if (std::all_of(B.begin(), B.end(), [&](const Redex& y) { return below(y, c, R); }))
          if (!pick || shallower(c, *pick)) pick = c;
      if (!pick) throw Error("not-weakly-orthogonal", "no redex lies above the nested ones");
      std::vector<Redex> keep;
      for (auto& c : X)
        if (overlap(c, *pick, R)) {
          m.image[c] = *pick;
          keep.push_back(c);
        }
      X = std::move(keep);
    }
    m.domain.insert(m.domain.end(), X.begin(), X.end());
    std::vector<Redex> rest;
    for (auto& c : C)
      if (std::find(X.begin(), X.end(), c) == X.end()) rest.push_back(c);
    C = std::move(rest);
    if (check_invariant && !orthogonalization_invariant(W, C, m, R))
      throw Error("invariant-violated", "orthogonalization invariant fails after processing " + x.str(R));
  }
  return m;
}

// ---------------------------------------------------------------- diamond

DiamondJoin diamond_join(const Term& t, const MultiRedex& U, const MultiRedex& V, const Trs& R) {
  require_weakly_orthogonal(R);
  if (R.has_collapsing()) throw Error("collapsing-present", "the diamond join needs a system without collapsing rules");
  if (!U.is_finite() || !V.is_finite()) throw Error("precondition", "the diamond join takes finite multi-redexes");
  for (auto* S : {&U.finite, &V.finite})
    for (std::size_t i = 0; i < S->size(); ++i)
      for (std::size_t j = i + 1; j < S->size(); ++j)
        if ((*S)[i] != (*S)[j] && overlap((*S)[i], (*S)[j], R))
          throw Error("not-a-multiredex", (*S)[i].str(R) + " overlaps " + (*S)[j].str(R));

  std::vector<Redex> W = U.finite;
  W.insert(W.end(), V.finite.begin(), V.finite.end());
  auto bot = orthogonalize(t, W, R, true);
  auto Uo = bot.apply(U.finite);
  auto Vo = bot.apply(V.finite);
  auto minus = [](const std::vector<Redex>& a, const std::vector<Redex>& b) {
    std::vector<Redex> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  };

  DiamondJoin dj;
  dj.u_target = develop(t, U, R);
  dj.v_target = develop(t, V, R);
  auto side = [&](const std::vector<Redex>& first, const std::vector<Redex>& second, const Term& target,
                  std::vector<Redex>& join) {
    auto mid = develop_labelled(label_redexes(t, first, minus(second, first), R), R);
    if (!bisim_equal(mid.term, target))
      throw Error("internal", "orthogonalized multi-step changed its target");
    join = tracked_redexes(mid, tracked_finite(mid) ? std::numeric_limits<std::size_t>::max() : kDefaultTruncation);
    return develop_labelled(promote_tracked(mid), R).term.minimized();
  };
  Term cu = side(Uo, Vo, dj.u_target, dj.join_u);
  Term cv = side(Vo, Uo, dj.v_target, dj.join_v);
  if (!bisim_equal(cu, cv)) throw Error("internal", "diamond sides differ: " + cu.str() + " vs " + cv.str());
  dj.common = cu;
  return dj;
}

} // namespace infrew
