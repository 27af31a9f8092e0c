#pragma once

#include <cstdint>
#include <vector>

#include "infrew/term.hpp"

namespace infrew::detail {

/// Nodes reachable from root, as a mask.
inline std::vector<bool> reachable_mask(const Term::Graph& g, std::uint32_t root) {
  std::vector<bool> seen(g.size(), false);
  std::vector<std::uint32_t> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    auto n = stack.back();
    stack.pop_back();
    for (auto c : g[n].args)
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
  }
  return seen;
}

/// Nodes that occur at infinitely many positions of the unfolding from root,
/// i.e. nodes reachable from a cycle.
inline std::vector<bool> infinitely_occurring(const Term::Graph& g, std::uint32_t root) {
  enum : char { White, Grey, Black };
  std::vector<char> colour(g.size(), White);
  std::vector<bool> cyclic(g.size(), false);
  // iterative DFS; a back edge target lies on a cycle
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{root, 0}};
  colour[root] = Grey;
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i == g[n].args.size()) {
      colour[n] = Black;
      stack.pop_back();
      continue;
    }
    auto c = g[n].args[i++];
    if (colour[c] == Grey) cyclic[c] = true;
    else if (colour[c] == White) {
      colour[c] = Grey;
      stack.emplace_back(c, 0);
    }
  }
  std::vector<bool> inf(g.size(), false);
  std::vector<std::uint32_t> work;
  for (std::uint32_t n = 0; n < g.size(); ++n)
    if (cyclic[n]) {
      inf[n] = true;
      work.push_back(n);
    }
  while (!work.empty()) {
    auto n = work.back();
    work.pop_back();
    for (auto c : g[n].args)
      if (!inf[c]) {
        inf[c] = true;
        work.push_back(c);
      }
  }
  return inf;
}

} // namespace infrew::detail
