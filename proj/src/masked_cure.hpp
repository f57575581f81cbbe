// Internal: joint witness-walk search for defects that carry a maintenance
// obligation. The walk starts and ends at the anchor boundary; a defect
// (al, be) is cured on arrival at a vertex containing al while be has held
// in every cover and every interior vertex on the maintained side.
#pragma once

#include <deque>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "rtl/closure.hpp"

namespace rtl::detail {

struct MaskedDefect {
  int al, be;
};

struct CureGraph {
  const ClosureTable* t = nullptr;
  std::vector<Assignment> efrom, eto;
  std::vector<FormulaSet> ecover;
  std::unordered_map<Assignment, std::vector<int>> out, in;

  void add_edge(Assignment from, Assignment to, const FormulaSet& cover) {
    int ei = static_cast<int>(efrom.size());
    efrom.push_back(from);
    eto.push_back(to);
    ecover.push_back(cover);
    out[from].push_back(ei);
    in[to].push_back(ei);
  }
};

// dir > 0: forward walk, prefix maintenance (cures strengthen left to right).
// dir < 0: backward walk, suffix maintenance. Returns the walk in forward
// sequence order as edge indices, empty when there is nothing to cure.
inline std::optional<std::vector<int>> masked_cure_walk(
    const CureGraph& g, Assignment anchor, int dir,
    std::span<const MaskedDefect> defects) {
  if (defects.empty()) return std::vector<int>{};
  const int full = (1 << defects.size()) - 1;
  struct State {
    Assignment v;
    int alive, cured;
    bool operator==(const State& o) const {
      return v == o.v && alive == o.alive && cured == o.cured;
    }
  };
  struct StateHash {
    std::size_t operator()(const State& s) const {
      return std::hash<std::uint64_t>{}((std::uint64_t(s.v) << 32) ^
                                        (std::uint64_t(s.alive) << 16) ^
                                        std::uint64_t(s.cured));
    }
  };
  std::unordered_map<State, std::pair<State, int>, StateHash> parent;
  std::deque<State> q;
  State init{anchor, full, 0};
  parent.emplace(init, std::make_pair(init, -1));
  q.push_back(init);
  std::optional<State> goal;
  while (!q.empty() && !goal) {
    State s = q.front();
    q.pop_front();
    const auto& adj = dir > 0 ? g.out : g.in;
    auto it = adj.find(s.v);
    if (it == adj.end()) continue;
    for (int ei : it->second) {
      Assignment u = dir > 0 ? g.eto[ei] : g.efrom[ei];
      int alive = s.alive;
      for (std::size_t d = 0; d < defects.size(); d++)
        if ((alive >> d) & 1)
          if (!g.ecover[ei].test(defects[d].be)) alive &= ~(1 << int(d));
      int cured = s.cured;
      const FormulaSet& uset = g.t->truths(u);
      for (std::size_t d = 0; d < defects.size(); d++)
        if (((alive >> d) & 1) && uset.test(defects[d].al)) cured |= (1 << int(d));
      if (u == anchor && cured == full) {
        State st{u, 0, full};
        parent.emplace(st, std::make_pair(s, ei));
        goal = st;
        break;
      }
      int alive2 = alive & ~cured;
      for (std::size_t d = 0; d < defects.size(); d++)
        if ((alive2 >> d) & 1)
          if (!uset.test(defects[d].be)) alive2 &= ~(1 << int(d));
      State st{u, alive2, cured};
      if (parent.count(st)) continue;
      parent.emplace(st, std::make_pair(s, ei));
      q.push_back(st);
    }
  }
  if (!goal) return std::nullopt;
  std::vector<int> walk;
  State cur = *goal;
  while (true) {
    auto pr = parent.at(cur);
    if (pr.second < 0) break;
    walk.push_back(pr.second);
    cur = pr.first;
  }
  // parent chain is reverse traversal order; a backward traversal already
  // visits the sequence back to front
  if (dir > 0) std::reverse(walk.begin(), walk.end());
  return walk;
}

}  // namespace rtl::detail
