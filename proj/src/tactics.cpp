#include "rtl/tactics.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "masked_cure.hpp"

namespace rtl {

bool forward_k(const Mosaic& m, const FormulaSet& q, const ClosureTable& t) {
  for (int u : t.until_items()) {
    int al = t.left_child(u), be = t.right_child(u);
    bool want = m.cover.test(be) &&
                (!m.cover.test(t.sim_of(al)) || m.end.test(al) ||
                 (m.end.test(be) && m.end.test(u)));
    if (q.test(u) != want) return false;
  }
  return true;
}

bool backward_k(const Mosaic& m, const FormulaSet& q, const ClosureTable& t) {
  for (int s : t.since_items()) {
    int al = t.left_child(s), be = t.right_child(s);
    bool want = m.cover.test(be) &&
                (!m.cover.test(t.sim_of(al)) || m.start.test(al) ||
                 (m.start.test(be) && m.start.test(s)));
    if (q.test(s) != want) return false;
  }
  return true;
}

bool shuffle_spec_well_formed(const ShuffleSpec& spec, const ClosureTable& t) {
  if (spec.ps.empty()) return false;
  for (const Mpc& p : spec.ps)
    if (!is_mpc_set(p.members, t)) return false;
  for (const auto& lam : spec.lambdas) {
    if (lam.empty()) return false;
    for (std::size_t i = 0; i + 1 < lam.size(); i++)
      if (lam[i].end != lam[i + 1].start) return false;
  }
  return true;
}

ShuffleExpansion build_shuffle_expansion(const Mosaic& m, const ShuffleSpec& spec) {
  ShuffleExpansion e;
  const FormulaSet& B = m.cover;
  int s = static_cast<int>(spec.ps.size()) - 1;
  int r = static_cast<int>(spec.lambdas.size());
  e.m_prime = Mosaic{m.start, B, spec.ps[0].members};
  for (int i = 0; i < s; i++)
    e.ys.push_back(Mosaic{spec.ps[i].members, B, spec.ps[i + 1].members});
  e.ys.push_back(Mosaic{spec.ps[s].members, B, spec.ps[0].members});
  e.m_dblprime = Mosaic{spec.ps[0].members, B, m.end};
  e.mu = e.ys;
  if (r > 0) {
    std::vector<FormulaSet> as, cs;
    for (const auto& lam : spec.lambdas) {
      as.push_back(lam.front().start);
      cs.push_back(lam.back().end);
    }
    e.xs.push_back(Mosaic{spec.ps[0].members, B, as[0]});
    for (int i = 1; i < r; i++) e.xs.push_back(Mosaic{cs[i - 1], B, as[i]});
    e.xs.push_back(Mosaic{cs[r - 1], B, spec.ps[0].members});
    for (int i = 0; i < r; i++) {
      e.lambda_flat.push_back(e.xs[i]);
      for (const Mosaic& d : spec.lambdas[i]) e.lambda_flat.push_back(d);
    }
    e.lambda_flat.push_back(e.xs[r]);
  }
  return e;
}

bool check_shuffle_conditions(const Mosaic& m, const ShuffleSpec& spec,
                              const ClosureTable& t) {
  if (!shuffle_spec_well_formed(spec, t)) return false;
  const FormulaSet& B = m.cover;
  // S0
  for (const Mpc& p : spec.ps)
    if (!B.subset_of(p.members)) return false;
  for (const auto& lam : spec.lambdas)
    for (const Mosaic& d : lam)
      if (!(B.subset_of(d.start) && B.subset_of(d.cover) && B.subset_of(d.end)))
        return false;
  // S1
  for (const Mpc& p : spec.ps)
    if (!(forward_k(m, p.members, t) && backward_k(m, p.members, t))) return false;
  // S2 / S3
  for (const auto& lam : spec.lambdas) {
    if (!backward_k(m, lam.front().start, t)) return false;
    if (!forward_k(m, lam.back().end, t)) return false;
  }
  // S4 / S5
  if (!forward_k(m, m.start, t)) return false;
  if (!backward_k(m, m.end, t)) return false;
  // S6
  for (int i = 0; i < t.size(); i++) {
    if (B.test(t.sim_of(i))) continue;
    bool found = false;
    for (const Mpc& p : spec.ps)
      if (p.members.test(i)) { found = true; break; }
    for (const auto& lam : spec.lambdas) {
      if (found) break;
      for (const Mosaic& d : lam)
        if (d.start.test(i) || d.end.test(i)) { found = true; break; }
    }
    if (!found) return false;
  }
  return true;
}

bool check_shuffle_definitional(const Mosaic& m, const ShuffleSpec& spec,
                                const ClosureTable& t) {
  if (!shuffle_spec_well_formed(spec, t)) return false;
  ShuffleExpansion e = build_shuffle_expansion(m, spec);
  int s = static_cast<int>(spec.ps.size()) - 1;
  int r = static_cast<int>(spec.lambdas.size());

  auto bad = [&](const Mosaic& piece) { return validate_mosaic(piece, t).has_value(); };
  if (bad(e.m_prime) || bad(e.m_dblprime)) return false;
  for (const Mosaic& y : e.ys)
    if (bad(y)) return false;
  for (const Mosaic& x : e.xs)
    if (bad(x)) return false;
  for (const auto& lam : spec.lambdas)
    for (const Mosaic& d : lam)
      if (bad(d)) return false;

  auto cat = [](std::initializer_list<std::span<const Mosaic>> parts) {
    std::vector<Mosaic> out;
    for (auto sp : parts) out.insert(out.end(), sp.begin(), sp.end());
    return out;
  };
  auto one = [](const Mosaic& x) { return std::span<const Mosaic>(&x, 1); };

  // F1
  {
    auto seq = cat({one(e.m_prime), e.lambda_flat, e.mu, one(e.m_dblprime)});
    if (!is_full_decomposition(m, seq, t)) return false;
  }
  // F2
  if (r > 0) {
    auto seq = cat({e.lambda_flat, e.mu, one(e.xs[0])});
    if (!is_full_decomposition(e.xs[0], seq, t)) return false;
  }
  // F3: rotations for the interior glue pieces
  for (int i = 1; i < r; i++) {
    std::vector<Mosaic> seq;
    seq.push_back(e.xs[i]);
    for (int j = i; j < r; j++) {
      for (const Mosaic& d : spec.lambdas[j]) seq.push_back(d);
      seq.push_back(e.xs[j + 1]);
    }
    for (const Mosaic& y : e.mu) seq.push_back(y);
    seq.push_back(e.xs[0]);
    for (int j = 0; j < i; j++) {
      for (const Mosaic& d : spec.lambdas[j]) seq.push_back(d);
      seq.push_back(e.xs[j + 1]);
    }
    if (!is_full_decomposition(e.xs[i], seq, t)) return false;
  }
  // F4
  if (r > 0) {
    auto seq = cat({one(e.xs[r]), e.mu, e.lambda_flat});
    if (!is_full_decomposition(e.xs[r], seq, t)) return false;
  }
  // F5
  for (int i = 0; i < s; i++) {
    std::vector<Mosaic> seq(e.ys.begin() + i, e.ys.end());
    seq.insert(seq.end(), e.lambda_flat.begin(), e.lambda_flat.end());
    seq.insert(seq.end(), e.ys.begin(), e.ys.begin() + i + 1);
    if (!is_full_decomposition(e.ys[i], seq, t)) return false;
  }
  // F6
  {
    auto seq = cat({one(e.ys[s]), e.lambda_flat, e.mu});
    if (!is_full_decomposition(e.ys[s], seq, t)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Existence searches
// ---------------------------------------------------------------------------

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

// Base mosaics usable inside a decomposition of a mosaic with cover B, as a
// graph on boundary MPCs (represented by assignment ids).
struct SearchGraph {
  const ClosureTable& t;
  FormulaSet B;
  std::vector<Mosaic> edges;                 // canonically sorted
  std::vector<Assignment> efrom, eto;
  std::unordered_map<Assignment, std::vector<int>> out, in;

  SearchGraph(const FormulaSet& cover, std::span<const Mosaic> base,
              const ClosureTable& table)
      : t(table), B(cover) {
    for (const Mosaic& d : base) {
      if (B.subset_of(d.start) && B.subset_of(d.cover) && B.subset_of(d.end))
        edges.push_back(d);
    }
    std::sort(edges.begin(), edges.end(), [](const Mosaic& a, const Mosaic& b) {
      if (a.start != b.start) return std::lexicographical_compare(
          a.start.w.rbegin(), a.start.w.rend(), b.start.w.rbegin(), b.start.w.rend());
      if (a.end != b.end) return std::lexicographical_compare(
          a.end.w.rbegin(), a.end.w.rend(), b.end.w.rbegin(), b.end.w.rend());
      return std::lexicographical_compare(
          a.cover.w.rbegin(), a.cover.w.rend(), b.cover.w.rbegin(), b.cover.w.rend());
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (std::size_t i = 0; i < edges.size(); i++) {
      auto fa = assignment_of(edges[i].start, t);
      auto ta = assignment_of(edges[i].end, t);
      if (!fa || !ta) throw std::invalid_argument("search: base boundary is not an MPC");
      efrom.push_back(*fa);
      eto.push_back(*ta);
      out[*fa].push_back(static_cast<int>(i));
      in[*ta].push_back(static_cast<int>(i));
    }
  }

  // shortest-edge-count distances from src following out-edges (dir > 0) or
  // in-edges (dir < 0); parent edge recorded for path reconstruction
  void bfs(Assignment src, int dir, std::unordered_map<Assignment, int>& dist,
           std::unordered_map<Assignment, int>& parent_edge) const {
    dist.clear();
    parent_edge.clear();
    std::deque<Assignment> q;
    dist[src] = 0;
    q.push_back(src);
    while (!q.empty()) {
      Assignment v = q.front();
      q.pop_front();
      auto it = (dir > 0 ? out : in).find(v);
      if (it == (dir > 0 ? out : in).end()) continue;
      for (int ei : it->second) {
        Assignment w = dir > 0 ? eto[ei] : efrom[ei];
        if (dist.count(w)) continue;
        dist[w] = dist[v] + 1;
        parent_edge[w] = ei;
        q.push_back(w);
      }
    }
  }

  // forward path src -> dst as edge indices (empty if src == dst)
  std::vector<int> path(Assignment src, Assignment dst,
                        const std::unordered_map<Assignment, int>& parent_edge,
                        int dir) const {
    std::vector<int> out_edges;
    Assignment v = dst;
    while (v != src) {
      int ei = parent_edge.at(v);
      out_edges.push_back(ei);
      v = dir > 0 ? efrom[ei] : eto[ei];
    }
    if (dir > 0) std::reverse(out_edges.begin(), out_edges.end());
    return out_edges;
  }
};

struct AnchorAnalysis {
  std::unordered_map<Assignment, int> dist_from, dist_to;
  std::unordered_map<Assignment, int> par_from, par_to;

  AnchorAnalysis(const SearchGraph& g, Assignment anchor) {
    g.bfs(anchor, +1, dist_from, par_from);
    g.bfs(anchor, -1, dist_to, par_to);
  }
  bool on_cycle_interior(Assignment u, Assignment anchor) const {
    if (u == anchor) return false;
    return dist_from.count(u) && dist_to.count(u);
  }
};

// A vertex other than the anchor, lying on an anchor cycle and containing
// formula idx; picks the closest, lowest-numbered one.
std::optional<Assignment> coverage_vertex(const SearchGraph& g, const AnchorAnalysis& an,
                                          Assignment anchor, int idx) {
  std::optional<Assignment> best;
  long best_cost = kInf;
  for (const auto& [v, dfrom] : an.dist_from) {
    if (v == anchor) continue;
    auto itto = an.dist_to.find(v);
    if (itto == an.dist_to.end()) continue;
    if (!g.t.truths(v).test(idx)) continue;
    long cost = static_cast<long>(dfrom) + itto->second;
    if (cost < best_cost || (cost == best_cost && best && v < *best)) {
      best_cost = cost;
      best = v;
    }
  }
  return best;
}

std::vector<Mosaic> edges_to_mosaics(const SearchGraph& g, const std::vector<int>& eis) {
  std::vector<Mosaic> out;
  out.reserve(eis.size());
  for (int ei : eis) out.push_back(g.edges[ei]);
  return out;
}

// Common engine for lead and trail. In lead mode the walk is anchored at
// end(m) and appended after m; in trail mode it is anchored at start(m) and
// prepended. `mirror` flips every role.
std::optional<std::vector<Mosaic>> lead_trail_search(const Mosaic& m,
                                                     std::span<const Mosaic> base,
                                                     const ClosureTable& t,
                                                     bool trail) {
  const FormulaSet& B = m.cover;
  const FormulaSet& near = trail ? m.start : m.end;  // boundary the walk cycles on

  if (!B.subset_of(near)) return std::nullopt;

  // Until entries of the start need their hold formula in the cover for a
  // lead walk; mirror for trail.
  const auto& strict_items = trail ? t.since_items() : t.until_items();
  const FormulaSet& strict_home = trail ? m.end : m.start;
  for (int u : strict_items) {
    if (!strict_home.test(u)) continue;
    if (!B.test(t.right_child(u))) return std::nullopt;
  }

  SearchGraph g(B, base, t);
  auto anchor_opt = assignment_of(near, t);
  if (!anchor_opt) return std::nullopt;
  Assignment anchor = *anchor_opt;
  AnchorAnalysis an(g, anchor);

  // Requirements.
  std::vector<int> coverage_needs;                // formulas needing an interior vertex
  std::vector<detail::MaskedDefect> masked;       // defects with maintenance

  // Until entries in start(m): in lead mode witnessed anywhere with free
  // maintenance; in trail mode they carry prefix maintenance inside the walk.
  for (int u : t.until_items()) {
    if (!m.start.test(u)) continue;
    int al = t.left_child(u), be = t.right_child(u);
    bool direct = m.cover.test(be) &&
                  ((m.end.test(be) && m.end.test(u)) || m.end.test(al));
    if (direct) continue;
    if (!trail) {
      if (!m.cover.test(be)) return std::nullopt;  // unreachable; guarded above
      coverage_needs.push_back(al);
    } else {
      masked.push_back({al, be});
    }
  }
  // Since entries in end(m): mirror.
  for (int s : t.since_items()) {
    if (!m.end.test(s)) continue;
    int al = t.left_child(s), be = t.right_child(s);
    bool direct = m.cover.test(be) &&
                  ((m.start.test(be) && m.start.test(s)) || m.start.test(al));
    if (direct) continue;
    if (trail) {
      if (!m.cover.test(be)) return std::nullopt;
      coverage_needs.push_back(al);
    } else {
      masked.push_back({al, be});
    }
  }
  // Type-3 defects: witnessed by the near boundary itself or an interior
  // vertex of the walk.
  for (int i = 0; i < t.size(); i++) {
    if (B.test(t.sim_of(i))) continue;
    if (near.test(i)) continue;
    coverage_needs.push_back(i);
  }

  // Plan coverage loops; interior vertices of planned loops may serve
  // several requirements.
  std::vector<std::vector<int>> loops;
  auto loop_covers = [&](int idx) {
    for (const auto& loop : loops) {
      for (std::size_t k = 0; k + 1 < loop.size(); k++)
        if (g.t.truths(g.eto[loop[k]]).test(idx)) return true;
    }
    return false;
  };
  std::sort(coverage_needs.begin(), coverage_needs.end());
  coverage_needs.erase(std::unique(coverage_needs.begin(), coverage_needs.end()),
                       coverage_needs.end());
  for (int idx : coverage_needs) {
    if (loop_covers(idx)) continue;
    auto u = coverage_vertex(g, an, anchor, idx);
    if (!u) return std::nullopt;
    std::vector<int> loop = g.path(anchor, *u, an.par_from, +1);
    std::vector<int> back = g.path(anchor, *u, an.par_to, -1);
    // par_to holds reversed-search parents: path() returns the u -> anchor
    // walk in forward orientation already
    loop.insert(loop.end(), back.begin(), back.end());
    loops.push_back(std::move(loop));
  }

  // Masked segment.
  std::vector<int> masked_walk;
  if (!masked.empty()) {
    detail::CureGraph cg;
    cg.t = &t;
    for (std::size_t i = 0; i < g.edges.size(); i++)
      cg.add_edge(g.efrom[i], g.eto[i], g.edges[i].cover);
    auto w = detail::masked_cure_walk(cg, anchor, trail ? +1 : -1, masked);
    if (!w) return std::nullopt;
    masked_walk = *w;
  }

  // Assemble: in lead mode free-maintenance segments first, masked (suffix
  // maintained) last; trail mirrors this.
  std::vector<int> all_edges;
  if (!trail) {
    for (auto& l : loops) all_edges.insert(all_edges.end(), l.begin(), l.end());
    all_edges.insert(all_edges.end(), masked_walk.begin(), masked_walk.end());
  } else {
    all_edges.insert(all_edges.end(), masked_walk.begin(), masked_walk.end());
    for (auto& l : loops) all_edges.insert(all_edges.end(), l.begin(), l.end());
  }
  if (all_edges.empty()) {
    // sigma must be nonempty: shortest anchored cycle
    int best = kInf;
    int best_first = -1;
    auto ito = g.out.find(anchor);
    if (ito != g.out.end()) {
      for (int ei : ito->second) {
        auto itd = an.dist_to.find(g.eto[ei]);
        if (itd == an.dist_to.end()) continue;
        if (1 + itd->second < best) {
          best = 1 + itd->second;
          best_first = ei;
        }
      }
    }
    if (best_first < 0) return std::nullopt;
    all_edges.push_back(best_first);
    auto rest = g.path(anchor, g.eto[best_first], an.par_to, -1);
    all_edges.insert(all_edges.end(), rest.begin(), rest.end());
  }

  std::vector<Mosaic> sigma = edges_to_mosaics(g, all_edges);
  // final validation against the literal definition
  std::vector<Mosaic> seq;
  if (!trail) {
    seq.push_back(m);
    seq.insert(seq.end(), sigma.begin(), sigma.end());
  } else {
    seq = sigma;
    seq.push_back(m);
  }
  if (!is_full_decomposition(m, seq, t))
    throw std::logic_error("lead/trail search produced an invalid witness");
  return sigma;
}

}  // namespace

std::optional<std::vector<Mosaic>> exists_lead(const Mosaic& m,
                                               std::span<const Mosaic> base,
                                               const ClosureTable& t) {
  return lead_trail_search(m, base, t, /*trail=*/false);
}

std::optional<std::vector<Mosaic>> exists_trail(const Mosaic& m,
                                                std::span<const Mosaic> base,
                                                const ClosureTable& t) {
  return lead_trail_search(m, base, t, /*trail=*/true);
}

std::optional<ShuffleSpec> exists_shuffle(const Mosaic& m, std::span<const Mosaic> base,
                                          const ClosureTable& t) {
  const FormulaSet& B = m.cover;
  // S4 / S5 fail fast
  if (!forward_k(m, m.start, t)) return std::nullopt;
  if (!backward_k(m, m.end, t)) return std::nullopt;

  // candidate point types: MPCs containing B with both boundary properties
  std::vector<Assignment> pk;
  int na = t.assignment_count();
  for (Assignment v = 0; v < static_cast<Assignment>(na); v++) {
    const FormulaSet& tv = t.truths(v);
    if (!B.subset_of(tv)) continue;
    if (forward_k(m, tv, t) && backward_k(m, tv, t)) pk.push_back(v);
  }
  if (pk.empty()) return std::nullopt;  // at least one point type is mandatory

  SearchGraph g(B, base, t);
  // vertex classes for lambda boundaries
  auto fwd_ok = [&](Assignment v) { return forward_k(m, t.truths(v), t); };
  auto bwd_ok = [&](Assignment v) { return backward_k(m, t.truths(v), t); };

  // multi-source shortest distances from backward-ok vertices / to
  // forward-ok vertices
  std::unordered_map<Assignment, int> d1, d2, p1, p2;
  {
    std::deque<Assignment> q;
    auto push_sources = [&](std::unordered_map<Assignment, int>& dist,
                            std::deque<Assignment>& qq, bool backward_side) {
      std::vector<Assignment> verts;
      for (const auto& kv : g.out) verts.push_back(kv.first);
      for (const auto& kv : g.in) verts.push_back(kv.first);
      std::sort(verts.begin(), verts.end());
      verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
      for (Assignment v : verts) {
        bool ok = backward_side ? bwd_ok(v) : fwd_ok(v);
        if (ok) {
          dist[v] = 0;
          qq.push_back(v);
        }
      }
    };
    push_sources(d1, q, /*backward_side=*/true);
    while (!q.empty()) {
      Assignment v = q.front();
      q.pop_front();
      auto it = g.out.find(v);
      if (it == g.out.end()) continue;
      for (int ei : it->second) {
        Assignment w = g.eto[ei];
        if (d1.count(w)) continue;
        d1[w] = d1[v] + 1;
        p1[w] = ei;
        q.push_back(w);
      }
    }
    std::deque<Assignment> q2;
    push_sources(d2, q2, /*backward_side=*/false);
    while (!q2.empty()) {
      Assignment v = q2.front();
      q2.pop_front();
      auto it = g.in.find(v);
      if (it == g.in.end()) continue;
      for (int ei : it->second) {
        Assignment w = g.efrom[ei];
        if (d2.count(w)) continue;
        d2[w] = d2[v] + 1;
        p2[w] = ei;
        q2.push_back(w);
      }
    }
  }

  std::vector<Assignment> chosen_ps;
  std::vector<std::vector<Mosaic>> lambdas;
  auto covered = [&](int idx) {
    for (Assignment v : chosen_ps)
      if (t.truths(v).test(idx)) return true;
    for (const auto& lam : lambdas)
      for (const Mosaic& d : lam)
        if (d.start.test(idx) || d.end.test(idx)) return true;
    return false;
  };

  for (int i = 0; i < t.size(); i++) {
    if (B.test(t.sim_of(i))) continue;  // not a type-3 defect
    if (covered(i)) continue;
    // point-type route first
    bool done = false;
    for (Assignment v : pk) {
      if (t.truths(v).test(i)) {
        chosen_ps.push_back(v);
        done = true;
        break;
      }
    }
    if (done) continue;
    // lambda route: path from a backward-ok vertex to a forward-ok vertex
    // through a vertex containing i, at least one edge long
    std::optional<Assignment> best;
    long best_cost = kInf;
    auto consider = [&](Assignment v, long cost) {
      if (cost < best_cost || (cost == best_cost && best && v < *best)) {
        best_cost = cost;
        best = v;
      }
    };
    for (const auto& [v, dv1] : d1) {
      auto it2 = d2.find(v);
      if (it2 == d2.end()) continue;
      if (!t.truths(v).test(i)) continue;
      long total = static_cast<long>(dv1) + it2->second;
      if (total >= 1) consider(v, total);
    }
    if (!best) return std::nullopt;
    // reconstruct prefix (towards d1 source) and suffix (towards d2 sink)
    std::vector<int> pre, suf;
    {
      Assignment v = *best;
      while (d1.at(v) > 0) {
        int ei = p1.at(v);
        pre.push_back(ei);
        v = g.efrom[ei];
      }
      std::reverse(pre.begin(), pre.end());
      v = *best;
      while (d2.at(v) > 0) {
        int ei = p2.at(v);
        suf.push_back(ei);
        v = g.eto[ei];
      }
    }
    std::vector<int> eis = pre;
    eis.insert(eis.end(), suf.begin(), suf.end());
    lambdas.push_back(edges_to_mosaics(g, eis));
  }

  if (chosen_ps.empty()) chosen_ps.push_back(pk.front());

  ShuffleSpec spec;
  for (Assignment v : chosen_ps) spec.ps.push_back(Mpc{t.truths(v)});
  spec.lambdas = std::move(lambdas);
  if (!check_shuffle_conditions(m, spec, t))
    throw std::logic_error("shuffle search produced an invalid witness");
  return spec;
}

}  // namespace rtl
