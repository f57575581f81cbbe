#include "rtl/rms.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

#include "masked_cure.hpp"

namespace rtl {

std::string tag_name(int rank) {
  int n = rank / 3;
  switch (rank % 3) {
    case 0: return std::to_string(n);
    case 1: return std::to_string(n) + "+";
    default: return std::to_string(n + 1) + "-";
  }
}

std::optional<int> tag_rank(const std::string& name) {
  if (name.empty()) return std::nullopt;
  std::string digits = name;
  char suffix = 0;
  if (digits.back() == '+' || digits.back() == '-') {
    suffix = digits.back();
    digits.pop_back();
  }
  if (digits.empty()) return std::nullopt;
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  long n = std::stol(digits);
  if (suffix == 0) return static_cast<int>(3 * n);
  if (suffix == '+') return static_cast<int>(3 * n + 1);
  if (n == 0) return std::nullopt;  // "0-" is not a tag
  return static_cast<int>(3 * (n - 1) + 2);
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Sat: return "sat";
    case Status::Unsat: return "unsat";
    case Status::Valid: return "valid";
    case Status::Invalid: return "invalid";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// CoverLattice
// ---------------------------------------------------------------------------

CoverLattice::CoverLattice(const ClosureTable& t, std::size_t cap) {
  int na = t.assignment_count();
  mpc_ids_.resize(na);
  auto add = [&](const FormulaSet& s) -> int {
    auto it = ids_.find(s);
    if (it != ids_.end()) return it->second;
    if (sets_.size() >= cap)
      throw BudgetExceeded("cover lattice exceeded cap of " + std::to_string(cap));
    int id = static_cast<int>(sets_.size());
    sets_.push_back(s);
    ids_.emplace(s, id);
    return id;
  };
  for (Assignment v = 0; v < static_cast<Assignment>(na); v++)
    mpc_ids_[v] = add(t.truths(v));
  // close under intersection with the generators
  for (std::size_t i = 0; i < sets_.size(); i++) {
    FormulaSet cur = sets_[i];
    for (Assignment v = 0; v < static_cast<Assignment>(na); v++) {
      FormulaSet meet = cur & t.truths(v);
      if (meet != cur) add(meet);
    }
  }
}

int CoverLattice::id_of(const FormulaSet& s) const {
  auto it = ids_.find(s);
  return it == ids_.end() ? -1 : it->second;
}

// ---------------------------------------------------------------------------
// Decider
// ---------------------------------------------------------------------------

Decider::Decider(const DecisionContext& ctx, DeciderOptions opt)
    : ctx_(&ctx),
      opt_(opt),
      t_(ctx.table.get()),
      lattice_(*ctx.table, opt.max_lattice),
      start_(std::chrono::steady_clock::now()) {
  depth_levels_ = opt_.depth_bound >= 0 ? opt_.depth_bound
                                        : static_cast<int>(2 * ctx.n);
}

void Decider::check_budget() {
  if (opt_.budget_ms <= 0) return;
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start_)
                .count();
  if (ms > opt_.budget_ms) {
    budget_exhausted_ = true;
    throw BudgetExceeded("decision budget of " + std::to_string(opt_.budget_ms) +
                         " ms exhausted");
  }
}

int Decider::intern(Assignment a, int cover_id, Assignment c) {
  std::uint64_t h = std::uint64_t(a) * 0x9e3779b1u;
  h ^= std::uint64_t(cover_id) * 0x85ebca77u + (h << 13);
  h ^= std::uint64_t(c) * 0xc2b2ae3du + (h >> 7);
  auto& bucket = mosaic_ids_[h];
  for (int id : bucket) {
    const auto& m = mosaics_[id];
    if (m[0] == a && m[1] == static_cast<std::uint32_t>(cover_id) && m[2] == c)
      return id;
  }
  if (mosaics_.size() >= opt_.max_mosaics)
    throw BudgetExceeded("mosaic store exceeded cap of " +
                         std::to_string(opt_.max_mosaics));
  int id = static_cast<int>(mosaics_.size());
  mosaics_.push_back({a, static_cast<std::uint32_t>(cover_id), c});
  rank_.push_back(-1);
  witness_.emplace_back();
  bucket.push_back(id);
  return id;
}

Mosaic Decider::mosaic_of(int id) const {
  const auto& m = mosaics_[id];
  return Mosaic{t_->truths(m[0]), lattice_.set(static_cast<int>(m[1])),
                t_->truths(m[2])};
}

int Decider::id_of(const Mosaic& m) const {
  auto a = assignment_of(m.start, *t_);
  auto c = assignment_of(m.end, *t_);
  if (!a || !c) return -1;
  int cid = lattice_.id_of(m.cover);
  if (cid < 0) return -1;
  std::uint64_t h = std::uint64_t(*a) * 0x9e3779b1u;
  h ^= std::uint64_t(cid) * 0x85ebca77u + (h << 13);
  h ^= std::uint64_t(*c) * 0xc2b2ae3du + (h >> 7);
  auto it = mosaic_ids_.find(h);
  if (it == mosaic_ids_.end()) return -1;
  for (int id : it->second) {
    const auto& mm = mosaics_[id];
    if (mm[0] == *a && mm[1] == static_cast<std::uint32_t>(cid) && mm[2] == *c)
      return id;
  }
  return -1;
}

bool Decider::tag(int mid, int rank, RawWitness w) {
  if (rank_[mid] >= 0) return false;
  Mosaic m = mosaic_of(mid);
  // every accepted witness must re-verify under the literal checkers
  switch (w.kind) {
    case TacticWitness::Kind::Shuffle: {
      ShuffleSpec spec;
      for (Assignment v : w.ps) spec.ps.push_back(Mpc{t_->truths(v)});
      for (const auto& lam : w.lambdas) {
        std::vector<Mosaic> seq;
        for (int cid : lam) seq.push_back(mosaic_of(cid));
        spec.lambdas.push_back(std::move(seq));
      }
      if (!check_shuffle_conditions(m, spec, *t_))
        throw std::logic_error("ledger: shuffle witness failed re-verification");
      break;
    }
    case TacticWitness::Kind::Lead:
    case TacticWitness::Kind::Trail: {
      std::vector<Mosaic> seq;
      if (w.kind == TacticWitness::Kind::Lead) seq.push_back(m);
      for (int cid : w.children) seq.push_back(mosaic_of(cid));
      if (w.kind == TacticWitness::Kind::Trail) seq.push_back(m);
      if (!is_full_decomposition(m, seq, *t_))
        throw std::logic_error("ledger: lead/trail witness failed re-verification");
      break;
    }
    case TacticWitness::Kind::Composition: {
      std::vector<Mosaic> seq;
      for (int cid : w.children) seq.push_back(mosaic_of(cid));
      auto res = compose_seq(seq);
      if (!res.mosaic || !(*res.mosaic == m))
        throw std::logic_error("ledger: composition witness failed re-verification");
      break;
    }
  }
  rank_[mid] = rank;
  witness_[mid] = std::move(w);
  order_.push_back(mid);
  if (!found_ && is_relativized(m, *ctx_)) found_ = mid;
  return true;
}

std::vector<Decider::Edge> Decider::base_edges(int base_rank) const {
  std::vector<Edge> out;
  out.reserve(order_.size());
  for (int id : order_) {
    if (rank_[id] > base_rank) continue;
    const auto& m = mosaics_[id];
    out.push_back(Edge{id, m[0], m[2], static_cast<int>(m[1])});
  }
  return out;
}

std::vector<Mosaic> Decider::materialize(const std::vector<Edge>& edges) const {
  std::vector<Mosaic> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.push_back(mosaic_of(e.mid));
  return out;
}

// --- shuffle layer ---------------------------------------------------------

namespace {

std::uint32_t until_pattern(const FormulaSet& B, const FormulaSet& C,
                            const ClosureTable& t) {
  std::uint32_t pat = 0;
  const auto& us = t.until_items();
  for (std::size_t k = 0; k < us.size(); k++) {
    int u = us[k];
    int al = t.left_child(u), be = t.right_child(u);
    bool want = B.test(be) && (!B.test(t.sim_of(al)) || C.test(al) ||
                               (C.test(be) && C.test(u)));
    if (want) pat |= (1u << k);
  }
  return pat;
}

std::uint32_t since_pattern(const FormulaSet& B, const FormulaSet& A,
                            const ClosureTable& t) {
  std::uint32_t pat = 0;
  const auto& ss = t.since_items();
  for (std::size_t k = 0; k < ss.size(); k++) {
    int s = ss[k];
    int al = t.left_child(s), be = t.right_child(s);
    bool want = B.test(be) && (!B.test(t.sim_of(al)) || A.test(al) ||
                               (A.test(be) && A.test(s)));
    if (want) pat |= (1u << k);
  }
  return pat;
}

}  // namespace

void Decider::shuffle_step(int rank, int base_rank) {
  const ClosureTable& t = *t_;
  int na = t.assignment_count();
  std::vector<Edge> edges = base_rank >= 0 ? base_edges(base_rank) : std::vector<Edge>{};

  // group assignments by their packed Until truth bits
  std::unordered_map<std::uint32_t, std::vector<Assignment>> by_ubits;
  for (Assignment v = 0; v < static_cast<Assignment>(na); v++)
    by_ubits[t.until_bits(v)].push_back(v);

  for (int bid = 0; bid < lattice_.size(); bid++) {
    if (found_ && stop_early_) return;
    if ((bid & 63) == 0) check_budget();
    const FormulaSet& B = lattice_.set(bid);

    FormulaSet defect_set;
    for (int i = 0; i < t.size(); i++)
      if (!B.test(t.sim_of(i))) defect_set.set(i);

    // usable base edges for this cover
    detail::CureGraph cg;
    cg.t = &t;
    std::vector<int> dmids;
    for (const Edge& e : edges) {
      if (!B.subset_of(lattice_.set(e.cover_id))) continue;
      if (!B.subset_of(t.truths(e.from)) || !B.subset_of(t.truths(e.to))) continue;
      cg.add_edge(e.from, e.to, lattice_.set(e.cover_id));
      dmids.push_back(e.mid);
    }

    std::unordered_map<std::uint64_t, std::pair<std::vector<Assignment>, FormulaSet>> pk_memo;
    std::unordered_map<std::uint64_t, FormulaSet> lam_memo;

    for (Assignment c = 0; c < static_cast<Assignment>(na); c++) {
      const FormulaSet& cset = t.truths(c);
      std::uint32_t upat = until_pattern(B, cset, t);
      auto it = by_ubits.find(upat);
      if (it == by_ubits.end()) continue;
      for (Assignment a : it->second) {
        const FormulaSet& aset = t.truths(a);
        std::uint32_t spat = since_pattern(B, aset, t);
        if (t.since_bits(c) != spat) continue;
        if (!coherency_ok(aset, B, cset, t)) continue;

        std::uint64_t key = (std::uint64_t(upat) << 32) | spat;
        auto pit = pk_memo.find(key);
        if (pit == pk_memo.end()) {
          std::vector<Assignment> pk;
          FormulaSet mask;
          for (Assignment v = 0; v < static_cast<Assignment>(na); v++) {
            if (t.until_bits(v) != upat || t.since_bits(v) != spat) continue;
            if (!B.subset_of(t.truths(v))) continue;
            pk.push_back(v);
            mask = mask | t.truths(v);
          }
          pit = pk_memo.emplace(key, std::make_pair(std::move(pk), mask)).first;
        }
        if (pit->second.first.empty()) continue;

        FormulaSet residual = defect_set;
        {
          FormulaSet covered = pit->second.second;
          for (int k = 0; k < FormulaSet::kWords; k++)
            residual.w[k] &= ~covered.w[k];
        }
        if (!residual.none()) {
          if (dmids.empty()) continue;
          auto lit = lam_memo.find(key);
          if (lit == lam_memo.end()) {
            // vertices on a >=1-edge path from a backward-ok vertex to a
            // forward-ok vertex
            std::unordered_map<Assignment, int> d1, d2;
            std::deque<Assignment> q;
            std::vector<Assignment> verts;
            for (const auto& kv : cg.out) verts.push_back(kv.first);
            for (const auto& kv : cg.in) verts.push_back(kv.first);
            std::sort(verts.begin(), verts.end());
            verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
            for (Assignment v : verts)
              if (t.since_bits(v) == spat) {
                d1[v] = 0;
                q.push_back(v);
              }
            while (!q.empty()) {
              Assignment v = q.front();
              q.pop_front();
              auto oit = cg.out.find(v);
              if (oit == cg.out.end()) continue;
              for (int ei : oit->second) {
                Assignment w = cg.eto[ei];
                if (d1.count(w)) continue;
                d1[w] = d1[v] + 1;
                q.push_back(w);
              }
            }
            std::deque<Assignment> q2;
            for (Assignment v : verts)
              if (t.until_bits(v) == upat) {
                d2[v] = 0;
                q2.push_back(v);
              }
            while (!q2.empty()) {
              Assignment v = q2.front();
              q2.pop_front();
              auto iit = cg.in.find(v);
              if (iit == cg.in.end()) continue;
              for (int ei : iit->second) {
                Assignment w = cg.efrom[ei];
                if (d2.count(w)) continue;
                d2[w] = d2[v] + 1;
                q2.push_back(w);
              }
            }
            FormulaSet mask;
            for (const auto& [v, dv] : d1) {
              auto i2 = d2.find(v);
              if (i2 == d2.end()) continue;
              if (dv + i2->second < 1) continue;
              mask = mask | t.truths(v);
            }
            lit = lam_memo.emplace(key, mask).first;
          }
          FormulaSet still = residual;
          for (int k = 0; k < FormulaSet::kWords; k++)
            still.w[k] &= ~lit->second.w[k];
          if (!still.none()) continue;
        }

        int mid = intern(a, bid, c);
        if (rank_[mid] >= 0) continue;
        // construct and record the witness via the search
        Mosaic m = mosaic_of(mid);
        std::vector<Mosaic> dvec;
        dvec.reserve(dmids.size());
        for (int dm : dmids) dvec.push_back(mosaic_of(dm));
        auto spec = exists_shuffle(m, dvec, t);
        if (!spec)
          throw std::logic_error("shuffle generator and search disagree");
        RawWitness w;
        w.kind = TacticWitness::Kind::Shuffle;
        for (const Mpc& p : spec->ps)
          w.ps.push_back(*assignment_of(p.members, t));
        for (const auto& lam : spec->lambdas) {
          std::vector<int> ids;
          for (const Mosaic& d : lam) {
            int did = id_of(d);
            if (did < 0) throw std::logic_error("shuffle lambda piece not interned");
            ids.push_back(did);
          }
          w.lambdas.push_back(std::move(ids));
        }
        tag(mid, rank, std::move(w));
        if (found_ && stop_early_) return;
      }
    }
  }
}

// --- lead / trail layer ----------------------------------------------------

void Decider::leadtrail_step(int rank, int base_rank) {
  const ClosureTable& t = *t_;
  int na = t.assignment_count();
  std::vector<Edge> edges = base_edges(base_rank);
  if (edges.empty()) return;

  for (int bid = 0; bid < lattice_.size(); bid++) {
    if (found_ && stop_early_) return;
    if ((bid & 31) == 0) check_budget();
    const FormulaSet& B = lattice_.set(bid);

    detail::CureGraph cg;
    cg.t = &t;
    std::vector<int> dmids;
    for (const Edge& e : edges) {
      if (!B.subset_of(lattice_.set(e.cover_id))) continue;
      if (!B.subset_of(t.truths(e.from)) || !B.subset_of(t.truths(e.to))) continue;
      cg.add_edge(e.from, e.to, lattice_.set(e.cover_id));
      dmids.push_back(e.mid);
    }
    if (dmids.empty()) continue;

    FormulaSet defect_set;
    for (int i = 0; i < t.size(); i++)
      if (!B.test(t.sim_of(i))) defect_set.set(i);

    std::vector<Mosaic> dvec;  // materialized lazily on first tag
    auto dvec_fill = [&] {
      if (dvec.empty())
        for (int dm : dmids) dvec.push_back(mosaic_of(dm));
    };

    std::vector<Assignment> anchors;
    for (const auto& kv : cg.out)
      if (cg.in.count(kv.first)) anchors.push_back(kv.first);
    std::sort(anchors.begin(), anchors.end());

    for (Assignment anchor : anchors) {
      if (found_ && stop_early_) return;
      const FormulaSet& nearset = t.truths(anchor);
      if (!B.subset_of(nearset)) continue;

      // distances to and from the anchor over usable edges
      std::unordered_map<Assignment, int> dist_from, dist_to;
      {
        std::deque<Assignment> q;
        dist_from[anchor] = 0;
        q.push_back(anchor);
        while (!q.empty()) {
          Assignment v = q.front();
          q.pop_front();
          auto oit = cg.out.find(v);
          if (oit == cg.out.end()) continue;
          for (int ei : oit->second) {
            Assignment w = cg.eto[ei];
            if (dist_from.count(w)) continue;
            dist_from[w] = dist_from[v] + 1;
            q.push_back(w);
          }
        }
        std::deque<Assignment> q2;
        dist_to[anchor] = 0;
        q2.push_back(anchor);
        while (!q2.empty()) {
          Assignment v = q2.front();
          q2.pop_front();
          auto iit = cg.in.find(v);
          if (iit == cg.in.end()) continue;
          for (int ei : iit->second) {
            Assignment w = cg.efrom[ei];
            if (dist_to.count(w)) continue;
            dist_to[w] = dist_to[v] + 1;
            q2.push_back(w);
          }
        }
      }
      bool cycle = false;
      {
        auto oit = cg.out.find(anchor);
        if (oit != cg.out.end())
          for (int ei : oit->second)
            if (dist_to.count(cg.eto[ei])) { cycle = true; break; }
      }
      if (!cycle) continue;

      FormulaSet interior;
      for (const auto& [v, dv] : dist_from) {
        if (v == anchor) continue;
        if (!dist_to.count(v)) continue;
        interior = interior | t.truths(v);
      }

      FormulaSet t3resid = defect_set;
      for (int k = 0; k < FormulaSet::kWords; k++)
        t3resid.w[k] &= ~nearset.w[k];
      {
        FormulaSet still = t3resid;
        for (int k = 0; k < FormulaSet::kWords; k++)
          still.w[k] &= ~interior.w[k];
        if (!still.none()) continue;  // a type-3 defect no walk can witness
      }

      const auto& uitems = t.until_items();
      const auto& sitems = t.since_items();

      // ---- lead: anchor is the end boundary --------------------------------
      {
        const FormulaSet& cset = nearset;
        std::uint32_t direct_or_cov = 0;
        std::uint32_t u_needs_cover = 0;
        for (std::size_t k = 0; k < uitems.size(); k++) {
          int u = uitems[k];
          int al = t.left_child(u), be = t.right_child(u);
          if (!B.test(be)) continue;  // any start holding u is infeasible
          bool direct = (cset.test(be) && cset.test(u)) || cset.test(al);
          bool cov = interior.test(al);
          if (direct || cov) direct_or_cov |= (1u << k);
        }
        for (std::size_t k = 0; k < uitems.size(); k++)
          if (!B.test(t.right_child(uitems[k]))) u_needs_cover |= (1u << k);

        std::unordered_map<std::uint32_t, bool> masked_memo;
        for (Assignment a = 0; a < static_cast<Assignment>(na); a++) {
          std::uint32_t aub = t.until_bits(a);
          if (aub & u_needs_cover) continue;        // hold formula missing from cover
          if (aub & ~direct_or_cov) continue;       // some Until entry unwitnessable
          const FormulaSet& aset = t.truths(a);
          if (!coherency_ok(aset, B, cset, t)) continue;
          // Since entries of the end needing a maintained witness
          std::uint32_t ds = 0;
          for (std::size_t k = 0; k < sitems.size(); k++) {
            int s = sitems[k];
            if (!cset.test(s)) continue;
            int al = t.left_child(s), be = t.right_child(s);
            bool direct = B.test(be) &&
                          ((aset.test(be) && aset.test(s)) || aset.test(al));
            if (!direct) ds |= (1u << k);
          }
          if (ds) {
            auto mit = masked_memo.find(ds);
            if (mit == masked_memo.end()) {
              std::vector<detail::MaskedDefect> defs;
              for (std::size_t k = 0; k < sitems.size(); k++)
                if ((ds >> k) & 1)
                  defs.push_back({t.left_child(sitems[k]), t.right_child(sitems[k])});
              bool ok = detail::masked_cure_walk(cg, anchor, -1, defs).has_value();
              mit = masked_memo.emplace(ds, ok).first;
            }
            if (!mit->second) continue;
          }
          int mid = intern(a, bid, anchor);
          if (rank_[mid] >= 0) continue;
          dvec_fill();
          Mosaic m = mosaic_of(mid);
          auto sigma = exists_lead(m, dvec, t);
          if (!sigma) throw std::logic_error("lead generator and search disagree");
          RawWitness w;
          w.kind = TacticWitness::Kind::Lead;
          for (const Mosaic& d : *sigma) {
            int did = id_of(d);
            if (did < 0) throw std::logic_error("lead piece not interned");
            w.children.push_back(did);
          }
          tag(mid, rank, std::move(w));
          if (found_ && stop_early_) return;
        }
      }

      // ---- trail: anchor is the start boundary ------------------------------
      {
        const FormulaSet& aset = nearset;
        std::uint32_t direct_or_cov = 0;
        std::uint32_t s_needs_cover = 0;
        for (std::size_t k = 0; k < sitems.size(); k++) {
          int s = sitems[k];
          int al = t.left_child(s), be = t.right_child(s);
          if (!B.test(be)) continue;
          bool direct = (aset.test(be) && aset.test(s)) || aset.test(al);
          bool cov = interior.test(al);
          if (direct || cov) direct_or_cov |= (1u << k);
        }
        for (std::size_t k = 0; k < sitems.size(); k++)
          if (!B.test(t.right_child(sitems[k]))) s_needs_cover |= (1u << k);

        std::unordered_map<std::uint32_t, bool> masked_memo;
        for (Assignment c = 0; c < static_cast<Assignment>(na); c++) {
          std::uint32_t csb = t.since_bits(c);
          if (csb & s_needs_cover) continue;
          if (csb & ~direct_or_cov) continue;
          const FormulaSet& cset = t.truths(c);
          if (!coherency_ok(aset, B, cset, t)) continue;
          std::uint32_t du = 0;
          for (std::size_t k = 0; k < uitems.size(); k++) {
            int u = uitems[k];
            if (!aset.test(u)) continue;
            int al = t.left_child(u), be = t.right_child(u);
            bool direct = B.test(be) &&
                          ((cset.test(be) && cset.test(u)) || cset.test(al));
            if (!direct) du |= (1u << k);
          }
          if (du) {
            auto mit = masked_memo.find(du);
            if (mit == masked_memo.end()) {
              std::vector<detail::MaskedDefect> defs;
              for (std::size_t k = 0; k < uitems.size(); k++)
                if ((du >> k) & 1)
                  defs.push_back({t.left_child(uitems[k]), t.right_child(uitems[k])});
              bool ok = detail::masked_cure_walk(cg, anchor, +1, defs).has_value();
              mit = masked_memo.emplace(du, ok).first;
            }
            if (!mit->second) continue;
          }
          int mid = intern(anchor, bid, c);
          if (rank_[mid] >= 0) continue;
          dvec_fill();
          Mosaic m = mosaic_of(mid);
          auto sigma = exists_trail(m, dvec, t);
          if (!sigma) throw std::logic_error("trail generator and search disagree");
          RawWitness w;
          w.kind = TacticWitness::Kind::Trail;
          for (const Mosaic& d : *sigma) {
            int did = id_of(d);
            if (did < 0) throw std::logic_error("trail piece not interned");
            w.children.push_back(did);
          }
          tag(mid, rank, std::move(w));
          if (found_ && stop_early_) return;
        }
      }
    }
  }
}

// --- composition closure ---------------------------------------------------

void Decider::compose_close(int rank) {
  const ClosureTable& t = *t_;
  std::vector<Edge> edges = base_edges(rank);
  // adjacency by start, deduplicated by (to, cover) with the smallest piece id
  std::unordered_map<Assignment, std::vector<Edge>> by_start;
  for (const Edge& e : edges) by_start[e.from].push_back(e);
  std::vector<Assignment> starts;
  for (auto& [v, lst] : by_start) {
    std::sort(lst.begin(), lst.end(), [](const Edge& x, const Edge& y) {
      if (x.to != y.to) return x.to < y.to;
      if (x.cover_id != y.cover_id) return x.cover_id < y.cover_id;
      return x.mid < y.mid;
    });
    lst.erase(std::unique(lst.begin(), lst.end(),
                          [](const Edge& x, const Edge& y) {
                            return x.to == y.to && x.cover_id == y.cover_id;
                          }),
              lst.end());
    starts.push_back(v);
  }
  std::sort(starts.begin(), starts.end());

  struct State {
    Assignment v;
    int cover_id;
    int parent;    // state index, -1 for seeds
    int edge_mid;  // piece appended to reach this state
  };

  for (Assignment a : starts) {
    if (found_ && stop_early_) return;
    check_budget();
    std::vector<State> states;
    std::unordered_map<std::uint64_t, int> seen;  // (v, cover_id) -> state
    auto key_of = [](Assignment v, int cid) {
      return (std::uint64_t(v) << 32) | std::uint32_t(cid);
    };
    std::deque<int> work;
    for (const Edge& e : by_start[a]) {
      std::uint64_t k = key_of(e.to, e.cover_id);
      if (seen.count(k)) continue;
      seen[k] = static_cast<int>(states.size());
      states.push_back(State{e.to, e.cover_id, -1, e.mid});
      work.push_back(static_cast<int>(states.size()) - 1);
    }
    while (!work.empty()) {
      if (found_ && stop_early_) return;
      int si = work.front();
      work.pop_front();
      State s = states[si];
      auto it = by_start.find(s.v);
      if (it == by_start.end()) continue;
      const FormulaSet& mid_cover = lattice_.set(s.cover_id);
      const FormulaSet& boundary = t.truths(s.v);
      for (const Edge& e : it->second) {
        FormulaSet nc = mid_cover & boundary & lattice_.set(e.cover_id);
        int ncid = lattice_.id_of(nc);
        if (ncid < 0) throw std::logic_error("composition left the cover lattice");
        std::uint64_t k = key_of(e.to, ncid);
        if (seen.count(k)) continue;
        int nsi = static_cast<int>(states.size());
        seen[k] = nsi;
        states.push_back(State{e.to, ncid, si, e.mid});
        work.push_back(nsi);
        int mid = intern(a, ncid, e.to);
        if (rank_[mid] < 0) {
          RawWitness w;
          w.kind = TacticWitness::Kind::Composition;
          std::vector<int> parts;
          int cur = nsi;
          while (cur >= 0) {
            parts.push_back(states[cur].edge_mid);
            cur = states[cur].parent;
          }
          std::reverse(parts.begin(), parts.end());
          w.children = std::move(parts);
          tag(mid, rank, std::move(w));
          if (found_ && stop_early_) return;
        }
      }
    }
  }
}

// --- fixpoint ---------------------------------------------------------------

void Decider::level0() {
  shuffle_step(0, -1);
  if (!(found_ && stop_early_)) compose_close(0);
  rank_sizes_.push_back({0, order_.size()});
  last_rank_ = 0;
}

void Decider::step_plus(int n) {
  int rank = 3 * n + 1;
  leadtrail_step(rank, 3 * n);
  if (!(found_ && stop_early_)) compose_close(rank);
  rank_sizes_.push_back({rank, order_.size()});
  last_rank_ = rank;
}

void Decider::step_minus(int n) {
  int rank = 3 * n + 2;
  leadtrail_step(rank, 3 * n + 1);
  if (!(found_ && stop_early_)) compose_close(rank);
  rank_sizes_.push_back({rank, order_.size()});
  last_rank_ = rank;
}

void Decider::step_level(int n_next) {
  int rank = 3 * n_next;
  shuffle_step(rank, rank - 1);
  if (!(found_ && stop_early_)) compose_close(rank);
  rank_sizes_.push_back({rank, order_.size()});
  last_rank_ = rank;
}

void Decider::rms_membership(bool stop_on_relativized) {
  stop_early_ = stop_on_relativized;
  level0();
  if (found_ && stop_early_) return;
  std::size_t prev_level_size = order_.size();
  for (int n = 0; n < depth_levels_; n++) {
    step_plus(n);
    if (found_ && stop_early_) return;
    step_minus(n);
    if (found_ && stop_early_) return;
    step_level(n + 1);
    if (found_ && stop_early_) return;
    if (order_.size() == prev_level_size) {
      saturated_ = true;
      return;
    }
    prev_level_size = order_.size();
  }
}

std::optional<int> Decider::rank_of(const Mosaic& m) const {
  int id = id_of(m);
  if (id < 0 || rank_[id] < 0) return std::nullopt;
  return rank_[id];
}

std::vector<Mosaic> Decider::tagged_at_or_below(int rank) const {
  std::vector<Mosaic> out;
  for (int id : order_)
    if (rank_[id] <= rank) out.push_back(mosaic_of(id));
  return out;
}

std::optional<Mosaic> Decider::relativized_witness() const {
  if (!found_) return std::nullopt;
  return mosaic_of(*found_);
}

std::optional<TacticWitness> Decider::witness_of(const Mosaic& m) const {
  int id = id_of(m);
  if (id < 0 || rank_[id] < 0) return std::nullopt;
  const RawWitness& rw = witness_[id];
  TacticWitness w;
  w.kind = rw.kind;
  if (rw.kind == TacticWitness::Kind::Shuffle) {
    for (Assignment v : rw.ps) w.shuffle.ps.push_back(Mpc{t_->truths(v)});
    for (const auto& lam : rw.lambdas) {
      std::vector<Mosaic> seq;
      for (int cid : lam) seq.push_back(mosaic_of(cid));
      w.shuffle.lambdas.push_back(std::move(seq));
    }
  } else {
    for (int cid : rw.children) {
      Mosaic piece = mosaic_of(cid);
      if (rw.kind == TacticWitness::Kind::Composition)
        w.parts.push_back(piece);
      else
        w.sigma.push_back(piece);
    }
  }
  return w;
}

DecisionStats Decider::stats() const {
  DecisionStats st;
  st.closure_size = t_->size();
  st.mpc_count = t_->assignment_count();
  st.lattice_size = lattice_.size();
  st.tagged = order_.size();
  st.last_rank = last_rank_;
  st.saturated = saturated_;
  st.budget_exhausted = budget_exhausted_;
  st.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_)
                   .count();
  for (const auto& [rank, size] : rank_sizes_)
    st.ledger_sizes.push_back({tag_name(rank), size});
  return st;
}

// ---------------------------------------------------------------------------

std::vector<Mosaic> composition_closure(std::span<const Mosaic> seed,
                                        const ClosureTable& table) {
  std::vector<Mosaic> out(seed.begin(), seed.end());
  std::unordered_map<std::size_t, std::vector<int>> index;
  MosaicHash hasher;
  auto find = [&](const Mosaic& m) -> int {
    auto it = index.find(hasher(m));
    if (it == index.end()) return -1;
    for (int i : it->second)
      if (out[static_cast<std::size_t>(i)] == m) return i;
    return -1;
  };
  for (std::size_t i = 0; i < out.size(); i++)
    index[hasher(out[i])].push_back(static_cast<int>(i));
  bool changed = true;
  while (changed) {
    changed = false;
    std::size_t n = out.size();
    for (std::size_t i = 0; i < n; i++) {
      for (std::size_t j = 0; j < n; j++) {
        auto c = compose(out[i], out[j]);
        if (!c) continue;
        if (find(*c) >= 0) continue;
        index[hasher(*c)].push_back(static_cast<int>(out.size()));
        out.push_back(*c);
        changed = true;
      }
    }
  }
  (void)table;
  return out;
}

}  // namespace rtl
