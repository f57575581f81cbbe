#include "rtl/mosaic.hpp"

namespace rtl {

std::string Rejection::to_string() const {
  switch (kind) {
    case Kind::NotMpcStart: return "NotMpcStart";
    case Kind::NotMpcEnd: return "NotMpcEnd";
    case Kind::CoverNotSimClosed: return "CoverNotSimClosed";
    case Kind::CoherencyViolation: return "CoherencyViolation(" + clause + ")";
  }
  return "?";
}

bool is_pc(const FormulaSet& s, const ClosureTable& table) {
  int na = table.assignment_count();
  for (Assignment v = 0; v < static_cast<Assignment>(na); v++)
    if (s.subset_of(table.truths(v))) return true;
  return false;
}

std::optional<Assignment> assignment_of(const FormulaSet& s, const ClosureTable& table) {
  // an MPC decides every free bit; reconstruct and compare
  Assignment v = 0;
  for (int b = 0; b < table.bit_count(); b++)
    if (s.test(table.bit_item(b))) v |= (1u << b);
  if (table.truths(v) == s) return v;
  return std::nullopt;
}

bool is_mpc_set(const FormulaSet& s, const ClosureTable& table) {
  return assignment_of(s, table).has_value();
}

std::vector<Mpc> enumerate_mpcs(const ClosureTable& table) {
  std::vector<Mpc> out;
  int na = table.assignment_count();
  out.reserve(na);
  for (Assignment v = 0; v < static_cast<Assignment>(na); v++)
    out.push_back(Mpc{table.truths(v)});
  return out;
}

namespace {

// shared scan used by make_mosaic / validate_mosaic
std::optional<Rejection> coherency_violation(const FormulaSet& a, const FormulaSet& b,
                                             const FormulaSet& c, const ClosureTable& t) {
  // C1/C2 over Until entries
  for (int u : t.until_items()) {
    int al = t.left_child(u), be = t.right_child(u);
    int nu = t.neg_of(u), nal = t.neg_of(al), nbe = t.neg_of(be);
    // entries of the closure rooted at U are subformulas, so the negations exist
    if (a.test(nu) && b.test(be)) {
      if (!(c.test(nal) && (c.test(nbe) || c.test(nu))))
        return Rejection{Rejection::Kind::CoherencyViolation, "C1.1", al, be};
      if (!(b.test(nal) && b.test(nu)))
        return Rejection{Rejection::Kind::CoherencyViolation, "C1.2", al, be};
    }
    if (a.test(u) && b.test(nal)) {
      if (!(c.test(al) || (c.test(be) && c.test(u))))
        return Rejection{Rejection::Kind::CoherencyViolation, "C2.1", al, be};
      if (!(b.test(be) && b.test(u)))
        return Rejection{Rejection::Kind::CoherencyViolation, "C2.2", al, be};
    }
  }
  // C3/C4: mirror images over Since entries
  for (int s : t.since_items()) {
    int al = t.left_child(s), be = t.right_child(s);
    int ns = t.neg_of(s), nal = t.neg_of(al), nbe = t.neg_of(be);
    if (c.test(ns) && b.test(be)) {
      if (!(a.test(nal) && (a.test(nbe) || a.test(ns))))
        return Rejection{Rejection::Kind::CoherencyViolation, "C3.1", al, be};
      if (!(b.test(nal) && b.test(ns)))
        return Rejection{Rejection::Kind::CoherencyViolation, "C3.2", al, be};
    }
    if (c.test(s) && b.test(nal)) {
      if (!(a.test(al) || (a.test(be) && a.test(s))))
        return Rejection{Rejection::Kind::CoherencyViolation, "C4.1", al, be};
      if (!(b.test(be) && b.test(s)))
        return Rejection{Rejection::Kind::CoherencyViolation, "C4.2", al, be};
    }
  }
  return std::nullopt;
}

}  // namespace

MosaicResult make_mosaic(const FormulaSet& a, const FormulaSet& b,
                         const FormulaSet& c, const ClosureTable& table) {
  if (!is_mpc_set(a, table)) return Rejection{Rejection::Kind::NotMpcStart, {}};
  if (!is_mpc_set(c, table)) return Rejection{Rejection::Kind::NotMpcEnd, {}};
  // condition 0.2: when the closure holds both beta and !beta, the cover
  // treats !beta and ~beta alike
  for (int i = 0; i < table.size(); i++) {
    int ni = table.neg_of(i);
    if (ni < 0) continue;
    if (b.test(ni) != b.test(table.sim_of(i)))
      return Rejection{Rejection::Kind::CoverNotSimClosed, {}, i, -1};
  }
  if (auto r = coherency_violation(a, b, c, table)) return *r;
  return Mosaic{a, b, c};
}

std::optional<Rejection> validate_mosaic(const Mosaic& m, const ClosureTable& table) {
  MosaicResult r = make_mosaic(m.start, m.cover, m.end, table);
  if (std::holds_alternative<Rejection>(r)) return std::get<Rejection>(r);
  return std::nullopt;
}

bool coherency_ok(const FormulaSet& a, const FormulaSet& b, const FormulaSet& c,
                  const ClosureTable& table) {
  return !coherency_violation(a, b, c, table).has_value();
}

std::optional<Mosaic> compose(const Mosaic& m1, const Mosaic& m2) {
  if (m1.end != m2.start) return std::nullopt;
  return Mosaic{m1.start, m1.cover & m1.end & m2.cover, m2.end};
}

ComposeSeqResult compose_seq(std::span<const Mosaic> seq) {
  if (seq.empty()) return {std::nullopt, 0};
  Mosaic acc = seq[0];
  for (std::size_t i = 1; i < seq.size(); i++) {
    auto next = compose(acc, seq[i]);
    if (!next) return {std::nullopt, static_cast<int>(i)};
    acc = *next;
  }
  return {acc, -1};
}

DefectReport defects(const Mosaic& m, const ClosureTable& t) {
  DefectReport rep;
  for (int u : t.until_items()) {
    if (!m.start.test(u)) continue;
    int al = t.left_child(u), be = t.right_child(u);
    bool d = !m.cover.test(be) || (!m.end.test(al) && !m.end.test(be)) ||
             (!m.end.test(al) && !m.end.test(u));
    if (d) rep.type1.set(u);
  }
  for (int s : t.since_items()) {
    if (!m.end.test(s)) continue;
    int al = t.left_child(s), be = t.right_child(s);
    bool d = !m.cover.test(be) || (!m.start.test(al) && !m.start.test(be)) ||
             (!m.start.test(al) && !m.start.test(s));
    if (d) rep.type2.set(s);
  }
  for (int i = 0; i < t.size(); i++)
    if (!m.cover.test(t.sim_of(i))) rep.type3.set(i);
  return rep;
}

bool is_full_decomposition(const Mosaic& m, std::span<const Mosaic> seq,
                           const ClosureTable& t) {
  auto comp = compose_seq(seq);
  if (!comp.mosaic || !(*comp.mosaic == m)) return false;
  int n = static_cast<int>(seq.size());

  // condition 1: every Until entry of the start is discharged at the end or
  // witnessed at an internal boundary with its hold formula maintained up to
  // the witness
  for (int u : t.until_items()) {
    if (!m.start.test(u)) continue;
    int al = t.left_child(u), be = t.right_child(u);
    bool ok = m.cover.test(be) &&
              ((m.end.test(be) && m.end.test(u)) || m.end.test(al));
    for (int i = 1; !ok && i < n; i++) {  // 1 <= i < n, 1-based
      if (!seq[i - 1].end.test(al)) continue;
      bool maint = true;
      for (int j = 1; maint && j <= i; j++)
        if (!seq[j - 1].cover.test(be)) maint = false;
      for (int j = 1; maint && j < i; j++)
        if (!seq[j - 1].end.test(be)) maint = false;
      ok = maint;
    }
    if (!ok) return false;
  }

  // condition 2: mirror image for Since entries of the end
  for (int s : t.since_items()) {
    if (!m.end.test(s)) continue;
    int al = t.left_child(s), be = t.right_child(s);
    bool ok = m.cover.test(be) &&
              ((m.start.test(be) && m.start.test(s)) || m.start.test(al));
    for (int i = 2; !ok && i <= n; i++) {  // 1 < i <= n
      if (!seq[i - 1].start.test(al)) continue;
      bool maint = true;
      for (int j = i; maint && j <= n; j++)
        if (!seq[j - 1].cover.test(be)) maint = false;
      for (int j = i + 1; maint && j <= n; j++)
        if (!seq[j - 1].start.test(be)) maint = false;
      ok = maint;
    }
    if (!ok) return false;
  }

  // condition 3: every entry whose normalization misses the cover appears at
  // an internal boundary
  for (int i = 0; i < t.size(); i++) {
    if (m.cover.test(t.sim_of(i))) continue;
    bool ok = false;
    for (int k = 1; !ok && k < n; k++)
      if (seq[k - 1].end.test(i)) ok = true;
    if (!ok) return false;
  }
  return true;
}

}  // namespace rtl
