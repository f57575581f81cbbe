#include "rtl/relativize.hpp"

#include <algorithm>

namespace rtl {

namespace {

FormulaPtr star_rec(FormulaPtr f, FormulaPtr q, FormulaArena& ar) {
  switch (f->op) {
    case Op::Atom:
      return ar.and_(f, q);
    case Op::Not:
      return ar.and_(ar.not_(star_rec(f->left, q, ar)), q);
    case Op::And:
      return ar.and_(ar.and_(star_rec(f->left, q, ar), star_rec(f->right, q, ar)), q);
    case Op::Until:
      return ar.and_(ar.until(star_rec(f->left, q, ar), star_rec(f->right, q, ar)), q);
    case Op::Since:
      return ar.and_(ar.since(star_rec(f->left, q, ar), star_rec(f->right, q, ar)), q);
    default:
      throw std::invalid_argument("star: formula must be core");
  }
}

}  // namespace

FormulaPtr star(FormulaPtr f, const std::string& q) {
  auto names = atom_names(f);
  if (std::find(names.begin(), names.end(), q) != names.end())
    throw std::invalid_argument("star: marker atom occurs in the formula");
  FormulaArena& ar = FormulaArena::instance();
  return star_rec(f, ar.atom(q), ar);
}

DecisionContext DecisionContext::build(FormulaPtr core_phi) {
  if (!core_phi->is_core())
    throw std::invalid_argument("DecisionContext: formula must be core");
  DecisionContext ctx;
  ctx.phi = core_phi;
  ctx.q = fresh_atom(core_phi);
  ctx.psi = star(core_phi, ctx.q);
  ctx.table = std::make_unique<ClosureTable>(ctx.psi);
  ctx.n = formula_length(ctx.psi);
  return ctx;
}

bool is_relativized(const Mosaic& m, const DecisionContext& ctx) {
  const ClosureTable& t = *ctx.table;
  FormulaArena& ar = FormulaArena::instance();
  int qi = t.index_of(ar.atom(ctx.q));
  int nqi = qi < 0 ? -1 : t.neg_of(qi);
  int npsi = t.neg_of(t.index_of(ctx.psi));
  if (qi < 0 || nqi < 0 || npsi < 0) throw std::logic_error("relativize: table mismatch");

  if (!m.start.test(nqi)) return false;
  for (int s : t.since_items())
    if (m.start.test(s)) return false;
  if (!m.cover.test(qi) || m.cover.test(npsi)) return false;
  if (!m.end.test(nqi)) return false;
  for (int u : t.until_items())
    if (m.end.test(u)) return false;
  return true;
}

}  // namespace rtl
