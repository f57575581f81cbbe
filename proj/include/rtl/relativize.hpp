// Reduction of real-line satisfiability to unit-interval mosaics: the
// fresh-atom relativization transform and the relativized-mosaic predicate.
#pragma once

#include <memory>
#include <string>

#include "rtl/mosaic.hpp"

namespace rtl {

// Recursive transform marking the open interior with q: atoms become
// (p & q), and every composite node also picks up "& q".
FormulaPtr star(FormulaPtr f, const std::string& q);

struct DecisionContext {
  FormulaPtr phi;   // core input
  std::string q;    // fresh marker atom
  FormulaPtr psi;   // star(phi, q)
  std::unique_ptr<ClosureTable> table;
  std::size_t n;    // formula_length(psi); default search depth is 2n

  static DecisionContext build(FormulaPtr core_phi);
};

// The three conditions a psi-mosaic must satisfy to stand for the whole
// interval: !q and no Since entry at the start, q in the cover with !psi
// excluded, !q and no Until entry at the end.
bool is_relativized(const Mosaic& m, const DecisionContext& ctx);

}  // namespace rtl
