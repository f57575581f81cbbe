// Mosaic algebra: maximal consistent boundary sets, coherency validation,
// composition, defect analysis and full-decomposition checking.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rtl/closure.hpp"

namespace rtl {

struct Mpc {
  FormulaSet members;
  bool operator==(const Mpc& o) const { return members == o.members; }
};

// (start, cover, end): formulas at an earlier point, at every point strictly
// between, and at a later point.
struct Mosaic {
  FormulaSet start, cover, end;
  bool operator==(const Mosaic& o) const {
    return start == o.start && cover == o.cover && end == o.end;
  }
};

struct MosaicHash {
  std::size_t operator()(const Mosaic& m) const {
    std::size_t h = m.start.hash();
    h ^= m.cover.hash() + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= m.end.hash() + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }
};

struct Rejection {
  enum class Kind { NotMpcStart, NotMpcEnd, CoverNotSimClosed, CoherencyViolation };
  Kind kind;
  std::string clause;  // "C1.1".."C4.2" for coherency violations
  int alpha = -1, beta = -1;  // closure indices of the offending U/S arguments
  std::string to_string() const;
};

using MosaicResult = std::variant<Mosaic, Rejection>;

// Propositional consistency under the opaque-variable abstraction: atoms and
// Until/Since entries are independent variables, Not/And evaluate classically.
bool is_pc(const FormulaSet& s, const ClosureTable& table);

// True iff s is exactly the truth set of some assignment (equivalently: a
// maximal propositionally consistent subset of the closure).
bool is_mpc_set(const FormulaSet& s, const ClosureTable& table);
std::optional<Assignment> assignment_of(const FormulaSet& s, const ClosureTable& table);

// All maximal propositionally consistent subsets, in assignment order.
std::vector<Mpc> enumerate_mpcs(const ClosureTable& table);

// Validates (a, b, c) as a mosaic; a rejection names the first violated
// clause in the fixed scan order.
MosaicResult make_mosaic(const FormulaSet& a, const FormulaSet& b,
                         const FormulaSet& c, const ClosureTable& table);
std::optional<Rejection> validate_mosaic(const Mosaic& m, const ClosureTable& table);

// The four coherency conditions alone (start/end assumed maximal, cover
// assumed normalization-closed).
bool coherency_ok(const FormulaSet& a, const FormulaSet& b, const FormulaSet& c,
                  const ClosureTable& table);

// Composition when end(m1) == start(m2): covers intersect with the shared
// boundary.
std::optional<Mosaic> compose(const Mosaic& m1, const Mosaic& m2);

struct ComposeSeqResult {
  std::optional<Mosaic> mosaic;
  int fail_pos = -1;  // index of the element that failed to compose
};
ComposeSeqResult compose_seq(std::span<const Mosaic> seq);

struct DefectReport {
  FormulaSet type1;  // Until entries in the start with a pending obligation
  FormulaSet type2;  // Since entries in the end, mirror
  FormulaSet type3;  // entries whose normalized negation misses the cover
};
DefectReport defects(const Mosaic& m, const ClosureTable& table);

// Literal three-condition check: seq composes to m, every Until entry in
// start(m) and Since entry in end(m) is discharged or witnessed with
// maintenance, and every type-3 defect is witnessed at an internal boundary.
bool is_full_decomposition(const Mosaic& m, std::span<const Mosaic> seq,
                           const ClosureTable& table);

}  // namespace rtl
