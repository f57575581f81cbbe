// Formula front end: AST over Until/Since with classical connectives,
// hash-consed so that structural equality is pointer equality.
#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rtl {

enum class Op : std::uint8_t {
  Atom,
  Not,
  And,
  Until,
  Since,
  // sugar, removed by desugar()
  Or,
  Implies,
  Iff,
  TrueLit,
  FalseLit,
  Eventually,  // F
  Always,      // G
};

struct Formula;
using FormulaPtr = const Formula*;

struct Formula {
  Op op;
  FormulaPtr left = nullptr;   // unary child lives here
  FormulaPtr right = nullptr;
  std::string name;            // atoms only

  bool is_core() const;
  bool is_atom() const { return op == Op::Atom; }
};

// Interning factory. Every Formula node is owned by the arena; identical
// structure yields the identical pointer.
class FormulaArena {
 public:
  static FormulaArena& instance();

  FormulaPtr atom(std::string_view name);
  FormulaPtr not_(FormulaPtr f);
  FormulaPtr and_(FormulaPtr a, FormulaPtr b);
  FormulaPtr until(FormulaPtr a, FormulaPtr b);
  FormulaPtr since(FormulaPtr a, FormulaPtr b);
  FormulaPtr or_(FormulaPtr a, FormulaPtr b);
  FormulaPtr implies(FormulaPtr a, FormulaPtr b);
  FormulaPtr iff(FormulaPtr a, FormulaPtr b);
  FormulaPtr true_lit();
  FormulaPtr false_lit();
  FormulaPtr eventually(FormulaPtr f);
  FormulaPtr always(FormulaPtr f);

 private:
  FormulaPtr mk(Op op, FormulaPtr l, FormulaPtr r, std::string_view name);

  struct Key {
    Op op;
    FormulaPtr l;
    FormulaPtr r;
    std::string name;
    bool operator==(const Key& o) const {
      return op == o.op && l == o.l && r == o.r && name == o.name;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  std::mutex mu_;
  std::unordered_map<Key, std::unique_ptr<Formula>, KeyHash> table_;
};

struct ParseError : std::runtime_error {
  std::size_t offset;
  std::vector<std::string> expected;
  ParseError(std::string msg, std::size_t off, std::vector<std::string> exp);
};

// Grammar: U(f,g) S(f,g) F f G f !f f&g f|g f->g True False idents parens.
// '!' binds tightest, then '&', '|', '->' (right-assoc).
FormulaPtr parse(std::string_view text);

// Canonical printer; emits minimal parentheses. parse(print(f)) == f for
// every core formula. Iff has no surface syntax and prints expanded.
std::string print(FormulaPtr f);

// Rewrites sugar into Atom/Not/And/Until/Since. True reuses the
// lexicographically first atom of the whole formula (atom "v_true" when the
// formula has no atoms).
FormulaPtr desugar(FormulaPtr f);

// Node count of the formula tree (repeats counted).
std::size_t formula_length(FormulaPtr f);

// Sorted names of all atoms occurring in f.
std::vector<std::string> atom_names(FormulaPtr f);

// An atom name not occurring in f: "q", then "q_1", "q_2", ...
std::string fresh_atom(FormulaPtr f);

}  // namespace rtl
