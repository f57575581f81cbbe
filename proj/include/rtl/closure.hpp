// Closure table: indexed enumeration of Cl(phi) with negation links, the
// normalization involution, and truth evaluation under assignments to the
// table's free bits (atoms and Until/Since entries).
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtl/formula.hpp"

namespace rtl {

// Dense index set over closure entries. Fixed capacity keeps the hot set
// operations allocation-free.
struct FormulaSet {
  static constexpr int kWords = 4;
  static constexpr int kMaxBits = kWords * 64;
  std::array<std::uint64_t, kWords> w{};

  bool test(int i) const { return (w[i >> 6] >> (i & 63)) & 1u; }
  void set(int i) { w[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
  void reset(int i) { w[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

  bool subset_of(const FormulaSet& o) const {
    for (int k = 0; k < kWords; k++)
      if (w[k] & ~o.w[k]) return false;
    return true;
  }
  bool none() const {
    for (auto x : w)
      if (x) return false;
    return true;
  }
  int count() const {
    int n = 0;
    for (auto x : w) n += __builtin_popcountll(x);
    return n;
  }
  friend FormulaSet operator&(const FormulaSet& a, const FormulaSet& b) {
    FormulaSet r;
    for (int k = 0; k < kWords; k++) r.w[k] = a.w[k] & b.w[k];
    return r;
  }
  friend FormulaSet operator|(const FormulaSet& a, const FormulaSet& b) {
    FormulaSet r;
    for (int k = 0; k < kWords; k++) r.w[k] = a.w[k] | b.w[k];
    return r;
  }
  FormulaSet& operator&=(const FormulaSet& o) {
    for (int k = 0; k < kWords; k++) w[k] &= o.w[k];
    return *this;
  }
  bool operator==(const FormulaSet& o) const { return w == o.w; }
  bool operator!=(const FormulaSet& o) const { return !(*this == o); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (int k = 0; k < kWords; k++) {
      std::uint64_t x = w[k];
      while (x) {
        int b = __builtin_ctzll(x);
        fn(k * 64 + b);
        x &= x - 1;
      }
    }
  }
  std::size_t hash() const {
    std::size_t h = 0;
    for (auto x : w) h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }
};

struct FormulaSetHash {
  std::size_t operator()(const FormulaSet& s) const { return s.hash(); }
};

using Assignment = std::uint32_t;

class ClosureTable {
 public:
  // f must be core. Entries are all subformulas of f plus the syntactic
  // negation of each, deduplicated structurally. Children precede parents.
  explicit ClosureTable(FormulaPtr f);

  int size() const { return static_cast<int>(items_.size()); }
  FormulaPtr item(int i) const { return items_[i]; }
  FormulaPtr root() const { return root_; }

  // index of g, or -1
  int index_of(FormulaPtr g) const {
    auto it = index_.find(g);
    return it == index_.end() ? -1 : it->second;
  }

  // partial: index of the syntactic negation, or -1
  int neg_of(int i) const { return neg_of_[i]; }
  // total involution: strips a leading negation or adds one
  int sim_of(int i) const { return sim_of_[i]; }

  // subformula edges (closure-internal indices; -1 when absent)
  int left_child(int i) const { return left_[i]; }
  int right_child(int i) const { return right_[i]; }

  const std::vector<int>& atom_items() const { return atom_items_; }
  const std::vector<int>& us_items() const { return us_items_; }  // Until/Since entries
  const std::vector<int>& until_items() const { return until_items_; }
  const std::vector<int>& since_items() const { return since_items_; }

  // free bits: atoms then Until/Since entries
  int bit_count() const { return static_cast<int>(bits_.size()); }
  int bit_item(int b) const { return bits_[b]; }
  int assignment_count() const { return 1 << bit_count(); }

  // truth set of every closure entry under an assignment to the free bits
  const FormulaSet& truths(Assignment v) const;

  // packed Until-entry bits / Since-entry bits of an assignment's truth set
  std::uint32_t until_bits(Assignment v) const;
  std::uint32_t since_bits(Assignment v) const;

  // membership text helpers (certificate io, debugging)
  std::string item_text(int i) const { return print(items_[i]); }
  std::vector<std::string> set_texts(const FormulaSet& s) const;
  std::optional<FormulaSet> set_from_texts(const std::vector<std::string>& texts) const;

 private:
  void force_truth_cache() const;

  FormulaPtr root_;
  std::vector<FormulaPtr> items_;
  std::unordered_map<FormulaPtr, int> index_;
  std::vector<int> neg_of_, sim_of_, left_, right_;
  std::vector<int> atom_items_, us_items_, until_items_, since_items_;
  std::vector<int> bits_;
  std::vector<int> bit_of_item_;  // item idx -> bit position or -1

  mutable std::vector<FormulaSet> truth_cache_;
  mutable std::vector<std::uint32_t> until_bits_, since_bits_;
};

}  // namespace rtl
