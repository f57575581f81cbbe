#include "rtl/closure.hpp"

#include <algorithm>

namespace rtl {

namespace {

void collect_postorder(FormulaPtr f, std::vector<FormulaPtr>& out,
                       std::unordered_map<FormulaPtr, int>& seen) {
  if (seen.count(f)) return;
  seen.emplace(f, -1);
  if (f->left) collect_postorder(f->left, out, seen);
  if (f->right) collect_postorder(f->right, out, seen);
  out.push_back(f);
}

}  // namespace

ClosureTable::ClosureTable(FormulaPtr f) : root_(f) {
  if (!f->is_core()) throw std::invalid_argument("closure: formula must be core");
  FormulaArena& ar = FormulaArena::instance();

  std::unordered_map<FormulaPtr, int> seen;
  collect_postorder(f, items_, seen);
  std::size_t sub_count = items_.size();
  for (std::size_t i = 0; i < sub_count; i++) {
    FormulaPtr n = ar.not_(items_[i]);
    if (!seen.count(n)) {
      seen.emplace(n, -1);
      items_.push_back(n);
    }
  }
  if (static_cast<int>(items_.size()) > FormulaSet::kMaxBits)
    throw std::runtime_error("closure too large (> " +
                             std::to_string(FormulaSet::kMaxBits) + " entries)");

  for (std::size_t i = 0; i < items_.size(); i++) index_[items_[i]] = static_cast<int>(i);

  int n = size();
  neg_of_.assign(n, -1);
  sim_of_.assign(n, -1);
  left_.assign(n, -1);
  right_.assign(n, -1);
  bit_of_item_.assign(n, -1);
  for (int i = 0; i < n; i++) {
    FormulaPtr g = items_[i];
    if (g->left) left_[i] = index_of(g->left);
    if (g->right) right_[i] = index_of(g->right);
    neg_of_[i] = index_of(ar.not_(g));
    if (g->op == Op::Not)
      sim_of_[i] = index_of(g->left);
    else
      sim_of_[i] = index_of(ar.not_(g));
    if (sim_of_[i] < 0) throw std::logic_error("closure: ~ left the table");
    switch (g->op) {
      case Op::Atom: atom_items_.push_back(i); break;
      case Op::Until: us_items_.push_back(i); until_items_.push_back(i); break;
      case Op::Since: us_items_.push_back(i); since_items_.push_back(i); break;
      default: break;
    }
  }
  for (int i : atom_items_) bits_.push_back(i);
  for (int i : us_items_) bits_.push_back(i);
  for (std::size_t b = 0; b < bits_.size(); b++) bit_of_item_[bits_[b]] = static_cast<int>(b);
  if (bit_count() > 24)
    throw std::runtime_error("closure has too many free bits for enumeration (" +
                             std::to_string(bit_count()) + ")");
}

void ClosureTable::force_truth_cache() const {
  if (!truth_cache_.empty()) return;
  int nassign = assignment_count();
  truth_cache_.resize(nassign);
  until_bits_.assign(nassign, 0);
  since_bits_.assign(nassign, 0);
  int n = size();
  std::vector<char> tr(n);
  for (int v = 0; v < nassign; v++) {
    for (int i = 0; i < n; i++) {
      FormulaPtr g = items_[i];
      char t;
      if (bit_of_item_[i] >= 0)
        t = (v >> bit_of_item_[i]) & 1;
      else if (g->op == Op::Not)
        t = !tr[left_[i]];
      else if (g->op == Op::And)
        t = tr[left_[i]] && tr[right_[i]];
      else
        throw std::logic_error("closure: non-core entry");
      tr[i] = t;
      if (t) truth_cache_[v].set(i);
    }
    for (std::size_t k = 0; k < until_items_.size(); k++)
      if (tr[until_items_[k]]) until_bits_[v] |= (1u << k);
    for (std::size_t k = 0; k < since_items_.size(); k++)
      if (tr[since_items_[k]]) since_bits_[v] |= (1u << k);
  }
}

const FormulaSet& ClosureTable::truths(Assignment v) const {
  force_truth_cache();
  return truth_cache_[v];
}

std::uint32_t ClosureTable::until_bits(Assignment v) const {
  force_truth_cache();
  return until_bits_[v];
}

std::uint32_t ClosureTable::since_bits(Assignment v) const {
  force_truth_cache();
  return since_bits_[v];
}

std::vector<std::string> ClosureTable::set_texts(const FormulaSet& s) const {
  std::vector<std::string> out;
  s.for_each([&](int i) { out.push_back(item_text(i)); });
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<FormulaSet> ClosureTable::set_from_texts(
    const std::vector<std::string>& texts) const {
  FormulaSet s;
  for (const auto& t : texts) {
    FormulaPtr g;
    try {
      g = parse(t);
    } catch (const ParseError&) {
      return std::nullopt;
    }
    int i = index_of(g);
    if (i < 0) return std::nullopt;
    s.set(i);
  }
  return s;
}

}  // namespace rtl
