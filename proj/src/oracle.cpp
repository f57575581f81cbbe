#include "rtl/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_map>

namespace rtl {

IntervalWord parse_word(const std::string& text) {
  IntervalWord w;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) i++;
  };
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("word literal error at offset " + std::to_string(i) +
                                ": " + msg);
  };
  skip();
  if (i >= text.size() || text[i] != '(') fail("expected '('");
  i++;
  bool expect_interval = true;
  while (true) {
    skip();
    if (i >= text.size()) fail("unterminated word");
    if (text[i] == ')') {
      i++;
      break;
    }
    char open = expect_interval ? '{' : '[';
    char close = expect_interval ? '}' : ']';
    if (text[i] != open) fail(std::string("expected '") + open + "'");
    i++;
    std::set<std::string> atoms;
    while (true) {
      skip();
      if (i >= text.size()) fail("unterminated region");
      if (text[i] == close) {
        i++;
        break;
      }
      std::size_t start = i;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
        i++;
      if (i == start) fail("expected atom name");
      atoms.insert(text.substr(start, i - start));
    }
    w.regions.push_back(std::move(atoms));
    expect_interval = !expect_interval;
    skip();
    if (i < text.size() && text[i] == '|') {
      i++;
      continue;
    }
  }
  if (w.regions.empty() || w.region_count() % 2 == 0)
    throw std::invalid_argument("word must have an odd number of regions");
  skip();
  if (i != text.size()) fail("trailing input");
  return w;
}

std::string print_word(const IntervalWord& w) {
  std::string out = "(";
  for (int r = 0; r < w.region_count(); r++) {
    if (r) out += " |";
    out += ' ';
    out += IntervalWord::is_point(r) ? '[' : '{';
    bool first = true;
    for (const auto& a : w.regions[r]) {
      if (!first) out += ' ';
      out += a;
      first = false;
    }
    out += IntervalWord::is_point(r) ? ']' : '}';
  }
  out += " )";
  return out;
}

namespace {

void eval_rec(const IntervalWord& w, FormulaPtr f,
              std::unordered_map<FormulaPtr, TruthVector>& memo) {
  if (memo.count(f)) return;
  int R = w.region_count();
  TruthVector out(R, 0);
  switch (f->op) {
    case Op::Atom:
      for (int r = 0; r < R; r++) out[r] = w.regions[r].count(f->name) ? 1 : 0;
      break;
    case Op::Not: {
      eval_rec(w, f->left, memo);
      const TruthVector& a = memo.at(f->left);
      for (int r = 0; r < R; r++) out[r] = !a[r];
      break;
    }
    case Op::And: {
      eval_rec(w, f->left, memo);
      eval_rec(w, f->right, memo);
      const TruthVector& a = memo.at(f->left);
      const TruthVector& b = memo.at(f->right);
      for (int r = 0; r < R; r++) out[r] = a[r] && b[r];
      break;
    }
    case Op::Until: {
      // Right-to-left. On the final interval only an interior witness is
      // possible; elsewhere the witness sits inside the next interval, at its
      // closing point, or beyond it.
      eval_rec(w, f->left, memo);
      eval_rec(w, f->right, memo);
      const TruthVector& a = memo.at(f->left);
      const TruthVector& b = memo.at(f->right);
      out[R - 1] = a[R - 1] && b[R - 1];
      for (int r = R - 2; r >= 0; r--) {
        if (IntervalWord::is_point(r)) {
          out[r] = out[r + 1];
        } else {
          out[r] = b[r] && (a[r] || a[r + 1] || (b[r + 1] && out[r + 1]));
        }
      }
      break;
    }
    case Op::Since: {
      eval_rec(w, f->left, memo);
      eval_rec(w, f->right, memo);
      const TruthVector& a = memo.at(f->left);
      const TruthVector& b = memo.at(f->right);
      out[0] = a[0] && b[0];
      for (int r = 1; r < R; r++) {
        if (IntervalWord::is_point(r)) {
          out[r] = out[r - 1];
        } else {
          out[r] = b[r] && (a[r] || a[r - 1] || (b[r - 1] && out[r - 1]));
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("eval: formula must be core");
  }
  memo.emplace(f, std::move(out));
}

}  // namespace

TruthVector eval(const IntervalWord& word, FormulaPtr f) {
  std::unordered_map<FormulaPtr, TruthVector> memo;
  eval_rec(word, f, memo);
  return memo.at(f);
}

std::optional<SatSearchHit> sat_search(FormulaPtr f, int max_regions) {
  if (max_regions < 1) throw std::invalid_argument("sat_search: max_regions >= 1");
  if (!f->is_core()) throw std::invalid_argument("sat_search: formula must be core");
  std::vector<std::string> atoms = atom_names(f);
  int k = static_cast<int>(atoms.size());
  auto label_set = [&](unsigned mask) {
    std::set<std::string> s;
    for (int a = 0; a < k; a++)
      if ((mask >> a) & 1) s.insert(atoms[a]);
    return s;
  };
  for (int n = 0; 2 * n + 1 <= max_regions; n++) {
    int R = 2 * n + 1;
    std::vector<unsigned> label(R, 0);
    const unsigned top = k >= 32 ? 0 : (1u << k);
    while (true) {
      // canonical: no point carries the same label as both neighbouring
      // intervals with those intervals equal (such a word merges)
      bool canonical = true;
      for (int pt = 1; pt < R; pt += 2)
        if (label[pt - 1] == label[pt] && label[pt] == label[pt + 1]) canonical = false;
      if (canonical) {
        IntervalWord w;
        for (int r = 0; r < R; r++) w.regions.push_back(label_set(label[r]));
        TruthVector tv = eval(w, f);
        for (int r = 0; r < R; r++)
          if (tv[r]) return SatSearchHit{std::move(w), r};
      }
      // odometer, last region fastest
      int pos = R - 1;
      while (pos >= 0) {
        if (++label[pos] < top) break;
        label[pos] = 0;
        pos--;
      }
      if (pos < 0) break;
    }
  }
  return std::nullopt;
}

Mosaic mos_extract(const IntervalWord& word, int i, int j, const ClosureTable& table) {
  if (!(1 <= i && i < j && j <= word.point_count()))
    throw std::invalid_argument("mos_extract: need point indices 1 <= i < j <= n");
  int ri = IntervalWord::point_region(i);
  int rj = IntervalWord::point_region(j);
  std::vector<TruthVector> tv(table.size());
  std::unordered_map<FormulaPtr, TruthVector> memo;
  for (int idx = 0; idx < table.size(); idx++) {
    eval_rec(word, table.item(idx), memo);
    tv[idx] = memo.at(table.item(idx));
  }
  Mosaic m;
  for (int idx = 0; idx < table.size(); idx++) {
    if (tv[idx][ri]) m.start.set(idx);
    if (tv[idx][rj]) m.end.set(idx);
    bool all = true;
    for (int r = ri + 1; r < rj && all; r++)
      if (!tv[idx][r]) all = false;
    if (all) m.cover.set(idx);
  }
  return m;
}

}  // namespace rtl
