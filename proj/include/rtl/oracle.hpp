// Finite-variability real models: alternating open intervals and points with
// constant atom valuations, an exact per-region evaluator, a bounded model
// search, and boundary-pair extraction into mosaics.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtl/mosaic.hpp"

namespace rtl {

// regions[0], regions[2], ... are open intervals (the outermost two are
// unbounded); odd indices are points. Size is always odd.
struct IntervalWord {
  std::vector<std::set<std::string>> regions;

  int region_count() const { return static_cast<int>(regions.size()); }
  int point_count() const { return region_count() / 2; }
  static bool is_point(int region) { return region % 2 == 1; }
  // region index of the k-th point, 1-based
  static int point_region(int k) { return 2 * k - 1; }

  bool operator==(const IntervalWord& o) const { return regions == o.regions; }
};

// Literal format: "( {p q} | [p] | {} )" — intervals in braces, points in
// brackets, atoms space-separated, regions separated by '|'.
IntervalWord parse_word(const std::string& text);
std::string print_word(const IntervalWord& w);

using TruthVector = std::vector<char>;

// Truth of a core formula on every region. Truth is constant per region, so
// one boolean per region is exact.
TruthVector eval(const IntervalWord& word, FormulaPtr f);

struct SatSearchHit {
  IntervalWord word;
  int region;
};

// Enumerates canonical words over the formula's atoms with up to max_regions
// regions and returns the first satisfying (word, region). Absence only
// means no finite-variability model within the bound.
std::optional<SatSearchHit> sat_search(FormulaPtr f, int max_regions);

// Mosaic of the pair (x_i, x_j), i < j, 1-based point indices: closure truths
// at x_i, on everything strictly between, and at x_j.
Mosaic mos_extract(const IntervalWord& word, int i, int j, const ClosureTable& table);

}  // namespace rtl
