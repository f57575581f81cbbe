// Machine-checkable derivation certificates: a topologically ordered node
// list whose root is the relativized mosaic, each node justified by a
// composition, lead, trail or shuffle witness over earlier nodes. Checking
// requires no search.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtl/rms.hpp"

namespace rtl {

struct CertNode {
  std::vector<std::string> start, cover, end;  // sorted formula texts
  std::string tag;                             // "0", "0+", "1-", ...
  std::string rule;                            // composition | lead | trail | shuffle
  std::vector<int> children;                   // parts or sigma, node indices
  std::vector<std::vector<std::string>> ps;    // shuffle point types
  std::vector<std::vector<int>> lambdas;       // shuffle sequences, node indices
};

struct Certificate {
  std::string formula;  // formula whose satisfiability the certificate shows
  std::string tool;
  int depth_bound = 0;  // integer levels the search was allowed
  int root = -1;
  std::vector<CertNode> nodes;
};

class Decider;

// Serializes the ledger derivation of the relativized witness.
Certificate build_certificate(const Decider& decider, const std::string& formula_text);

std::string certificate_to_json(const Certificate& cert, int indent = -1);
std::optional<Certificate> certificate_from_json(const std::string& text,
                                                 std::string* error = nullptr);

struct CheckResult {
  bool ok = false;
  std::string path;    // location of the first failure, e.g. "nodes[3].rule"
  std::string reason;
};

// Re-verifies the certificate against the given formula without any search.
CheckResult check_certificate(const Certificate& cert, FormulaPtr formula);
// Uses the certificate's embedded formula.
CheckResult check_certificate(const Certificate& cert);

}  // namespace rtl
