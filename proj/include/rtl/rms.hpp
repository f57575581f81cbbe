// Level fixpoint over the mosaic universe: seeds from sequence-free
// shuffles, alternating lead/trail and shuffle layers with composition
// closure in between, monotone tags, witness recording, and the top-level
// satisfiability / validity decisions.
#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtl/relativize.hpp"
#include "rtl/tactics.hpp"

namespace rtl {

// Tag chain 0 < 0+ < 1- < 1 < 1+ < 2- < ... encoded as ranks 0,1,2,3,...
std::string tag_name(int rank);
std::optional<int> tag_rank(const std::string& name);

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DeciderOptions {
  int depth_bound = -1;        // integer levels; -1 means 2 * |psi|
  int threads = 1;
  long long budget_ms = 0;     // wall-clock budget, 0 = none
  std::size_t max_lattice = 1u << 21;
  std::size_t max_mosaics = 1u << 23;
};

struct DecisionStats {
  std::size_t closure_size = 0;
  std::size_t mpc_count = 0;
  std::size_t lattice_size = 0;
  std::size_t tagged = 0;
  int last_rank = -1;
  bool saturated = false;
  bool budget_exhausted = false;
  long long wall_ms = 0;
  std::vector<std::pair<std::string, std::size_t>> ledger_sizes;  // cumulative per tag
};

// Intersection-closed family of covers generated by the boundary MPCs. Every
// mosaic the fixpoint can tag has its cover here.
class CoverLattice {
 public:
  CoverLattice(const ClosureTable& table, std::size_t cap);
  int size() const { return static_cast<int>(sets_.size()); }
  const FormulaSet& set(int id) const { return sets_[id]; }
  int id_of(const FormulaSet& s) const;  // -1 if absent
  int mpc_id(Assignment v) const { return mpc_ids_[v]; }

 private:
  std::vector<FormulaSet> sets_;
  std::unordered_map<FormulaSet, int, FormulaSetHash> ids_;
  std::vector<int> mpc_ids_;
};

class Decider {
 public:
  Decider(const DecisionContext& ctx, DeciderOptions opt = {});

  // fixpoint steps; each includes the composition closure at its rank
  void level0();
  void step_plus(int n);
  void step_minus(int n);
  void step_level(int n_next);
  // full iteration; stops at saturation, the depth bound, or (optionally) as
  // soon as a relativized mosaic is tagged
  void rms_membership(bool stop_on_relativized = false);

  const DecisionContext& ctx() const { return *ctx_; }
  const CoverLattice& lattice() const { return lattice_; }

  std::size_t tagged_count() const { return order_.size(); }
  std::optional<int> rank_of(const Mosaic& m) const;
  std::vector<Mosaic> tagged_at_or_below(int rank) const;
  std::optional<Mosaic> relativized_witness() const;
  std::optional<TacticWitness> witness_of(const Mosaic& m) const;

  DecisionStats stats() const;

  // internal ids (certificate construction)
  int id_of(const Mosaic& m) const;
  Mosaic mosaic_of(int id) const;
  int rank_of_id(int id) const { return rank_[id]; }
  struct RawWitness {
    TacticWitness::Kind kind;
    std::vector<int> children;                  // sigma or parts, mosaic ids
    std::vector<Assignment> ps;                 // shuffle point types
    std::vector<std::vector<int>> lambdas;      // shuffle lambda pieces
  };
  const RawWitness& raw_witness(int id) const { return witness_[id]; }
  std::optional<int> relativized_id() const { return found_; }

 private:
  struct Edge {
    int mid;
    Assignment from, to;
    int cover_id;
  };

  void check_budget();
  int intern(Assignment a, int cover_id, Assignment c);
  bool tag(int mid, int rank, RawWitness w);
  void compose_close(int rank);
  void shuffle_step(int rank, int base_rank);
  void leadtrail_step(int rank, int base_rank);
  std::vector<Edge> base_edges(int base_rank) const;
  std::vector<Mosaic> materialize(const std::vector<Edge>& edges) const;

  const DecisionContext* ctx_;
  DeciderOptions opt_;
  const ClosureTable* t_;
  CoverLattice lattice_;
  int depth_levels_;
  std::chrono::steady_clock::time_point start_;

  // mosaic interning
  std::vector<std::array<std::uint32_t, 3>> mosaics_;  // (start, cover_id, end)
  std::unordered_map<std::uint64_t, std::vector<int>> mosaic_ids_;

  std::vector<int> rank_;             // per mosaic id, -1 untagged
  std::vector<RawWitness> witness_;   // per mosaic id (valid when tagged)
  std::vector<int> order_;            // tagged ids in insertion order
  std::vector<std::pair<int, std::size_t>> rank_sizes_;  // (rank, cumulative)
  std::optional<int> found_;          // relativized mosaic id
  bool stop_early_ = false;
  int last_rank_ = -1;
  bool saturated_ = false;
  bool budget_exhausted_ = false;
};

// Least superset of the given mosaics closed under binary composition.
std::vector<Mosaic> composition_closure(std::span<const Mosaic> seed,
                                        const ClosureTable& table);

enum class Status { Sat, Unsat, Valid, Invalid };
const char* status_name(Status s);

struct Certificate;  // certificate.hpp

struct Verdict {
  Status status;
  std::shared_ptr<Certificate> certificate;  // present for Sat / Invalid
  DecisionStats stats;
};

Verdict decide_sat(FormulaPtr f, DeciderOptions opt = {});
Verdict decide_valid(FormulaPtr f, DeciderOptions opt = {});

}  // namespace rtl
