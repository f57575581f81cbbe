// Decomposition tactics: the two boundary-compatibility properties, the
// interleaving (shuffle) tactic in both its definitional and seven-condition
// forms, and deterministic existence searches for shuffle, lead and trail
// witnesses over a base set of mosaics.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rtl/mosaic.hpp"

namespace rtl {

// Forward property: an MPC set q joins the interior of m exactly when its
// Until entries match what m's cover and end force.
bool forward_k(const Mosaic& m, const FormulaSet& q, const ClosureTable& table);
// Mirror for Since entries against m's start.
bool backward_k(const Mosaic& m, const FormulaSet& q, const ClosureTable& table);

struct ShuffleSpec {
  std::vector<Mpc> ps;                        // P_0..P_s, s >= 0
  std::vector<std::vector<Mosaic>> lambdas;   // composing sequences, possibly none
};

// Pieces induced by a shuffle spec around mosaic (A,B,C).
struct ShuffleExpansion {
  Mosaic m_prime, m_dblprime;
  std::vector<Mosaic> ys;           // cyclic point-type pieces
  std::vector<Mosaic> xs;           // glue pieces, empty when no lambdas
  std::vector<Mosaic> lambda_flat;  // <x_0> lam_1 <x_1> ... lam_r <x_r>
  std::vector<Mosaic> mu;           // <y_0 .. y_s>
};

bool shuffle_spec_well_formed(const ShuffleSpec& spec, const ClosureTable& table);
ShuffleExpansion build_shuffle_expansion(const Mosaic& m, const ShuffleSpec& spec);

// Seven-condition characterization (S0..S6).
bool check_shuffle_conditions(const Mosaic& m, const ShuffleSpec& spec,
                              const ClosureTable& table);
// Literal definition: all pieces are mosaics and the six full-decomposition
// requirements hold.
bool check_shuffle_definitional(const Mosaic& m, const ShuffleSpec& spec,
                                const ClosureTable& table);

// Searches. Results are deterministic in the base order-independent sense:
// bases are canonically sorted internally, so equal base sets give equal
// witnesses. Every returned witness re-verifies under the check above.
std::optional<ShuffleSpec> exists_shuffle(const Mosaic& m, std::span<const Mosaic> base,
                                          const ClosureTable& table);
std::optional<std::vector<Mosaic>> exists_lead(const Mosaic& m,
                                               std::span<const Mosaic> base,
                                               const ClosureTable& table);
std::optional<std::vector<Mosaic>> exists_trail(const Mosaic& m,
                                                std::span<const Mosaic> base,
                                                const ClosureTable& table);

struct TacticWitness {
  enum class Kind { Lead, Trail, Shuffle, Composition };
  Kind kind;
  std::vector<Mosaic> sigma;   // lead / trail
  ShuffleSpec shuffle;         // shuffle
  std::vector<Mosaic> parts;   // composition
};

}  // namespace rtl
