#pragma once
// Single-tree Metropolis-Hastings for the scaled-response model
//   r_i = s_i g(x_i; T, M) + e_i,  e_i ~ N(0, sigma^2),
// with leaf values integrated out (GROW 0.25 / PRUNE 0.25 / CHANGE 0.5).
// Split rules are proposed from their prior: variable uniform over the
// covariates that still separate the node's observations, cutpoint uniform
// over the node's distinct values except the largest, so the rule terms
// cancel from every acceptance ratio.

#include <cstdint>
#include <span>
#include <vector>

#include "bcmf/covariates.hpp"
#include "bcmf/tree.hpp"

namespace bcmf {

class Rng;

struct ScaledResponse {
  std::span<const double> response;
  std::span<const double> scale;
  double noise_var = 1.0;

  void validate() const;
};

// A tree together with the leaf holding each training observation.
struct RoutedTree {
  DecisionTree tree;
  std::vector<int> leaf_of;

  RoutedTree(DecisionTree t, const CovariateIndex& covariates);
  void reroute(const CovariateIndex& covariates);
};

enum class MoveKind : std::uint8_t { kGrow, kPrune, kChange };

struct MoveOutcome {
  MoveKind kind = MoveKind::kGrow;
  bool valid = false;     // a proposal could be formed
  bool accepted = false;
};

struct MoveCounts {
  std::uint64_t proposed[3] = {0, 0, 0};
  std::uint64_t invalid[3] = {0, 0, 0};
  std::uint64_t accepted[3] = {0, 0, 0};

  void record(const MoveOutcome& outcome);
};

// Scratch buffers reused across proposals.
struct MoveWorkspace {
  std::vector<std::size_t> members;
  std::vector<std::uint8_t> seen;
  std::vector<std::uint32_t> candidates;
  std::vector<std::uint32_t> valid_vars;
  std::vector<std::uint32_t> lo_rank;
  std::vector<std::uint32_t> hi_rank;
  std::vector<int> new_leaf;
  std::vector<double> node_sr;
  std::vector<double> node_ss;
  std::vector<std::size_t> node_count;
  std::vector<std::uint8_t> in_subtree;
};

// Structure move only. `sr` holds s_i r_i and `ss` holds s_i^2.
MoveOutcome propose_structure_move(RoutedTree& routed, std::span<const double> sr, std::span<const double> ss,
                                   const CovariateIndex& covariates, const TreePrior& prior, double noise_var,
                                   double leaf_var, Rng& rng, MoveWorkspace& ws);

// Conjugate Gibbs draw of every leaf value; leaves without scaled
// observations draw from the N(0, leaf_var) prior.
void draw_leaf_values(RoutedTree& routed, std::span<const double> sr, std::span<const double> ss, double noise_var,
                      double leaf_var, Rng& rng, MoveWorkspace& ws);

void sample_leaf_values(RoutedTree& routed, const ScaledResponse& data, double leaf_var, Rng& rng);

// One GROW/PRUNE/CHANGE step followed by a leaf-value draw.
MoveOutcome mh_tree_update(RoutedTree& routed, const ScaledResponse& data, const CovariateIndex& covariates,
                           const TreePrior& prior, double leaf_var, Rng& rng);

}  // namespace bcmf
