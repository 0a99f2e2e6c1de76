#include "bcmf/tree_mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bcmf/error.hpp"
#include "bcmf/leaf_model.hpp"
#include "bcmf/random.hpp"

namespace bcmf {

namespace {

constexpr double kGrowProbability = 0.25;
constexpr double kPruneProbability = 0.25;

struct Sums {
  double sr = 0.0;
  double ss = 0.0;
  std::size_t count = 0;
};

double evidence(const Sums& s, double noise_var, double leaf_var) {
  return leaf_log_evidence(s.sr, s.ss, noise_var, leaf_var);
}

void gather_leaf(const RoutedTree& routed, int leaf, std::vector<std::size_t>& out) {
  out.clear();
  const auto& leaf_of = routed.leaf_of;
  for (std::size_t i = 0; i < leaf_of.size(); ++i) {
    if (leaf_of[i] == leaf) out.push_back(i);
  }
}

// Draws a rule from the prior at a node holding `members`; false if no
// covariate separates them.
bool draw_rule(const CovariateIndex& cov, std::span<const std::size_t> members, Rng& rng, MoveWorkspace& ws,
               SplitRule& rule) {
  auto& valid = ws.valid_vars;
  auto& lo_rank = ws.lo_rank;
  auto& hi_rank = ws.hi_rank;
  valid.clear();
  lo_rank.clear();
  hi_rank.clear();
  for (std::size_t v = 0; v < cov.cols(); ++v) {
    const auto ranks = cov.ranks(v);
    std::uint32_t lo = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t hi = 0;
    for (std::size_t i : members) {
      lo = std::min(lo, ranks[i]);
      hi = std::max(hi, ranks[i]);
    }
    if (lo < hi) {
      valid.push_back(static_cast<std::uint32_t>(v));
      lo_rank.push_back(lo);
      hi_rank.push_back(hi);
    }
  }
  if (valid.empty()) return false;
  const std::size_t pick = rng.index(valid.size());
  const std::uint32_t v = valid[pick];
  const auto ranks = cov.ranks(v);
  if (ws.seen.size() < cov.max_levels()) ws.seen.assign(cov.max_levels(), 0);
  for (std::size_t i : members) ws.seen[ranks[i]] = 1;
  ws.candidates.clear();
  // every distinct value except the largest keeps both children nonempty
  for (std::uint32_t r = lo_rank[pick]; r < hi_rank[pick]; ++r) {
    if (ws.seen[r]) ws.candidates.push_back(r);
  }
  for (std::uint32_t r = lo_rank[pick]; r <= hi_rank[pick]; ++r) ws.seen[r] = 0;
  const std::uint32_t cut_rank = ws.candidates[rng.index(ws.candidates.size())];
  rule.variable = v;
  rule.cutpoint = cov.levels(v)[cut_rank];
  return true;
}

MoveOutcome grow(RoutedTree& routed, std::span<const double> sr, std::span<const double> ss,
                 const CovariateIndex& cov, const TreePrior& prior, double noise_var, double leaf_var, Rng& rng,
                 MoveWorkspace& ws) {
  MoveOutcome out{MoveKind::kGrow, false, false};
  DecisionTree& tree = routed.tree;
  const auto leaves = tree.leaves();
  const int leaf = leaves[rng.index(leaves.size())];
  gather_leaf(routed, leaf, ws.members);
  SplitRule rule;
  if (ws.members.empty() || !draw_rule(cov, ws.members, rng, ws, rule)) return out;
  out.valid = true;

  Sums left, right;
  const auto column = cov.matrix().col(rule.variable);
  for (std::size_t i : ws.members) {
    Sums& side = rule.goes_left(column[static_cast<Eigen::Index>(i)]) ? left : right;
    side.sr += sr[i];
    side.ss += ss[i];
    ++side.count;
  }
  const Sums parent{left.sr + right.sr, left.ss + right.ss, left.count + right.count};

  const auto& node = tree.node(leaf);
  const int depth = node.depth;
  std::size_t prunable_after = tree.prunable_nodes().size() + 1;
  if (node.parent != DecisionTree::kNone) {
    const auto& p = tree.node(node.parent);
    const int sibling = p.left == leaf ? p.right : p.left;
    if (tree.node(sibling).is_leaf()) --prunable_after;
  }
  const double p_here = prior.split_probability(depth);
  const double p_child = prior.split_probability(depth + 1);
  const double log_ratio = evidence(left, noise_var, leaf_var) + evidence(right, noise_var, leaf_var) -
                           evidence(parent, noise_var, leaf_var) + std::log(p_here) + 2.0 * std::log1p(-p_child) -
                           std::log1p(-p_here) + std::log(static_cast<double>(leaves.size())) -
                           std::log(static_cast<double>(prunable_after)) +
                           std::log(kPruneProbability / kGrowProbability);
  if (std::log(rng.uniform()) < log_ratio) {
    auto [l, r] = tree.split(leaf, rule);
    for (std::size_t i : ws.members) {
      routed.leaf_of[i] = rule.goes_left(column[static_cast<Eigen::Index>(i)]) ? l : r;
    }
    out.accepted = true;
  }
  return out;
}

MoveOutcome prune(RoutedTree& routed, std::span<const double> sr, std::span<const double> ss,
                  const TreePrior& prior, double noise_var, double leaf_var, Rng& rng) {
  MoveOutcome out{MoveKind::kPrune, false, false};
  DecisionTree& tree = routed.tree;
  const auto candidates = tree.prunable_nodes();
  if (candidates.empty()) return out;
  out.valid = true;
  const int target = candidates[rng.index(candidates.size())];
  const auto& node = tree.node(target);
  const int l = node.left;
  const int r = node.right;
  Sums left, right;
  for (std::size_t i = 0; i < routed.leaf_of.size(); ++i) {
    const int at = routed.leaf_of[i];
    if (at == l) {
      left.sr += sr[i];
      left.ss += ss[i];
      ++left.count;
    } else if (at == r) {
      right.sr += sr[i];
      right.ss += ss[i];
      ++right.count;
    }
  }
  const Sums merged{left.sr + right.sr, left.ss + right.ss, left.count + right.count};
  const int depth = node.depth;
  const double p_here = prior.split_probability(depth);
  const double p_child = prior.split_probability(depth + 1);
  const double leaves_after = static_cast<double>(tree.leaf_count() - 1);
  const double log_ratio = evidence(merged, noise_var, leaf_var) - evidence(left, noise_var, leaf_var) -
                           evidence(right, noise_var, leaf_var) + std::log1p(-p_here) - std::log(p_here) -
                           2.0 * std::log1p(-p_child) + std::log(static_cast<double>(candidates.size())) -
                           std::log(leaves_after) + std::log(kGrowProbability / kPruneProbability);
  if (std::log(rng.uniform()) < log_ratio) {
    tree.collapse(target);
    for (int& at : routed.leaf_of) {
      if (at == l || at == r) at = target;
    }
    out.accepted = true;
  }
  return out;
}

MoveOutcome change(RoutedTree& routed, std::span<const double> sr, std::span<const double> ss,
                   const CovariateIndex& cov, double noise_var, double leaf_var, Rng& rng, MoveWorkspace& ws) {
  MoveOutcome out{MoveKind::kChange, false, false};
  DecisionTree& tree = routed.tree;
  const auto internal = tree.internal_nodes();
  if (internal.empty()) return out;
  const int target = internal[rng.index(internal.size())];

  const std::size_t bound = tree.id_bound();
  ws.in_subtree.assign(bound, 0);
  std::vector<int> subtree_leaves;
  std::vector<int> stack{target};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    ws.in_subtree[static_cast<std::size_t>(id)] = 1;
    const auto& n = tree.node(id);
    if (n.is_leaf()) {
      subtree_leaves.push_back(id);
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  ws.members.clear();
  for (std::size_t i = 0; i < routed.leaf_of.size(); ++i) {
    if (ws.in_subtree[static_cast<std::size_t>(routed.leaf_of[i])]) ws.members.push_back(i);
  }
  SplitRule rule;
  if (ws.members.empty() || !draw_rule(cov, ws.members, rng, ws, rule)) return out;
  out.valid = true;

  // old sums in slots [0, bound), new sums in [bound, 2 bound)
  ws.node_sr.assign(2 * bound, 0.0);
  ws.node_ss.assign(2 * bound, 0.0);
  ws.node_count.assign(2 * bound, 0);
  ws.new_leaf.resize(ws.members.size());
  const Eigen::MatrixXd& X = cov.matrix();
  for (std::size_t k = 0; k < ws.members.size(); ++k) {
    const std::size_t i = ws.members[k];
    const auto old_slot = static_cast<std::size_t>(routed.leaf_of[i]);
    ws.node_sr[old_slot] += sr[i];
    ws.node_ss[old_slot] += ss[i];
    ++ws.node_count[old_slot];

    const auto row = static_cast<Eigen::Index>(i);
    const auto& top = tree.node(target);
    int id = rule.goes_left(X(row, rule.variable)) ? top.left : top.right;
    while (!tree.node(id).is_leaf()) {
      const auto& n = tree.node(id);
      id = n.rule.goes_left(X(row, n.rule.variable)) ? n.left : n.right;
    }
    ws.new_leaf[k] = id;
    const std::size_t new_slot = bound + static_cast<std::size_t>(id);
    ws.node_sr[new_slot] += sr[i];
    ws.node_ss[new_slot] += ss[i];
    ++ws.node_count[new_slot];
  }
  double log_ratio = 0.0;
  for (int leaf : subtree_leaves) {
    const auto slot = static_cast<std::size_t>(leaf);
    if (ws.node_count[bound + slot] == 0) return out;  // empty leaf: rejected outright
    log_ratio += leaf_log_evidence(ws.node_sr[bound + slot], ws.node_ss[bound + slot], noise_var, leaf_var) -
                 leaf_log_evidence(ws.node_sr[slot], ws.node_ss[slot], noise_var, leaf_var);
  }
  if (std::log(rng.uniform()) < log_ratio) {
    tree.set_rule(target, rule);
    for (std::size_t k = 0; k < ws.members.size(); ++k) routed.leaf_of[ws.members[k]] = ws.new_leaf[k];
    out.accepted = true;
  }
  return out;
}

}  // namespace

void ScaledResponse::validate() const {
  if (response.size() != scale.size()) throw InvalidArgument("response and scale lengths differ");
  if (!(noise_var > 0.0)) throw InvalidArgument("noise variance must be positive");
}

RoutedTree::RoutedTree(DecisionTree t, const CovariateIndex& covariates) : tree(std::move(t)) {
  reroute(covariates);
}

void RoutedTree::reroute(const CovariateIndex& covariates) {
  if (tree.dimension() != covariates.cols()) throw InvalidArgument("tree dimension does not match covariates");
  leaf_of.resize(covariates.rows());
  for (std::size_t i = 0; i < covariates.rows(); ++i) {
    leaf_of[i] = tree.find_leaf(covariates.matrix(), static_cast<Eigen::Index>(i));
  }
}

void MoveCounts::record(const MoveOutcome& outcome) {
  const auto k = static_cast<std::size_t>(outcome.kind);
  ++proposed[k];
  if (!outcome.valid) ++invalid[k];
  if (outcome.accepted) ++accepted[k];
}

MoveOutcome propose_structure_move(RoutedTree& routed, std::span<const double> sr, std::span<const double> ss,
                                   const CovariateIndex& covariates, const TreePrior& prior, double noise_var,
                                   double leaf_var, Rng& rng, MoveWorkspace& ws) {
  const double u = rng.uniform();
  if (u < kGrowProbability) return grow(routed, sr, ss, covariates, prior, noise_var, leaf_var, rng, ws);
  if (u < kGrowProbability + kPruneProbability) return prune(routed, sr, ss, prior, noise_var, leaf_var, rng);
  return change(routed, sr, ss, covariates, noise_var, leaf_var, rng, ws);
}

void draw_leaf_values(RoutedTree& routed, std::span<const double> sr, std::span<const double> ss, double noise_var,
                      double leaf_var, Rng& rng, MoveWorkspace& ws) {
  const std::size_t bound = routed.tree.id_bound();
  ws.node_sr.assign(bound, 0.0);
  ws.node_ss.assign(bound, 0.0);
  for (std::size_t i = 0; i < routed.leaf_of.size(); ++i) {
    const auto slot = static_cast<std::size_t>(routed.leaf_of[i]);
    ws.node_sr[slot] += sr[i];
    ws.node_ss[slot] += ss[i];
  }
  for (int leaf : routed.tree.leaves()) {
    const auto slot = static_cast<std::size_t>(leaf);
    const LeafPosterior post = leaf_posterior(ws.node_sr[slot], ws.node_ss[slot], noise_var, leaf_var);
    routed.tree.set_value(leaf, post.mean + std::sqrt(post.variance) * rng.normal());
  }
}

namespace {
void scaled_statistics(const ScaledResponse& data, std::vector<double>& sr, std::vector<double>& ss) {
  data.validate();
  sr.resize(data.response.size());
  ss.resize(data.response.size());
  for (std::size_t i = 0; i < sr.size(); ++i) {
    sr[i] = data.scale[i] * data.response[i];
    ss[i] = data.scale[i] * data.scale[i];
  }
}
}  // namespace

void sample_leaf_values(RoutedTree& routed, const ScaledResponse& data, double leaf_var, Rng& rng) {
  std::vector<double> sr, ss;
  scaled_statistics(data, sr, ss);
  if (sr.size() != routed.leaf_of.size()) throw InvalidArgument("response length does not match routed tree");
  MoveWorkspace ws;
  draw_leaf_values(routed, sr, ss, data.noise_var, leaf_var, rng, ws);
}

MoveOutcome mh_tree_update(RoutedTree& routed, const ScaledResponse& data, const CovariateIndex& covariates,
                           const TreePrior& prior, double leaf_var, Rng& rng) {
  std::vector<double> sr, ss;
  scaled_statistics(data, sr, ss);
  if (sr.size() != routed.leaf_of.size()) throw InvalidArgument("response length does not match routed tree");
  MoveWorkspace ws;
  const MoveOutcome outcome =
      propose_structure_move(routed, sr, ss, covariates, prior, data.noise_var, leaf_var, rng, ws);
  draw_leaf_values(routed, sr, ss, data.noise_var, leaf_var, rng, ws);
  return outcome;
}

}  // namespace bcmf
