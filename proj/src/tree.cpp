#include "bcmf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bcmf/error.hpp"
#include "bcmf/random.hpp"

namespace bcmf {

double TreePrior::split_probability(int depth) const {
  return alpha * std::pow(1.0 + depth, -beta);
}

void TreePrior::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("tree prior alpha must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ConfigError("tree prior beta must be >= 0");
}

DecisionTree::DecisionTree(std::size_t dimension, double root_value) : dimension_(dimension) {
  allocate(kNone, 0, root_value);
}

DecisionTree::NodeId DecisionTree::allocate(NodeId parent, int depth, double value) {
  Node fresh;
  fresh.parent = parent;
  fresh.depth = depth;
  fresh.value = value;
  if (!free_.empty()) {
    const NodeId id = free_.back();
    free_.pop_back();
    nodes_[static_cast<std::size_t>(id)] = fresh;
    return id;
  }
  nodes_.push_back(fresh);
  return static_cast<NodeId>(nodes_.size() - 1);
}

bool DecisionTree::alive(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].in_use; }

void DecisionTree::set_value(NodeId leaf, double value) {
  nodes_[static_cast<std::size_t>(leaf)].value = value;
}

void DecisionTree::set_rule(NodeId internal, SplitRule rule) {
  if (rule.variable >= dimension_) throw InvalidArgument("split variable out of range");
  nodes_[static_cast<std::size_t>(internal)].rule = rule;
}

std::pair<DecisionTree::NodeId, DecisionTree::NodeId> DecisionTree::split(NodeId leaf, SplitRule rule,
                                                                          double left_value,
                                                                          double right_value) {
  if (!node(leaf).is_leaf()) throw InvalidArgument("split: node is not a leaf");
  if (rule.variable >= dimension_) throw InvalidArgument("split variable out of range");
  const int depth = node(leaf).depth;
  const NodeId l = allocate(leaf, depth + 1, left_value);
  const NodeId r = allocate(leaf, depth + 1, right_value);
  Node& parent = nodes_[static_cast<std::size_t>(leaf)];
  parent.left = l;
  parent.right = r;
  parent.rule = rule;
  return {l, r};
}

void DecisionTree::collapse(NodeId internal, double value) {
  Node& n = nodes_[static_cast<std::size_t>(internal)];
  if (n.is_leaf() || !node(n.left).is_leaf() || !node(n.right).is_leaf()) {
    throw InvalidArgument("collapse: node must have two leaf children");
  }
  free_.push_back(n.left);
  free_.push_back(n.right);
  nodes_[static_cast<std::size_t>(n.left)].in_use = false;
  nodes_[static_cast<std::size_t>(n.right)].in_use = false;
  n.left = kNone;
  n.right = kNone;
  n.rule = SplitRule{};
  n.value = value;
}

std::vector<DecisionTree::NodeId> DecisionTree::leaves() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (nodes_[i].is_leaf() && alive(id)) out.push_back(id);
  }
  return out;
}

std::vector<DecisionTree::NodeId> DecisionTree::internal_nodes() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!nodes_[i].is_leaf() && alive(id)) out.push_back(id);
  }
  return out;
}

std::vector<DecisionTree::NodeId> DecisionTree::prunable_nodes() const {
  std::vector<NodeId> out;
  for (NodeId id : internal_nodes()) {
    const Node& n = node(id);
    if (node(n.left).is_leaf() && node(n.right).is_leaf()) out.push_back(id);
  }
  return out;
}

std::size_t DecisionTree::leaf_count() const { return (node_count() + 1) / 2; }

int DecisionTree::max_depth() const {
  int depth = 0;
  for (NodeId id : leaves()) depth = std::max(depth, node(id).depth);
  return depth;
}

bool DecisionTree::is_ancestor_or_self(NodeId ancestor, NodeId id) const {
  while (id != kNone) {
    if (id == ancestor) return true;
    id = node(id).parent;
  }
  return false;
}

DecisionTree::NodeId DecisionTree::find_leaf(const Eigen::MatrixXd& X, Eigen::Index row) const {
  NodeId id = root();
  while (!node(id).is_leaf()) {
    const Node& n = node(id);
    id = n.rule.goes_left(X(row, n.rule.variable)) ? n.left : n.right;
  }
  return id;
}

std::vector<DecisionTree::PreorderEntry> DecisionTree::preorder() const {
  std::vector<PreorderEntry> out;
  out.reserve(node_count());
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& n = node(id);
    if (n.is_leaf()) {
      out.push_back({false, SplitRule{}, n.value});
    } else {
      out.push_back({true, n.rule, 0.0});
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return out;
}

DecisionTree DecisionTree::from_preorder(std::size_t dimension, std::span<const PreorderEntry> entries) {
  if (entries.empty()) throw DataError("empty tree record");
  DecisionTree tree(dimension);
  std::size_t pos = 0;
  // Explicit stack of leaves still waiting for their preorder entry.
  std::vector<NodeId> pending{tree.root()};
  while (!pending.empty()) {
    if (pos >= entries.size()) throw DataError("truncated tree record");
    const NodeId id = pending.back();
    pending.pop_back();
    const PreorderEntry& e = entries[pos++];
    if (e.internal) {
      if (e.rule.variable >= dimension) throw DataError("tree record split variable out of range");
      auto [l, r] = tree.split(id, e.rule);
      pending.push_back(r);
      pending.push_back(l);
    } else {
      tree.set_value(id, e.value);
    }
  }
  if (pos != entries.size()) throw DataError("trailing entries in tree record");
  return tree;
}

double assign_leaf(const DecisionTree& tree, std::span<const double> x) {
  if (x.size() != tree.dimension()) {
    throw InvalidArgument("assign_leaf: covariate vector has dimension " + std::to_string(x.size()) +
                          ", tree expects " + std::to_string(tree.dimension()));
  }
  return tree.node(tree.find_leaf(x)).value;
}

double log_tree_structure_prior(const DecisionTree& tree, const TreePrior& prior) {
  double total = 0.0;
  for (auto id : tree.internal_nodes()) total += std::log(prior.split_probability(tree.node(id).depth));
  for (auto id : tree.leaves()) total += std::log1p(-prior.split_probability(tree.node(id).depth));
  return total;
}

DecisionTree sample_tree_from_prior(const TreePrior& prior, std::size_t dimension, Rng& rng, int max_depth) {
  prior.validate();
  if (dimension == 0) throw InvalidArgument("sample_tree_from_prior: dimension must be positive");
  DecisionTree tree(dimension);
  std::vector<DecisionTree::NodeId> frontier{tree.root()};
  while (!frontier.empty()) {
    const auto id = frontier.back();
    frontier.pop_back();
    const int depth = tree.node(id).depth;
    if (depth >= max_depth || rng.uniform() >= prior.split_probability(depth)) continue;
    SplitRule rule;
    rule.variable = static_cast<std::uint32_t>(rng.index(dimension));
    rule.cutpoint = rng.uniform();
    auto [l, r] = tree.split(id, rule);
    frontier.push_back(r);
    frontier.push_back(l);
  }
  return tree;
}

}  // namespace bcmf
