#pragma once
// Binary decision trees and the depth-dependent tree-structure prior.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bcmf {

class Rng;

// x[variable] <= cutpoint goes left.
struct SplitRule {
  std::uint32_t variable = 0;
  double cutpoint = 0.0;

  bool goes_left(double x) const { return x <= cutpoint; }
  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

// P(node at depth d is internal) = alpha * (1 + d)^(-beta).
struct TreePrior {
  double alpha = 0.95;
  double beta = 2.0;

  double split_probability(int depth) const;
  void validate() const;
};

class DecisionTree {
 public:
  using NodeId = int;
  static constexpr NodeId kNone = -1;

  struct Node {
    NodeId parent = kNone;
    NodeId left = kNone;
    NodeId right = kNone;
    int depth = 0;
    SplitRule rule;
    double value = 0.0;
    bool in_use = true;

    bool is_leaf() const { return left == kNone; }
  };

  // Flattened node for serialization, in preorder.
  struct PreorderEntry {
    bool internal = false;
    SplitRule rule;
    double value = 0.0;
    friend bool operator==(const PreorderEntry&, const PreorderEntry&) = default;
  };

  explicit DecisionTree(std::size_t dimension, double root_value = 0.0);

  std::size_t dimension() const { return dimension_; }
  NodeId root() const { return 0; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }

  void set_value(NodeId leaf, double value);
  void set_rule(NodeId internal, SplitRule rule);

  // Turns `leaf` into an internal node with two fresh leaves.
  std::pair<NodeId, NodeId> split(NodeId leaf, SplitRule rule, double left_value = 0.0,
                                  double right_value = 0.0);
  // Removes the two leaf children of `internal`; it becomes a leaf.
  void collapse(NodeId internal, double value = 0.0);

  std::vector<NodeId> leaves() const;
  std::vector<NodeId> internal_nodes() const;
  // Internal nodes whose children are both leaves.
  std::vector<NodeId> prunable_nodes() const;
  std::size_t leaf_count() const;
  std::size_t node_count() const { return nodes_.size() - free_.size(); }
  // Upper bound on node ids; sizes per-node scratch arrays.
  std::size_t id_bound() const { return nodes_.size(); }
  int max_depth() const;

  bool is_ancestor_or_self(NodeId ancestor, NodeId node) const;

  template <class Row>
  NodeId find_leaf(const Row& x) const {
    NodeId id = root();
    while (!node(id).is_leaf()) {
      const Node& n = node(id);
      id = n.rule.goes_left(x[n.rule.variable]) ? n.left : n.right;
    }
    return id;
  }

  // Leaf reached by row `row` of a column-major matrix.
  NodeId find_leaf(const Eigen::MatrixXd& X, Eigen::Index row) const;

  std::vector<PreorderEntry> preorder() const;
  static DecisionTree from_preorder(std::size_t dimension, std::span<const PreorderEntry> entries);

 private:
  NodeId allocate(NodeId parent, int depth, double value);
  bool alive(NodeId id) const;

  std::size_t dimension_;
  std::vector<Node> nodes_;
  std::vector<NodeId> free_;
};

// Leaf value of the unique leaf containing x. Throws on dimension mismatch.
double assign_leaf(const DecisionTree& tree, std::span<const double> x);

// Sum over internal nodes of log[alpha (1+d)^-beta] plus sum over leaves of
// log[1 - alpha (1+d)^-beta]. Split-rule probabilities are not included.
double log_tree_structure_prior(const DecisionTree& tree, const TreePrior& prior);

// Generative draw from the structure prior: every node at depth d splits with
// probability alpha (1+d)^-beta. Rules pick a uniform variable and a uniform
// cutpoint in [0, 1); leaves are 0. Depth is capped at `max_depth`.
DecisionTree sample_tree_from_prior(const TreePrior& prior, std::size_t dimension, Rng& rng,
                                    int max_depth = 32);

}  // namespace bcmf
