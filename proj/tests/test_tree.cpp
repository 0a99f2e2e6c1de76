#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "bcmf/error.hpp"
#include "bcmf/forest.hpp"
#include "bcmf/random.hpp"
#include "bcmf/tree.hpp"

using namespace bcmf;

TEST_CASE("assign_leaf on a root-only tree returns the root value") {
  DecisionTree tree(3, 0.7);
  const std::vector<double> x{5.0, -1.0, 2.0};
  CHECK(assign_leaf(tree, x) == 0.7);
}

TEST_CASE("assign_leaf follows the x <= cutpoint goes left convention") {
  DecisionTree tree(2);
  auto [l, r] = tree.split(tree.root(), {0, 0.5}, -1.0, 1.0);
  (void)l;
  (void)r;
  CHECK(assign_leaf(tree, std::vector<double>{0.3, 9.0}) == -1.0);
  CHECK(assign_leaf(tree, std::vector<double>{0.5, 9.0}) == -1.0);
  CHECK(assign_leaf(tree, std::vector<double>{0.51, 9.0}) == 1.0);
}

TEST_CASE("assign_leaf rejects a dimension mismatch") {
  DecisionTree tree(2);
  CHECK_THROWS_AS(assign_leaf(tree, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("depth-2 tree matches exhaustive path enumeration on a grid") {
  // x0 <= 0.5 ? (x1 <= 0.5 ? 1 : 2) : (x1 <= 0.25 ? 3 : 4)
  DecisionTree tree(2);
  auto [l, r] = tree.split(tree.root(), {0, 0.5});
  tree.split(l, {1, 0.5}, 1.0, 2.0);
  tree.split(r, {1, 0.25}, 3.0, 4.0);
  const auto oracle = [](double x0, double x1) {
    if (x0 <= 0.5) return x1 <= 0.5 ? 1.0 : 2.0;
    return x1 <= 0.25 ? 3.0 : 4.0;
  };
  for (double x0 : {0.0, 1.0}) {
    for (double x1 : {0.0, 1.0}) {
      CHECK(assign_leaf(tree, std::vector<double>{x0, x1}) == oracle(x0, x1));
    }
  }
}

TEST_CASE("evaluate_forest sums tree outputs") {
  Forest forest;
  for (double v : {0.1, -0.2, 0.4}) forest.trees.emplace_back(1, v);
  CHECK(evaluate_forest(forest, std::vector<double>{0.0}) == doctest::Approx(0.3));

  Forest single;
  DecisionTree t(1);
  t.split(t.root(), {0, 0.0}, -2.0, 5.0);
  single.trees.push_back(t);
  CHECK(evaluate_forest(single, std::vector<double>{1.0}) == assign_leaf(t, std::vector<double>{1.0}));
}

TEST_CASE("random forest evaluation equals independent per-tree summation") {
  Rng rng(5);
  Forest forest;
  const TreePrior prior{0.95, 1.0};
  for (int j = 0; j < 10; ++j) {
    DecisionTree t = sample_tree_from_prior(prior, 3, rng);
    for (auto leaf : t.leaves()) t.set_value(leaf, rng.normal());
    forest.trees.push_back(t);
  }
  Eigen::MatrixXd X(20, 3);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
  const auto batch = evaluate_forest(forest, X);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double oracle = 0.0;
    for (const auto& t : forest.trees) {
      // walk the preorder list independently of find_leaf
      const auto entries = t.preorder();
      std::size_t pos = 0;
      std::function<double()> walk = [&]() -> double {
        const auto& e = entries[pos++];
        if (!e.internal) return e.value;
        const bool left = X(i, e.rule.variable) <= e.rule.cutpoint;
        // left subtree is next in preorder; skip it when going right
        if (left) return walk();
        std::function<void()> skip = [&]() {
          const auto& s = entries[pos++];
          if (s.internal) {
            skip();
            skip();
          }
        };
        skip();
        return walk();
      };
      oracle += walk();
    }
    CHECK(batch[static_cast<std::size_t>(i)] == doctest::Approx(oracle).epsilon(1e-14));
  }
}

TEST_CASE("log tree structure prior") {
  const TreePrior prior{0.95, 2.0};
  DecisionTree root(1);
  CHECK(log_tree_structure_prior(root, prior) == doctest::Approx(std::log(0.05)));
  CHECK(log_tree_structure_prior(root, prior) == doctest::Approx(-2.9957).epsilon(1e-4));

  DecisionTree split(1);
  split.split(split.root(), {0, 0.0});
  const double expected = std::log(0.95) + 2.0 * std::log(1.0 - 0.95 / 4.0);
  CHECK(log_tree_structure_prior(split, prior) == doctest::Approx(expected).epsilon(1e-14));
  // log(0.95 * 0.7625^2) = -0.59360, quoted to four places elsewhere as -0.5934
  CHECK(std::abs(log_tree_structure_prior(split, prior) - (-0.5934)) < 5e-4);

  // alpha -> 0 drives any split tree's prior down without bound
  double previous = 0.0;
  for (double alpha : {1e-1, 1e-3, 1e-6, 1e-9}) {
    const double v = log_tree_structure_prior(split, TreePrior{alpha, 2.0});
    CHECK(v < previous);
    previous = v;
  }
  CHECK(previous < -20.0);
}

TEST_CASE("tree prior validation") {
  CHECK_THROWS_AS(TreePrior({1.0, 2.0}).validate(), ConfigError);
  CHECK_THROWS_AS(TreePrior({0.5, -1.0}).validate(), ConfigError);
  CHECK_NOTHROW(TreePrior({0.5, 0.0}).validate());
}

TEST_CASE("preorder serialization reproduces structure and values") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    DecisionTree t = sample_tree_from_prior(TreePrior{0.9, 0.5}, 4, rng, 6);
    for (auto leaf : t.leaves()) t.set_value(leaf, rng.normal());
    const auto entries = t.preorder();
    const DecisionTree back = DecisionTree::from_preorder(4, entries);
    CHECK(back.preorder() == entries);
    CHECK(back.leaf_count() == t.leaf_count());
  }
}

TEST_CASE("malformed preorder records are rejected") {
  std::vector<DecisionTree::PreorderEntry> truncated{{true, {0, 0.5}, 0.0}, {false, {}, 1.0}};
  CHECK_THROWS_AS(DecisionTree::from_preorder(1, truncated), DataError);
  std::vector<DecisionTree::PreorderEntry> bad_var{{true, {3, 0.5}, 0.0}, {false, {}, 1.0}, {false, {}, 1.0}};
  CHECK_THROWS_AS(DecisionTree::from_preorder(1, bad_var), DataError);
}

TEST_CASE("split and collapse keep every internal node binary") {
  DecisionTree t(2);
  auto [l, r] = t.split(t.root(), {0, 0.5});
  auto [ll, lr] = t.split(l, {1, 0.1});
  (void)ll;
  (void)lr;
  CHECK(t.leaf_count() == 3);
  CHECK(t.prunable_nodes() == std::vector<DecisionTree::NodeId>{l});
  t.collapse(l);
  CHECK(t.leaf_count() == 2);
  CHECK(t.node(t.root()).left == l);
  CHECK(t.node(r).is_leaf());
  CHECK_THROWS_AS(t.collapse(r), InvalidArgument);
  // reused slots after collapse
  t.split(r, {1, 0.2});
  CHECK(t.node_count() == 5);
}

TEST_CASE("prior sampling frequencies") {
  Rng rng(2024);
  const TreePrior prior{0.95, 2.0};
  const int draws = 10000;
  int root_split = 0;
  int depth1_nodes = 0, depth1_split = 0;
  for (int i = 0; i < draws; ++i) {
    const DecisionTree t = sample_tree_from_prior(prior, 2, rng);
    if (!t.node(t.root()).is_leaf()) {
      ++root_split;
      for (auto child : {t.node(t.root()).left, t.node(t.root()).right}) {
        ++depth1_nodes;
        if (!t.node(child).is_leaf()) ++depth1_split;
      }
    }
  }
  const double root_frac = root_split / static_cast<double>(draws);
  CHECK(std::abs(root_frac - 0.95) <= 3.0 * std::sqrt(0.95 * 0.05 / draws));
  const double p1 = 0.95 / 4.0;
  const double d1_frac = depth1_split / static_cast<double>(depth1_nodes);
  CHECK(std::abs(d1_frac - p1) <= 3.0 * std::sqrt(p1 * (1 - p1) / depth1_nodes));
}
