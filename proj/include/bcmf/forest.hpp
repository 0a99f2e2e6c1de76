#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bcmf/covariates.hpp"
#include "bcmf/tree.hpp"
#include "bcmf/tree_mcmc.hpp"

namespace bcmf {

class Rng;

struct ForestParams {
  std::size_t trees = 200;
  TreePrior prior{};
  double k = 2.0;

  // sigma_mu = 3 / (k sqrt(m))
  double leaf_sd() const;
  void validate() const;
};

// A fixed sum-of-trees function.
struct Forest {
  std::vector<DecisionTree> trees;
  double leaf_sd = 0.0;
  TreePrior tree_prior{};
};

double evaluate_forest(const Forest& forest, std::span<const double> x);
// out[i] = sum_j g(X_i; T_j, M_j), accumulated in tree order.
void evaluate_forest(const Forest& forest, const Eigen::MatrixXd& X, std::span<double> out);
std::vector<double> evaluate_forest(const Forest& forest, const Eigen::MatrixXd& X);

// Sampler state for one sum-of-trees function on a fixed training design.
// Keeps per-tree fitted vectors so partial residuals cost O(n) per tree.
class ForestSampler {
 public:
  using Observer = std::function<void(std::size_t tree, std::span<const double> residual,
                                      std::span<const double> total, std::span<const double> own)>;

  ForestSampler(const ForestParams& params, std::shared_ptr<const CovariateIndex> covariates);

  // One backfitting pass over all trees for y_i = s_i f(x_i) + e_i.
  // Afterwards fit() is recomputed from the per-tree fits.
  void sweep(std::span<const double> y, std::span<const double> scale, double noise_var, Rng& rng);

  std::span<const double> fit() const { return total_; }
  std::span<const double> tree_fit(std::size_t j) const { return tree_fit_[j]; }
  const RoutedTree& tree(std::size_t j) const { return trees_[j]; }
  std::size_t size() const { return trees_.size(); }
  const ForestParams& params() const { return params_; }
  const MoveCounts& move_counts() const { return counts_; }
  const CovariateIndex& covariates() const { return *covariates_; }

  Forest snapshot() const;
  // Current sum of trees at new rows, accumulated in tree order like evaluate_forest.
  void predict(const Eigen::MatrixXd& X, std::span<double> out) const;

  // Leaf values only; tree shapes stay fixed.
  void set_structure_frozen(bool frozen) { frozen_ = frozen; }
  // Called with each tree's partial residual before its update.
  void set_observer(Observer observer) { observer_ = std::move(observer); }

 private:
  void refresh_tree_fit(std::size_t j, std::vector<double>& out) const;

  ForestParams params_;
  std::shared_ptr<const CovariateIndex> covariates_;
  std::vector<RoutedTree> trees_;
  std::vector<std::vector<double>> tree_fit_;
  std::vector<double> total_;
  std::vector<double> residual_, sr_, ss_, fresh_;
  MoveWorkspace ws_;
  MoveCounts counts_;
  bool frozen_ = false;
  Observer observer_;
};

inline void backfit_sweep(ForestSampler& forest, std::span<const double> y, std::span<const double> scale,
                          double noise_var, Rng& rng) {
  forest.sweep(y, scale, noise_var, rng);
}

}  // namespace bcmf
