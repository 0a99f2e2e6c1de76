#include "bcmf/forest.hpp"

#include <cmath>
#include <string>

#include "bcmf/error.hpp"
#include "bcmf/random.hpp"
#include "bcmf/simd/kernels.hpp"

namespace bcmf {

double ForestParams::leaf_sd() const { return 3.0 / (k * std::sqrt(static_cast<double>(trees))); }

void ForestParams::validate() const {
  if (trees < 1) throw ConfigError("forest needs at least one tree");
  if (!(k > 0.0)) throw ConfigError("forest leaf scale k must be positive");
  prior.validate();
}

double evaluate_forest(const Forest& forest, std::span<const double> x) {
  double total = 0.0;
  for (const auto& tree : forest.trees) total += assign_leaf(tree, x);
  return total;
}

void evaluate_forest(const Forest& forest, const Eigen::MatrixXd& X, std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(X.rows())) throw InvalidArgument("evaluate_forest: output length");
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& tree : forest.trees) {
    if (tree.dimension() != static_cast<std::size_t>(X.cols())) {
      throw InvalidArgument("evaluate_forest: matrix has " + std::to_string(X.cols()) + " columns, tree expects " +
                            std::to_string(tree.dimension()));
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] += tree.node(tree.find_leaf(X, i)).value;
  }
}

std::vector<double> evaluate_forest(const Forest& forest, const Eigen::MatrixXd& X) {
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  evaluate_forest(forest, X, out);
  return out;
}

ForestSampler::ForestSampler(const ForestParams& params, std::shared_ptr<const CovariateIndex> covariates)
    : params_(params), covariates_(std::move(covariates)) {
  params_.validate();
  const std::size_t n = covariates_->rows();
  trees_.reserve(params_.trees);
  for (std::size_t j = 0; j < params_.trees; ++j) trees_.emplace_back(DecisionTree(covariates_->cols()), *covariates_);
  tree_fit_.assign(params_.trees, std::vector<double>(n, 0.0));
  total_.assign(n, 0.0);
  residual_.resize(n);
  sr_.resize(n);
  ss_.resize(n);
  fresh_.resize(n);
}

void ForestSampler::predict(const Eigen::MatrixXd& X, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(X.rows())) throw InvalidArgument("forest predict: output length");
  if (static_cast<std::size_t>(X.cols()) != covariates_->cols()) {
    throw InvalidArgument("forest predict: matrix has " + std::to_string(X.cols()) + " columns, forest expects " +
                          std::to_string(covariates_->cols()));
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& routed : trees_) {
    const auto& tree = routed.tree;
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] += tree.node(tree.find_leaf(X, i)).value;
  }
}

void ForestSampler::refresh_tree_fit(std::size_t j, std::vector<double>& out) const {
  const auto& routed = trees_[j];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = routed.tree.node(routed.leaf_of[i]).value;
}

void ForestSampler::sweep(std::span<const double> y, std::span<const double> scale, double noise_var, Rng& rng) {
  const std::size_t n = total_.size();
  if (y.size() != n || scale.size() != n) throw InvalidArgument("backfit sweep: vector lengths disagree with design");
  if (!(noise_var > 0.0)) throw InvalidArgument("backfit sweep: noise variance must be positive");
  const auto& k = simd::active();
  const double leaf_var = params_.leaf_sd() * params_.leaf_sd();
  k.multiply(scale, scale, ss_);
  for (std::size_t j = 0; j < trees_.size(); ++j) {
    k.partial_residual(y, scale, total_, tree_fit_[j], residual_);
    if (observer_) observer_(j, residual_, total_, tree_fit_[j]);
    k.multiply(scale, residual_, sr_);
    if (!frozen_) {
      counts_.record(propose_structure_move(trees_[j], sr_, ss_, *covariates_, params_.prior, noise_var, leaf_var,
                                            rng, ws_));
    }
    draw_leaf_values(trees_[j], sr_, ss_, noise_var, leaf_var, rng, ws_);
    refresh_tree_fit(j, fresh_);
    k.replace_component(total_, fresh_, tree_fit_[j]);
    tree_fit_[j].swap(fresh_);
  }
  // Recompute from scratch in tree order so the cache never drifts.
  std::fill(total_.begin(), total_.end(), 0.0);
  for (const auto& f : tree_fit_) {
    for (std::size_t i = 0; i < n; ++i) total_[i] += f[i];
  }
}

Forest ForestSampler::snapshot() const {
  Forest forest;
  forest.leaf_sd = params_.leaf_sd();
  forest.tree_prior = params_.prior;
  forest.trees.reserve(trees_.size());
  for (const auto& routed : trees_) forest.trees.push_back(routed.tree);
  return forest;
}

}  // namespace bcmf
