#pragma once
// Plain single-forest BART, used for the propensity score and mediator
// regressions that feed the clever covariates.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "bcmf/forest.hpp"

namespace bcmf {

class Rng;

struct BartConfig {
  ForestParams forest{50, TreePrior{0.95, 2.0}, 2.0};
  std::size_t burn_in = 500;
  std::size_t n_samples = 500;
  double noise_nu = 3.0;
  double noise_quantile = 0.90;

  void validate() const;
};

// Kept posterior forests on the internal scale.
// Continuous: E[y | x] = center + scale * f(x).  Probit: P(y = 1 | x) = Phi(center + f(x)).
struct BartModel {
  bool probit = false;
  double center = 0.0;
  double scale = 1.0;
  std::size_t dimension = 0;
  std::vector<Forest> draws;

  // Posterior mean of E[y | x] (a probability for probit models), averaged in draw order.
  std::vector<double> mean_response(const Eigen::MatrixXd& X) const;
};

BartModel fit_bart(std::span<const double> y, const Eigen::MatrixXd& X, bool binary, const BartConfig& cfg, Rng& rng);

}  // namespace bcmf
