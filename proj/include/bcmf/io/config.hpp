#pragma once
// YAML run configuration. Every section is optional; unknown keys are an
// error so that typos do not silently fall back to defaults.
//
//   data:      path, delimiter, outcome, treatment, mediator, covariates,
//              categorical, outcome_kind, mediator_kind
//   model:     burn_in, n_samples, chains, store_forests,
//              forests: {mu, zeta, d, mu_m, tau_m: {trees, alpha, beta, k}},
//              outcome_noise / mediator_noise: {nu, quantile, lambda},
//              auxiliary: {trees, alpha, beta, k, burn_in, n_samples}
//   summary:   cart: {max_depth, min_leaf}, gam: {knots, lambda, max_iters, tol},
//              grid_points
//   study:     truths: [{kind, homogeneous, null_effects, sigma_y, sigma_m}],
//              methods, n_train, n_test, replications, bootstrap, threads,
//              dynamic_cart: {max_depth, min_leaf}, model: <as above>

#include <optional>
#include <string>

#include "bcmf/io/table.hpp"
#include "bcmf/mediation.hpp"
#include "bcmf/simulation.hpp"
#include "bcmf/summaries.hpp"

namespace bcmf::io {

struct RunConfig {
  std::optional<DataSpec> data;
  BCMFConfig model;
  CartSummaryConfig cart;
  AdditiveSummaryConfig gam;
  std::size_t grid_points = 50;
  StudySpec study;
};

// Throws ConfigError naming the offending key path.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& yaml_text);

}  // namespace bcmf::io
