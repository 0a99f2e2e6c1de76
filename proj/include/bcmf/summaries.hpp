#pragma once
// Interpretable projections of a posterior effect surface: a single
// least-squares regression tree and a penalized additive spline model, each
// scored by the summary R^2.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcmf/mediation.hpp"

namespace bcmf {

struct RSquared {
  double value = 0.0;
  bool degenerate = false;  // zero variance in values; value is then 0
};

// 1 - sum (v - f)^2 / sum (v - mean(v))^2
RSquared summary_r_squared(std::span<const double> values, std::span<const double> fitted);

struct CartSummaryConfig {
  std::size_t max_depth = 3;
  std::optional<std::size_t> min_leaf;  // default max(20, n / 100)

  std::size_t resolved_min_leaf(std::size_t n) const;
  void validate() const;
};

struct CartNode {
  int variable = -1;  // -1 for a leaf
  double cutpoint = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;
  double value = 0.0;  // mean of the node's values
  std::size_t count = 0;
  int leaf_id = -1;

  bool is_leaf() const { return variable < 0; }
};

struct CartTree {
  std::vector<CartNode> nodes;  // nodes[0] is the root
  std::size_t leaves = 0;

  int leaf_of(const Eigen::MatrixXd& X, Eigen::Index row) const;
  double predict(const Eigen::MatrixXd& X, Eigen::Index row) const;
};

struct CartSummary {
  CartTree tree;
  std::vector<double> fitted;
  std::vector<int> leaf_of;  // leaf id per row, usable as subgroup labels
  RSquared r_squared;
};

// Greedy SSE-minimizing recursive partitioning. Cutpoints are observed values
// (x <= cut goes left); ties go to the lowest variable, then lowest cutpoint.
CartSummary cart_projection(std::span<const double> values, const Eigen::MatrixXd& X, const CartSummaryConfig& cfg);

struct AdditiveSummaryConfig {
  std::size_t knots_per_covariate = 10;
  double penalty_lambda = 1.0;
  std::size_t max_backfit_iters = 200;
  double convergence_tol = 1e-8;

  void validate() const;
};

// Centered component gamma_j(x_j). Splines are cubic B-splines; 0/1 columns
// are ridge-penalized level effects.
struct AdditiveComponent {
  enum class Kind { kSpline, kLevels, kConstant };
  Kind kind = Kind::kConstant;
  int variable = 0;
  std::vector<double> knots;  // full knot vector for splines
  Eigen::VectorXd coef;       // basis coefficients, or (level 0, level 1)
  double shift = 0.0;         // subtracted so the component sums to 0 over the sample

  double operator()(double x) const;
};

struct AdditiveSummary {
  double intercept = 0.0;
  std::vector<AdditiveComponent> components;  // one per covariate
  std::vector<double> fitted;
  RSquared r_squared;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> objective;  // SSE + penalty after each cycle
};

AdditiveSummary additive_projection(std::span<const double> values, const Eigen::MatrixXd& X,
                                    const AdditiveSummaryConfig& cfg);

// Cubic B-spline basis (rows = x values) for a clamped knot vector.
Eigen::MatrixXd bspline_basis(std::span<const double> x, std::span<const double> knots);

enum class SummaryMethod { kCart, kGam };
SummaryMethod parse_summary_method(const std::string& text);

// Component curves on a per-covariate grid, one row per posterior draw.
struct ComponentBands {
  int variable = 0;
  std::vector<double> grid;
  std::vector<double> reference;  // surrogate fitted to the posterior mean
  DrawMatrix draws;               // draws x grid
};

struct SummaryDistribution {
  SummaryMethod method = SummaryMethod::kCart;
  std::vector<double> r_squared;  // one per posterior draw
  std::size_t degenerate_draws = 0;
  std::size_t unconverged_draws = 0;
  double reference_r_squared = 0.0;  // surrogate fitted to the posterior mean surface
  std::optional<CartSummary> reference_cart;
  std::optional<AdditiveSummary> reference_gam;
  std::vector<ComponentBands> bands;  // GAM only
};

SummaryDistribution posterior_summary_distribution(const DrawMatrix& effect_draws, const Eigen::MatrixXd& X,
                                                   SummaryMethod method, const CartSummaryConfig& cart_cfg = {},
                                                   const AdditiveSummaryConfig& gam_cfg = {},
                                                   std::size_t grid_points = 50);

// Indented if/else rendering; names may be empty.
std::string format_cart_tree(const CartTree& tree, const std::vector<std::string>& names);

}  // namespace bcmf
