#pragma once
// The mediation sampler: a varying-coefficient outcome forest model
//   Y = mu(x) + A zeta(x) + M d(x) + e,   e ~ N(0, sigma^2)
// and a causal-forest mediator model
//   M = mu_m(x) + A tau_m(x) + v,          v ~ N(0, sigma_m^2)
// with probit links for binary outcome / mediator.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bcmf/bart.hpp"
#include "bcmf/data.hpp"
#include "bcmf/forest.hpp"

namespace bcmf {

class Rng;

struct NoisePriorConfig {
  double nu = 3.0;
  double quantile = 0.90;        // Pr(sigma < residual sd) under the prior
  std::optional<double> lambda;  // overrides the calibration when set

  void validate() const;
};

struct BCMFConfig {
  ForestParams mu{200, TreePrior{0.95, 2.0}, 2.0};
  ForestParams zeta{20, TreePrior{0.5, 2.0}, 2.0};
  ForestParams d{20, TreePrior{0.5, 2.0}, 2.0};
  ForestParams mu_m{200, TreePrior{0.95, 2.0}, 2.0};
  ForestParams tau_m{20, TreePrior{0.5, 2.0}, 2.0};
  std::size_t burn_in = 2500;
  std::size_t n_samples = 2500;
  std::size_t n_chains = 2;
  std::uint64_t seed = 0;
  VariableKind outcome_kind = VariableKind::kContinuous;
  VariableKind mediator_kind = VariableKind::kContinuous;
  NoisePriorConfig outcome_noise;
  NoisePriorConfig mediator_noise;
  BartConfig auxiliary;
  bool store_forests = false;

  void validate() const;
};

struct CleverCovariates {
  std::vector<double> pi_hat;
  std::vector<double> m0_hat;
  std::vector<double> m1_hat;
};

// Propensity model on X; mediator model on [X, A].
struct AuxiliaryModels {
  BartModel propensity;
  BartModel mediator;
};

// Arms with fewer observations than this are rejected.
inline constexpr std::size_t kMinArmSize = 10;

CleverCovariates build_clever_covariates(const MediationData& data, const BCMFConfig& cfg, Rng& rng,
                                         AuxiliaryModels* models = nullptr);
CleverCovariates clever_covariates_for(const AuxiliaryModels& models, const Eigen::MatrixXd& X);

// [X, pi_hat, m0_hat, m1_hat] and [X, pi_hat].
Eigen::MatrixXd outcome_design(const Eigen::MatrixXd& X, const CleverCovariates& clever);
Eigen::MatrixXd mediator_design(const Eigen::MatrixXd& X, const CleverCovariates& clever);

// Internal response = (value - center) / scale. For a binary outcome the
// center is the probit offset and the scale is 1. Outcome-side mediator
// values use (m_center, m_scale); the mediator model itself uses
// (mm_center, mm_scale), which differ only for a binary mediator.
struct Standardization {
  double y_center = 0.0;
  double y_scale = 1.0;
  double m_center = 0.0;
  double m_scale = 1.0;
  double mm_center = 0.0;
  double mm_scale = 1.0;
};

Standardization make_standardization(const MediationData& data, VariableKind outcome_kind,
                                     VariableKind mediator_kind);

// Mediator values as they enter the outcome model (the scale vector of the d forest).
std::vector<double> outcome_side_mediator(const MediationData& data, const Standardization& st);

using DrawMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// draws x rows, original outcome / mediator scale (latent scale for a binary mediator model).
struct FunctionDraws {
  DrawMatrix mu, zeta, d, mu_m, tau_m;

  void resize(std::size_t draws, std::size_t rows);
  std::size_t draws() const { return static_cast<std::size_t>(mu.rows()); }
  std::size_t rows() const { return static_cast<std::size_t>(mu.cols()); }
};

enum FunctionIndex : std::size_t { kMu = 0, kZeta, kD, kMuM, kTauM };

struct StoredForests {
  std::vector<std::array<Forest, 5>> draws;  // internal scale, indexed by FunctionIndex
  AuxiliaryModels auxiliary;
};

struct MediationFit {
  BCMFConfig config;
  Standardization standardization;
  std::size_t n_chains = 0;
  std::size_t n_samples = 0;
  FunctionDraws train;
  std::optional<FunctionDraws> test;
  std::vector<double> sigma2;    // original scale, 1 for a binary outcome
  std::vector<double> sigma2_m;  // original scale, 1 for a binary mediator
  CleverCovariates clever;
  std::optional<StoredForests> forests;

  std::size_t draws() const { return train.draws(); }
  std::size_t chain_of(std::size_t draw) const { return draw / n_samples; }
};

// Runs cfg.n_chains chains concurrently. Rows of X_test, if given, are
// evaluated at every kept draw.
MediationFit fit_bcmf(const MediationData& data, const BCMFConfig& cfg, const Eigen::MatrixXd* X_test = nullptr);

FunctionDraws predict_functions(const MediationFit& fit, const Eigen::MatrixXd& X_new);

}  // namespace bcmf
