#pragma once
// Linear structural equation baseline with treatment and mediator moderated
// by the covariates:
//   M = b0M + x'bM + A (g0M + x'gM) + v
//   Y = b0Y + x'bY + A (g0Y + x'gY) + M (xi0 + x'xi) + e
// zeta(x) = g0Y + x'gY,  delta(x) = (g0M + x'gM)(xi0 + x'xi).

#include <vector>

#include <Eigen/Core>

#include "bcmf/data.hpp"
#include "bcmf/mediation.hpp"

namespace bcmf {

class Rng;

struct LsemFit {
  // [b0Y, bY, g0Y, gY, xi0, xi] and [b0M, bM, g0M, gM]
  Eigen::VectorXd outcome_coef;
  Eigen::VectorXd mediator_coef;
  Eigen::VectorXd outcome_fitted, mediator_fitted;
  Eigen::VectorXd outcome_resid, mediator_resid;
  bool ridge = false;  // a design was rank deficient and the 1e-6 ridge was used
  std::size_t covariates = 0;

  std::vector<double> zeta(const Eigen::MatrixXd& X) const;
  std::vector<double> delta(const Eigen::MatrixXd& X) const;
};

inline constexpr double kLsemRidge = 1e-6;

Eigen::MatrixXd lsem_outcome_design(const Eigen::MatrixXd& X, std::span<const double> a, std::span<const double> m);
Eigen::MatrixXd lsem_mediator_design(const Eigen::MatrixXd& X, std::span<const double> a);

LsemFit fit_lsem(const MediationData& data);

struct LsemBootstrap {
  std::vector<double> zeta_hat, delta_hat;       // point estimates at the evaluation rows
  double zeta_bar_hat = 0.0, delta_bar_hat = 0.0;  // averaged over the training rows
  DrawMatrix zeta, delta;                        // B x evaluation rows
  std::vector<double> zeta_bar, delta_bar;       // B
  std::size_t ridge_refits = 0;
};

// Resamples centered residuals of both equations, regenerates M then Y with
// X and A fixed, and refits. Effects are evaluated at `X_eval` (the training
// covariates when null).
LsemBootstrap lsem_residual_bootstrap(const MediationData& data, std::size_t B, Rng& rng,
                                      const Eigen::MatrixXd* X_eval = nullptr);

}  // namespace bcmf
