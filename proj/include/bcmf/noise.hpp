#pragma once

#include <span>

#include <Eigen/Core>

namespace bcmf {

class Rng;

// Scaled-inverse-chi-squared prior: sigma^2 ~ nu * lambda / chi^2_nu.
struct NoisePrior {
  double nu = 3.0;
  double lambda = 1.0;

  void validate() const;
};

// sigma^2 | SSE ~ (nu lambda + SSE) / chi^2_{nu + n}
double sample_noise_var(double sse, std::size_t n, const NoisePrior& prior, Rng& rng);

// SSE = sum (y_i - s_i fit_i)^2
double sample_noise_var(std::span<const double> y, std::span<const double> scale, std::span<const double> fit,
                        const NoisePrior& prior, Rng& rng);

// Chooses lambda so that Pr(sigma < sigma_hat) = quantile under the prior,
// where sigma_hat is the residual sd of a least-squares fit of y on [1, X].
// Falls back to the sample variance of y when that fit is degenerate.
NoisePrior calibrate_noise_prior(std::span<const double> y, const Eigen::MatrixXd& X, double nu = 3.0,
                                 double quantile = 0.90);

}  // namespace bcmf
