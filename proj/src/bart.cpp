#include "bcmf/bart.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "bcmf/error.hpp"
#include "bcmf/noise.hpp"
#include "bcmf/numeric.hpp"
#include "bcmf/probit.hpp"
#include "bcmf/random.hpp"

namespace bcmf {

void BartConfig::validate() const {
  forest.validate();
  if (n_samples < 1) throw ConfigError("auxiliary BART needs at least one kept draw");
  if (!(noise_nu > 0.0)) throw ConfigError("auxiliary BART noise_nu must be positive");
  if (!(noise_quantile > 0.0 && noise_quantile < 1.0)) throw ConfigError("auxiliary BART noise_quantile must be in (0, 1)");
}

std::vector<double> BartModel::mean_response(const Eigen::MatrixXd& X) const {
  if (draws.empty()) throw InvalidArgument("BART model has no stored draws");
  const std::size_t n = static_cast<std::size_t>(X.rows());
  std::vector<double> acc(n, 0.0), f(n);
  for (const auto& forest : draws) {
    evaluate_forest(forest, X, f);
    for (std::size_t i = 0; i < n; ++i) acc[i] += probit ? normal_cdf(center + f[i]) : center + scale * f[i];
  }
  const double inv = 1.0 / static_cast<double>(draws.size());
  for (auto& v : acc) v *= inv;
  return acc;
}

BartModel fit_bart(std::span<const double> y, const Eigen::MatrixXd& X, bool binary, const BartConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t n = y.size();
  if (n != static_cast<std::size_t>(X.rows())) throw InvalidArgument("fit_bart: response and design rows differ");
  if (n == 0) throw DataError("fit_bart: no observations");

  BartModel model;
  model.probit = binary;
  model.dimension = static_cast<std::size_t>(X.cols());
  std::vector<double> response(n), ones(n, 1.0);
  NoisePrior noise_prior;
  if (binary) {
    for (double v : y) {
      if (v != 0.0 && v != 1.0) throw DataError("fit_bart: probit response must be 0/1");
    }
    const double rate = std::clamp(mean(y), 0.01, 0.99);
    model.center = normal_quantile(rate);
  } else {
    model.center = mean(y);
    const double sd = std::sqrt(sample_variance(y));
    model.scale = sd > 0.0 ? sd : 1.0;
    for (std::size_t i = 0; i < n; ++i) response[i] = (y[i] - model.center) / model.scale;
    noise_prior = calibrate_noise_prior(response, X, cfg.noise_nu, cfg.noise_quantile);
  }

  ForestSampler forest(cfg.forest, std::make_shared<const CovariateIndex>(X));
  std::vector<double> offset_fit(n);
  double noise_var = 1.0;
  model.draws.reserve(cfg.n_samples);
  for (std::size_t it = 0; it < cfg.burn_in + cfg.n_samples; ++it) {
    if (binary) {
      const auto fit = forest.fit();
      for (std::size_t i = 0; i < n; ++i) offset_fit[i] = model.center + fit[i];
      sample_probit_latents(y, offset_fit, response, rng);
      for (auto& z : response) z -= model.center;
    }
    forest.sweep(response, ones, noise_var, rng);
    if (!binary) noise_var = sample_noise_var(response, ones, forest.fit(), noise_prior, rng);
    if (it >= cfg.burn_in) model.draws.push_back(forest.snapshot());
  }
  return model;
}

}  // namespace bcmf
