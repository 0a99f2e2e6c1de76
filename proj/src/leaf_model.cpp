#include "bcmf/leaf_model.hpp"

#include <cmath>
#include <numbers>

#include "bcmf/error.hpp"

namespace bcmf {

namespace {
void check_variances(double noise_var, double leaf_var) {
  if (!(noise_var > 0.0) || !(leaf_var > 0.0)) throw InvalidArgument("leaf model variances must be positive");
}
}  // namespace

double leaf_log_evidence(double sum_sr, double sum_ss, double noise_var, double leaf_var) {
  const double precision = sum_ss / noise_var + 1.0 / leaf_var;
  const double b = sum_sr / noise_var;
  return -0.5 * std::log1p(leaf_var * sum_ss / noise_var) + 0.5 * b * b / precision;
}

double leaf_log_marginal(const LeafStats& stats, double noise_var, double leaf_var) {
  check_variances(noise_var, leaf_var);
  if (stats.sum_ss < 0.0) throw InvalidArgument("leaf_log_marginal: sum of squared scales is negative");
  const double n = static_cast<double>(stats.count);
  return -0.5 * n * std::log(2.0 * std::numbers::pi * noise_var) - 0.5 * stats.sum_rr / noise_var +
         leaf_log_evidence(stats.sum_sr, stats.sum_ss, noise_var, leaf_var);
}

LeafPosterior leaf_posterior(double sum_sr, double sum_ss, double noise_var, double leaf_var) {
  const double precision = sum_ss / noise_var + 1.0 / leaf_var;
  return {(sum_sr / noise_var) / precision, 1.0 / precision};
}

}  // namespace bcmf
