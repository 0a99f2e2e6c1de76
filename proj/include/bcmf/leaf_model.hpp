#pragma once
// Conjugate Normal leaf model for the scaled observation model
//   r_i = s_i * mu + e_i,  e_i ~ N(0, sigma^2),  mu ~ N(0, sigma_mu^2).
// Everything is expressed through the sufficient statistics sum s_i r_i and
// sum s_i^2, so s_i = 0 contributes nothing and is never divided by.

#include <cstddef>

namespace bcmf {

struct LeafStats {
  double sum_sr = 0.0;  // sum s_i r_i
  double sum_ss = 0.0;  // sum s_i^2
  double sum_rr = 0.0;  // sum r_i^2, only needed for the full marginal
  std::size_t count = 0;
};

// log of  integral prod_i N(r_i; s_i mu, sigma^2) N(mu; 0, sigma_mu^2) dmu,
// including the -n/2 log(2 pi sigma^2) - sum r^2 / (2 sigma^2) terms.
double leaf_log_marginal(const LeafStats& stats, double noise_var, double leaf_var);

// The part of leaf_log_marginal that depends on the tree partition once the
// count and sum r^2 terms cancel across a Metropolis-Hastings ratio.
double leaf_log_evidence(double sum_sr, double sum_ss, double noise_var, double leaf_var);

struct LeafPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Precision P = sum s^2 / sigma^2 + 1 / sigma_mu^2; mean = (sum s r / sigma^2) / P.
LeafPosterior leaf_posterior(double sum_sr, double sum_ss, double noise_var, double leaf_var);

}  // namespace bcmf
