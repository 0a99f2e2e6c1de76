#pragma once

#include <span>
#include <vector>

namespace bcmf {

class Rng;

// Z ~ N(0, 1) conditioned on Z > lower.
double sample_std_normal_above(double lower, Rng& rng);

// Z_i ~ N(pred_i, 1) truncated to (0, inf) when y_i = 1 and (-inf, 0] when y_i = 0.
std::vector<double> sample_probit_latents(std::span<const double> y_binary, std::span<const double> linear_pred,
                                          Rng& rng);
void sample_probit_latents(std::span<const double> y_binary, std::span<const double> linear_pred,
                           std::span<double> out, Rng& rng);

}  // namespace bcmf
