#include "bcmf/probit.hpp"

#include <cmath>

#include "bcmf/error.hpp"
#include "bcmf/random.hpp"

namespace bcmf {

double sample_std_normal_above(double lower, Rng& rng) {
  if (lower < 0.45) {
    // acceptance probability is at least 1 - Phi(0.45) ~ 0.33
    for (;;) {
      const double z = rng.normal();
      if (z > lower) return z;
    }
  }
  // exponential proposal with the optimal rate (Robert, 1995)
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower + rng.exponential() / rate;
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

void sample_probit_latents(std::span<const double> y_binary, std::span<const double> linear_pred,
                           std::span<double> out, Rng& rng) {
  if (y_binary.size() != linear_pred.size() || out.size() != y_binary.size()) {
    throw InvalidArgument("sample_probit_latents: length mismatch");
  }
  for (std::size_t i = 0; i < y_binary.size(); ++i) {
    const double m = linear_pred[i];
    if (y_binary[i] > 0.5) {
      out[i] = m + sample_std_normal_above(-m, rng);
    } else {
      out[i] = m - sample_std_normal_above(m, rng);
    }
  }
}

std::vector<double> sample_probit_latents(std::span<const double> y_binary, std::span<const double> linear_pred,
                                          Rng& rng) {
  std::vector<double> out(y_binary.size());
  sample_probit_latents(y_binary, linear_pred, out, rng);
  return out;
}

}  // namespace bcmf
