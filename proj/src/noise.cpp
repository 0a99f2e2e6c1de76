#include "bcmf/noise.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "bcmf/error.hpp"
#include "bcmf/numeric.hpp"
#include "bcmf/random.hpp"
#include "bcmf/simd/kernels.hpp"

namespace bcmf {

void NoisePrior::validate() const {
  if (!(nu > 0.0) || !(lambda > 0.0)) throw ConfigError("noise prior needs nu > 0 and lambda > 0");
}

double sample_noise_var(double sse, std::size_t n, const NoisePrior& prior, Rng& rng) {
  const double df = prior.nu + static_cast<double>(n);
  return (prior.nu * prior.lambda + sse) / rng.chi_squared(df);
}

double sample_noise_var(std::span<const double> y, std::span<const double> scale, std::span<const double> fit,
                        const NoisePrior& prior, Rng& rng) {
  if (y.size() != scale.size() || y.size() != fit.size()) throw InvalidArgument("sample_noise_var: length mismatch");
  return sample_noise_var(simd::active().scaled_sse(y, scale, fit), y.size(), prior, rng);
}

NoisePrior calibrate_noise_prior(std::span<const double> y, const Eigen::MatrixXd& X, double nu, double quantile) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const Eigen::Index p = X.cols() + 1;
  double sigma2 = sample_variance(y);
  if (n > p + 1) {
    Eigen::MatrixXd design(n, p);
    design.col(0).setOnes();
    design.rightCols(X.cols()) = X;
    const Eigen::Map<const Eigen::VectorXd> response(y.data(), n);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() == p) {
      const Eigen::VectorXd resid = response - design * qr.solve(response);
      const double s2 = resid.squaredNorm() / static_cast<double>(n - p);
      if (s2 > 0.0) sigma2 = s2;
    }
  }
  if (!(sigma2 > 0.0)) sigma2 = 1.0;
  NoisePrior prior;
  prior.nu = nu;
  prior.lambda = sigma2 * chi_squared_quantile(1.0 - quantile, nu) / nu;
  return prior;
}

}  // namespace bcmf
