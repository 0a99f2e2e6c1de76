#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"

#include "bcmf/effects.hpp"
#include "bcmf/error.hpp"
#include "bcmf/mediation.hpp"
#include "bcmf/numeric.hpp"
#include "bcmf/random.hpp"

using namespace bcmf;

namespace {

BCMFConfig small_config(std::uint64_t seed = 1) {
  BCMFConfig cfg;
  cfg.mu.trees = 40;
  cfg.mu_m.trees = 40;
  cfg.burn_in = 200;
  cfg.n_samples = 200;
  cfg.n_chains = 1;
  cfg.seed = seed;
  cfg.auxiliary.forest.trees = 20;
  cfg.auxiliary.burn_in = 100;
  cfg.auxiliary.n_samples = 100;
  return cfg;
}

Eigen::MatrixXd covariates(std::size_t n, Eigen::Index p, Rng& rng) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), p);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
  return X;
}

// Y = 1 + 0.5 A + 0.3 M + e,  M = 0.2 + 0.4 A + v
MediationData lsem_data(std::size_t n, Rng& rng) {
  MediationData data;
  data.X = covariates(n, 3, rng);
  data.y.resize(n);
  data.a.resize(n);
  data.m.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.a[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    data.m[i] = 0.2 + 0.4 * data.a[i] + rng.normal();
    data.y[i] = 1.0 + 0.5 * data.a[i] + 0.3 * data.m[i] + rng.normal();
  }
  return data;
}

bool covers(std::span<const double> draws, double truth) {
  const auto s = summarize_draws(draws);
  return s.lower <= truth && truth <= s.upper;
}

}  // namespace

TEST_CASE("fit_bcmf rejects data without both arms") {
  Rng rng(2);
  MediationData data = lsem_data(60, rng);
  std::fill(data.a.begin(), data.a.end(), 1.0);
  CHECK_THROWS_AS(fit_bcmf(data, small_config()), DataError);

  data.a.assign(60, 0.0);
  for (std::size_t i = 0; i < 5; ++i) data.a[i] = 1.0;
  CHECK_THROWS_AS(fit_bcmf(data, small_config()), DataError);

  data.a[10] = 2.0;
  CHECK_THROWS_AS(fit_bcmf(data, small_config()), DataError);
}

TEST_CASE("config validation") {
  BCMFConfig cfg = small_config();
  cfg.zeta.trees = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.d.prior.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.tau_m.k = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const BCMFConfig defaults;
  CHECK(defaults.mu.trees == 200);
  CHECK(defaults.zeta.trees == 20);
  CHECK(defaults.zeta.prior.alpha == 0.5);
  CHECK(defaults.mu_m.prior.alpha == 0.95);
  CHECK(defaults.n_chains == 2);
  CHECK(defaults.burn_in == 2500);
}

TEST_CASE("propensity estimate under randomization") {
  Rng rng(3);
  const std::size_t n = 2000;
  MediationData data;
  data.X = covariates(n, 3, rng);
  data.a.resize(n);
  data.m.resize(n);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.a[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
    data.m[i] = rng.normal();
    data.y[i] = rng.normal();
  }
  BCMFConfig cfg = small_config();
  Rng fit_rng(4);
  const auto clever = build_clever_covariates(data, cfg, fit_rng);
  CHECK(std::abs(mean(clever.pi_hat) - mean(data.a)) <= 0.05);
  for (double p : clever.pi_hat) {
    CHECK(p >= 0.01);
    CHECK(p <= 0.99);
  }
}

TEST_CASE("mediator regression recovers a noiseless surface") {
  Rng rng(5);
  const std::size_t n = 500;
  MediationData data;
  data.X = covariates(n, 2, rng);
  data.a.resize(n);
  data.y.assign(n, 0.0);
  data.m.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.a[i] = i % 2 == 0 ? 1.0 : 0.0;
    data.m[i] = data.X(static_cast<Eigen::Index>(i), 0);
    data.y[i] = rng.normal();
  }
  BCMFConfig cfg = small_config();
  cfg.auxiliary.forest.trees = 50;
  cfg.auxiliary.burn_in = 300;
  cfg.auxiliary.n_samples = 300;
  Rng fit_rng(6);
  const auto clever = build_clever_covariates(data, cfg, fit_rng);
  const double sd = std::sqrt(sample_variance(data.m));
  double e0 = 0, e1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    e0 += std::pow((clever.m0_hat[i] - data.m[i]) / sd, 2);
    e1 += std::pow((clever.m1_hat[i] - data.m[i]) / sd, 2);
  }
  CHECK(std::sqrt(e0 / n) <= 0.1);
  CHECK(std::sqrt(e1 / n) <= 0.1);
}

TEST_CASE("constant mediator gives constant clever covariates") {
  Rng rng(7);
  MediationData data = lsem_data(200, rng);
  std::fill(data.m.begin(), data.m.end(), 4.0);
  Rng fit_rng(8);
  const auto clever = build_clever_covariates(data, small_config(), fit_rng);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    CHECK(std::abs(clever.m0_hat[i] - 4.0) < 0.05);
    CHECK(std::abs(clever.m1_hat[i] - 4.0) < 0.05);
  }
}

TEST_CASE("homogeneous linear truth is recovered") {
  Rng rng(10);
  const MediationData data = lsem_data(500, rng);
  BCMFConfig cfg = small_config(10);
  cfg.burn_in = 400;
  cfg.n_samples = 400;
  const MediationFit fit = fit_bcmf(data, cfg);
  CHECK(fit.draws() == 400);
  for (std::size_t k = 0; k < fit.draws(); ++k) {
    CHECK(fit.sigma2[k] > 0.0);
    CHECK(fit.sigma2_m[k] > 0.0);
  }
  const EffectDraws effects = conditional_effects_continuous(fit);
  Rng bb(11);
  const AverageDraws avg = bayesian_bootstrap_averages(effects, bb);
  CHECK(std::abs(mean(avg.zeta) - 0.5) < 0.15);
  CHECK(std::abs(mean(avg.delta) - 0.12) < 0.06);
  CHECK(covers(avg.zeta, 0.5));
  CHECK(covers(avg.delta, 0.12));
  CHECK(covers(fit.sigma2, 1.0));

  // and agrees with least squares on the same sample
  Eigen::MatrixXd D(500, 3);
  Eigen::VectorXd y(500), m(500);
  for (Eigen::Index i = 0; i < 500; ++i) {
    const auto k = static_cast<std::size_t>(i);
    D.row(i) << 1.0, data.a[k], data.m[k];
    y(i) = data.y[k];
    m(i) = data.m[k];
  }
  const Eigen::VectorXd by = D.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd bm = D.leftCols(2).colPivHouseholderQr().solve(m);
  CHECK(std::abs(mean(avg.zeta) - by(1)) < 0.1);
  CHECK(std::abs(mean(avg.delta) - by(2) * bm(1)) < 0.03);
}

TEST_CASE("seeded fits are reproducible and chains are independent of the chain count") {
  Rng rng(12);
  const MediationData data = lsem_data(120, rng);
  BCMFConfig cfg = small_config(13);
  cfg.burn_in = 30;
  cfg.n_samples = 20;
  const MediationFit one = fit_bcmf(data, cfg);
  const MediationFit again = fit_bcmf(data, cfg);
  CHECK(one.train.zeta == again.train.zeta);
  CHECK(one.train.mu_m == again.train.mu_m);
  CHECK(one.sigma2 == again.sigma2);

  cfg.n_chains = 3;
  const MediationFit three = fit_bcmf(data, cfg);
  CHECK(three.draws() == 60);
  CHECK(three.chain_of(45) == 2);
  CHECK(three.train.d.topRows(20) == one.train.d);
  CHECK(three.train.d.middleRows(20, 20) != one.train.d);
}

TEST_CASE("trees that cannot split give constant effect draws") {
  Rng rng(14);
  const MediationData data = lsem_data(100, rng);
  BCMFConfig cfg = small_config(15);
  cfg.burn_in = 20;
  cfg.n_samples = 30;
  for (ForestParams* f : {&cfg.zeta, &cfg.d, &cfg.tau_m}) {
    f->trees = 1;
    f->prior.alpha = 1e-12;
  }
  const MediationFit fit = fit_bcmf(data, cfg);
  for (std::size_t k = 0; k < fit.draws(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    CHECK(fit.train.zeta.row(r).maxCoeff() == fit.train.zeta.row(r).minCoeff());
    CHECK(fit.train.tau_m.row(r).maxCoeff() == fit.train.tau_m.row(r).minCoeff());
  }
}

TEST_CASE("direct-effect forest ignores control responses") {
  Rng rng(16);
  const std::size_t n = 80;
  const Eigen::MatrixXd X = covariates(n, 2, rng);
  std::vector<double> a(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = i % 2 == 0 ? 1.0 : 0.0;
    r[i] = rng.normal() + X(static_cast<Eigen::Index>(i), 0);
  }
  std::vector<double> perturbed = r;
  for (std::size_t i = 1; i < n; i += 2) perturbed[i] += 100.0 * rng.normal();
  const auto run = [&](const std::vector<double>& response) {
    ForestSampler zeta(BCMFConfig{}.zeta, std::make_shared<const CovariateIndex>(X));
    Rng chain(17);
    std::vector<std::vector<double>> fits;
    for (int it = 0; it < 200; ++it) {
      zeta.sweep(response, a, 0.5, chain);
      fits.emplace_back(zeta.fit().begin(), zeta.fit().end());
    }
    return fits;
  };
  CHECK(run(r) == run(perturbed));
}

TEST_CASE("mediator-slope update with unit mediator equals the unit-scale update") {
  Rng rng(18);
  const std::size_t n = 100;
  MediationData data = lsem_data(n, rng);
  std::fill(data.m.begin(), data.m.end(), 1.0);
  const Standardization st = make_standardization(data, VariableKind::kContinuous, VariableKind::kBinary);
  const std::vector<double> scale = outcome_side_mediator(data, st);
  const std::vector<double> ones(n, 1.0);
  auto cov = std::make_shared<const CovariateIndex>(data.X);
  ForestSampler with_m(BCMFConfig{}.d, cov), with_ones(BCMFConfig{}.d, cov);
  Rng r1(19), r2(19);
  double worst = 0.0;
  for (int it = 0; it < 300; ++it) {
    with_m.sweep(data.y, scale, 0.7, r1);
    with_ones.sweep(data.y, ones, 0.7, r2);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(with_m.fit()[i] - with_ones.fit()[i]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("affine rescaling of outcome and mediator rescales the effects") {
  Rng rng(20);
  const MediationData data = lsem_data(150, rng);
  MediationData scaled = data;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    scaled.y[i] = 10.0 * data.y[i] + 3.0;
    scaled.m[i] = 2.0 * data.m[i] - 1.0;
  }
  BCMFConfig cfg = small_config(21);
  cfg.burn_in = 50;
  cfg.n_samples = 50;
  const auto base = conditional_effects_continuous(fit_bcmf(data, cfg));
  const auto other = conditional_effects_continuous(fit_bcmf(scaled, cfg));
  const double zscale = base.zeta.cwiseAbs().maxCoeff();
  const double dscale = base.delta.cwiseAbs().maxCoeff();
  CHECK((other.zeta - 10.0 * base.zeta).cwiseAbs().maxCoeff() <= 1e-8 * 10.0 * zscale);
  CHECK((other.delta - 10.0 * base.delta).cwiseAbs().maxCoeff() <= 1e-8 * 10.0 * dscale);
}

TEST_CASE("stored forests reproduce training evaluations") {
  Rng rng(22);
  const MediationData data = lsem_data(80, rng);
  BCMFConfig cfg = small_config(23);
  cfg.burn_in = 20;
  cfg.n_samples = 15;
  cfg.n_chains = 2;

  const MediationFit bare = fit_bcmf(data, cfg);
  CHECK_THROWS_AS(predict_functions(bare, data.X), DataError);

  cfg.store_forests = true;
  const Eigen::MatrixXd X_test = data.X.topRows(7);
  const MediationFit fit = fit_bcmf(data, cfg, &X_test);
  CHECK(fit.train.zeta == bare.train.zeta);

  const FunctionDraws same = predict_functions(fit, data.X);
  CHECK(same.mu == fit.train.mu);
  CHECK(same.zeta == fit.train.zeta);
  CHECK(same.d == fit.train.d);
  CHECK(same.mu_m == fit.train.mu_m);
  CHECK(same.tau_m == fit.train.tau_m);
  REQUIRE(fit.test);
  CHECK(fit.test->zeta == fit.train.zeta.leftCols(7));
  CHECK(fit.test->mu == fit.train.mu.leftCols(7));

  Eigen::MatrixXd dup(5, data.X.cols());
  for (int i = 0; i < 5; ++i) dup.row(i) = data.X.row(3);
  const FunctionDraws rep = predict_functions(fit, dup);
  for (int i = 1; i < 5; ++i) CHECK(rep.zeta.col(i) == rep.zeta.col(0));

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(data.X.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  Eigen::MatrixXd Xp(data.X.rows(), data.X.cols());
  for (Eigen::Index i = 0; i < Xp.rows(); ++i) Xp.row(i) = data.X.row(perm[static_cast<std::size_t>(i)]);
  const FunctionDraws permuted = predict_functions(fit, Xp);
  for (Eigen::Index i = 0; i < Xp.rows(); ++i) {
    CHECK(permuted.d.col(i) == fit.train.d.col(perm[static_cast<std::size_t>(i)]));
  }

  Eigen::MatrixXd wrong(3, data.X.cols() + 1);
  wrong.setZero();
  CHECK_THROWS(predict_functions(fit, wrong));
}

TEST_CASE("binary outcome and binary mediator variants") {
  Rng rng(24);
  const std::size_t n = 400;
  MediationData data;
  data.X = covariates(n, 2, rng);
  data.y.resize(n);
  data.a.resize(n);
  data.m.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.a[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    data.m[i] = rng.normal(-0.2 + 0.8 * data.a[i], 1.0) > 0.0 ? 1.0 : 0.0;
    data.y[i] = rng.normal(-0.5 + 1.0 * data.a[i] + 0.8 * data.m[i], 1.0) > 0.0 ? 1.0 : 0.0;
  }
  BCMFConfig cfg = small_config(25);
  cfg.burn_in = 100;
  cfg.n_samples = 100;
  cfg.outcome_kind = VariableKind::kBinary;
  cfg.mediator_kind = VariableKind::kBinary;
  const MediationFit fit = fit_bcmf(data, cfg);
  for (std::size_t k = 0; k < fit.draws(); ++k) {
    CHECK(fit.sigma2[k] == 1.0);
    CHECK(fit.sigma2_m[k] == 1.0);
  }
  const EffectDraws effects = conditional_effects(fit);
  CHECK(effects.scale == EffectScale::kProbability);
  CHECK(effects.zeta.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(effects.delta.cwiseAbs().maxCoeff() <= 1.0);
  const auto avg = equal_weight_averages(effects);
  // true probability-scale effects are clearly positive
  CHECK(mean(avg.delta) > 0.0);
  CHECK(mean(avg.zeta) > 0.0);
  CHECK_THROWS_AS(conditional_effects_continuous(fit), InvalidArgument);

  cfg.mediator_kind = VariableKind::kContinuous;
  for (std::size_t i = 0; i < n; ++i) data.m[i] += 0.3 * rng.normal();
  const MediationFit mixed = fit_bcmf(data, cfg);
  CHECK(mixed.sigma2_m[0] != 1.0);
  const EffectDraws e2 = conditional_effects(mixed);
  CHECK(e2.delta.cwiseAbs().maxCoeff() <= 1.0);

  data.y[0] = 0.5;
  CHECK_THROWS_AS(fit_bcmf(data, cfg), DataError);
}
