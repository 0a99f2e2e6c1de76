#include "bcmf/mediation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <thread>

#include "bcmf/error.hpp"
#include "bcmf/noise.hpp"
#include "bcmf/numeric.hpp"
#include "bcmf/probit.hpp"
#include "bcmf/random.hpp"

namespace bcmf {

void NoisePriorConfig::validate() const {
  if (!(nu > 0.0)) throw ConfigError("noise prior nu must be positive");
  if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("noise prior quantile must be in (0, 1)");
  if (lambda && !(*lambda > 0.0)) throw ConfigError("noise prior lambda must be positive");
}

void BCMFConfig::validate() const {
  mu.validate();
  zeta.validate();
  d.validate();
  mu_m.validate();
  tau_m.validate();
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
  if (n_chains < 1) throw ConfigError("n_chains must be at least 1");
  outcome_noise.validate();
  mediator_noise.validate();
  auxiliary.validate();
}

namespace {

void check_arms(const MediationData& data) {
  const std::size_t treated = data.treated();
  const std::size_t control = data.rows() - treated;
  if (treated < kMinArmSize || control < kMinArmSize) {
    throw DataError("each treatment arm needs at least " + std::to_string(kMinArmSize) + " observations (treated " +
                    std::to_string(treated) + ", control " + std::to_string(control) + ")");
  }
}

Eigen::MatrixXd with_column(const Eigen::MatrixXd& X, double value) {
  Eigen::MatrixXd out(X.rows(), X.cols() + 1);
  out.leftCols(X.cols()) = X;
  out.col(X.cols()).setConstant(value);
  return out;
}

double probit_offset(std::span<const double> v) { return normal_quantile(std::clamp(mean(v), 0.01, 0.99)); }

}  // namespace

CleverCovariates build_clever_covariates(const MediationData& data, const BCMFConfig& cfg, Rng& rng,
                                         AuxiliaryModels* models) {
  data.validate(cfg.outcome_kind, cfg.mediator_kind);
  check_arms(data);
  AuxiliaryModels fitted;
  fitted.propensity = fit_bart(data.a, data.X, true, cfg.auxiliary, rng);
  Eigen::MatrixXd XA(data.X.rows(), data.X.cols() + 1);
  XA.leftCols(data.X.cols()) = data.X;
  XA.col(data.X.cols()) = Eigen::Map<const Eigen::VectorXd>(data.a.data(), static_cast<Eigen::Index>(data.a.size()));
  fitted.mediator = fit_bart(data.m, XA, cfg.mediator_kind == VariableKind::kBinary, cfg.auxiliary, rng);
  CleverCovariates clever = clever_covariates_for(fitted, data.X);
  if (models) *models = std::move(fitted);
  return clever;
}

CleverCovariates clever_covariates_for(const AuxiliaryModels& models, const Eigen::MatrixXd& X) {
  const auto cols = static_cast<std::size_t>(X.cols());
  if (models.propensity.dimension != cols || models.mediator.dimension != cols + 1) {
    throw InvalidArgument("clever covariates: covariate matrix has " + std::to_string(cols) +
                          " columns, auxiliary models expect " + std::to_string(models.propensity.dimension));
  }
  CleverCovariates out;
  out.pi_hat = models.propensity.mean_response(X);
  for (auto& p : out.pi_hat) p = std::clamp(p, 0.01, 0.99);
  out.m0_hat = models.mediator.mean_response(with_column(X, 0.0));
  out.m1_hat = models.mediator.mean_response(with_column(X, 1.0));
  return out;
}

Eigen::MatrixXd outcome_design(const Eigen::MatrixXd& X, const CleverCovariates& clever) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (clever.pi_hat.size() != static_cast<std::size_t>(n) || clever.m0_hat.size() != static_cast<std::size_t>(n) ||
      clever.m1_hat.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("outcome_design: clever covariate length mismatch");
  }
  Eigen::MatrixXd out(n, p + 3);
  out.leftCols(p) = X;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out(i, p) = clever.pi_hat[k];
    out(i, p + 1) = clever.m0_hat[k];
    out(i, p + 2) = clever.m1_hat[k];
  }
  return out;
}

Eigen::MatrixXd mediator_design(const Eigen::MatrixXd& X, const CleverCovariates& clever) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (clever.pi_hat.size() != static_cast<std::size_t>(n)) throw InvalidArgument("mediator_design: length mismatch");
  Eigen::MatrixXd out(n, p + 1);
  out.leftCols(p) = X;
  for (Eigen::Index i = 0; i < n; ++i) out(i, p) = clever.pi_hat[static_cast<std::size_t>(i)];
  return out;
}

Standardization make_standardization(const MediationData& data, VariableKind outcome_kind,
                                     VariableKind mediator_kind) {
  Standardization st;
  if (outcome_kind == VariableKind::kBinary) {
    st.y_center = probit_offset(data.y);
  } else {
    st.y_center = mean(data.y);
    const double sd = std::sqrt(sample_variance(data.y));
    st.y_scale = sd > 0.0 ? sd : 1.0;
  }
  if (mediator_kind == VariableKind::kBinary) {
    st.mm_center = probit_offset(data.m);
  } else {
    st.m_center = mean(data.m);
    const double sd = std::sqrt(sample_variance(data.m));
    st.m_scale = sd > 0.0 ? sd : 1.0;
    st.mm_center = st.m_center;
    st.mm_scale = st.m_scale;
  }
  return st;
}

std::vector<double> outcome_side_mediator(const MediationData& data, const Standardization& st) {
  std::vector<double> out(data.m.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (data.m[i] - st.m_center) / st.m_scale;
  return out;
}

void FunctionDraws::resize(std::size_t draws, std::size_t rows) {
  const auto r = static_cast<Eigen::Index>(draws), c = static_cast<Eigen::Index>(rows);
  mu.resize(r, c);
  zeta.resize(r, c);
  d.resize(r, c);
  mu_m.resize(r, c);
  tau_m.resize(r, c);
}

namespace {

using Spans = std::array<std::span<const double>, 5>;

// Internal-scale function values to the original outcome / mediator scale.
void write_original(const Standardization& st, const Spans& f, FunctionDraws& out, std::size_t draw) {
  const auto r = static_cast<Eigen::Index>(draw);
  for (std::size_t i = 0; i < f[kMu].size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    const double d_o = st.y_scale * f[kD][i] / st.m_scale;
    out.d(r, c) = d_o;
    out.mu(r, c) = st.y_center + st.y_scale * f[kMu][i] - st.m_center * d_o;
    out.zeta(r, c) = st.y_scale * f[kZeta][i];
    out.mu_m(r, c) = st.mm_center + st.mm_scale * f[kMuM][i];
    out.tau_m(r, c) = st.mm_scale * f[kTauM][i];
  }
}

struct ChainContext {
  const MediationData* data;
  const BCMFConfig* cfg;
  Standardization st;
  std::shared_ptr<const CovariateIndex> outcome_cov, mediator_cov;
  std::vector<double> y_internal, m_internal, m_side;
  NoisePrior outcome_prior, mediator_prior;
  const Eigen::MatrixXd* outcome_test = nullptr;
  const Eigen::MatrixXd* mediator_test = nullptr;
};

void run_chain(const ChainContext& ctx, std::size_t chain, MediationFit& fit) {
  const auto& cfg = *ctx.cfg;
  const auto& data = *ctx.data;
  const std::size_t n = data.rows();
  const bool binary_y = cfg.outcome_kind == VariableKind::kBinary;
  const bool binary_m = cfg.mediator_kind == VariableKind::kBinary;
  Rng rng = derive_stream(cfg.seed, chain + 1);

  std::array<ForestSampler, 5> forests{
      ForestSampler(cfg.mu, ctx.outcome_cov),    ForestSampler(cfg.zeta, ctx.outcome_cov),
      ForestSampler(cfg.d, ctx.outcome_cov),     ForestSampler(cfg.mu_m, ctx.mediator_cov),
      ForestSampler(cfg.tau_m, ctx.mediator_cov)};
  auto& mu = forests[kMu];
  auto& zeta = forests[kZeta];
  auto& d = forests[kD];
  auto& mu_m = forests[kMuM];
  auto& tau_m = forests[kTauM];

  const std::vector<double> ones(n, 1.0);
  const std::vector<double>& a = data.a;
  const std::vector<double>& ms = ctx.m_side;
  std::vector<double> y = ctx.y_internal, m = ctx.m_internal;
  std::vector<double> r(n), linpred(n);
  double sigma2 = 1.0, sigma2_m = 1.0;

  const std::size_t n_test = ctx.outcome_test ? static_cast<std::size_t>(ctx.outcome_test->rows()) : 0;
  std::array<std::vector<double>, 5> test_buf;
  for (auto& b : test_buf) b.resize(n_test);

  for (std::size_t it = 0; it < cfg.burn_in + cfg.n_samples; ++it) {
    if (binary_y) {
      const auto fm = mu.fit(), fz = zeta.fit(), fd = d.fit();
      for (std::size_t i = 0; i < n; ++i) linpred[i] = ctx.st.y_center + fm[i] + a[i] * fz[i] + ms[i] * fd[i];
      sample_probit_latents(data.y, linpred, y, rng);
      for (auto& v : y) v -= ctx.st.y_center;
    }
    if (binary_m) {
      const auto fm = mu_m.fit(), ft = tau_m.fit();
      for (std::size_t i = 0; i < n; ++i) linpred[i] = ctx.st.mm_center + fm[i] + a[i] * ft[i];
      sample_probit_latents(data.m, linpred, m, rng);
      for (auto& v : m) v -= ctx.st.mm_center;
    }

    {
      const auto fz = zeta.fit(), fd = d.fit();
      for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - a[i] * fz[i] - ms[i] * fd[i];
      mu.sweep(r, ones, sigma2, rng);
    }
    {
      const auto fm = mu.fit(), fd = d.fit();
      for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - fm[i] - ms[i] * fd[i];
      zeta.sweep(r, a, sigma2, rng);
    }
    {
      const auto fm = mu.fit(), fz = zeta.fit();
      for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - fm[i] - a[i] * fz[i];
      d.sweep(r, ms, sigma2, rng);
    }
    if (!binary_y) {
      const auto fm = mu.fit(), fz = zeta.fit(), fd = d.fit();
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - fm[i] - a[i] * fz[i] - ms[i] * fd[i];
        sse += e * e;
      }
      sigma2 = sample_noise_var(sse, n, ctx.outcome_prior, rng);
    }

    {
      const auto ft = tau_m.fit();
      for (std::size_t i = 0; i < n; ++i) r[i] = m[i] - a[i] * ft[i];
      mu_m.sweep(r, ones, sigma2_m, rng);
    }
    {
      const auto fm = mu_m.fit();
      for (std::size_t i = 0; i < n; ++i) r[i] = m[i] - fm[i];
      tau_m.sweep(r, a, sigma2_m, rng);
    }
    if (!binary_m) {
      const auto fm = mu_m.fit(), ft = tau_m.fit();
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = m[i] - fm[i] - a[i] * ft[i];
        sse += e * e;
      }
      sigma2_m = sample_noise_var(sse, n, ctx.mediator_prior, rng);
    }

    if (it < cfg.burn_in) continue;
    const std::size_t draw = chain * cfg.n_samples + (it - cfg.burn_in);
    write_original(ctx.st, {mu.fit(), zeta.fit(), d.fit(), mu_m.fit(), tau_m.fit()}, fit.train, draw);
    if (n_test > 0) {
      for (std::size_t f = 0; f < 5; ++f) {
        forests[f].predict(f < kMuM ? *ctx.outcome_test : *ctx.mediator_test, test_buf[f]);
      }
      write_original(ctx.st, {test_buf[0], test_buf[1], test_buf[2], test_buf[3], test_buf[4]}, *fit.test, draw);
    }
    fit.sigma2[draw] = binary_y ? 1.0 : sigma2 * ctx.st.y_scale * ctx.st.y_scale;
    fit.sigma2_m[draw] = binary_m ? 1.0 : sigma2_m * ctx.st.mm_scale * ctx.st.mm_scale;
    if (fit.forests) {
      auto& slot = fit.forests->draws[draw];
      for (std::size_t f = 0; f < 5; ++f) slot[f] = forests[f].snapshot();
    }
  }
}

NoisePrior resolve_prior(const NoisePriorConfig& cfg, std::span<const double> response, const Eigen::MatrixXd& design) {
  if (cfg.lambda) return NoisePrior{cfg.nu, *cfg.lambda};
  return calibrate_noise_prior(response, design, cfg.nu, cfg.quantile);
}

}  // namespace

MediationFit fit_bcmf(const MediationData& data, const BCMFConfig& cfg, const Eigen::MatrixXd* X_test) {
  cfg.validate();
  data.validate(cfg.outcome_kind, cfg.mediator_kind);
  check_arms(data);
  if (X_test && X_test->cols() != data.X.cols()) {
    throw DataError("test covariates have " + std::to_string(X_test->cols()) + " columns, training data has " +
                    std::to_string(data.X.cols()));
  }
  const std::size_t n = data.rows();

  MediationFit fit;
  fit.config = cfg;
  fit.n_chains = cfg.n_chains;
  fit.n_samples = cfg.n_samples;
  fit.standardization = make_standardization(data, cfg.outcome_kind, cfg.mediator_kind);

  Rng aux_rng = derive_stream(cfg.seed, 0);
  AuxiliaryModels aux;
  fit.clever = build_clever_covariates(data, cfg, aux_rng, &aux);

  ChainContext ctx;
  ctx.data = &data;
  ctx.cfg = &cfg;
  ctx.st = fit.standardization;
  const Eigen::MatrixXd out_design = outcome_design(data.X, fit.clever);
  const Eigen::MatrixXd med_design = mediator_design(data.X, fit.clever);
  ctx.outcome_cov = std::make_shared<const CovariateIndex>(out_design);
  ctx.mediator_cov = std::make_shared<const CovariateIndex>(med_design);
  ctx.m_side = outcome_side_mediator(data, ctx.st);
  ctx.y_internal.resize(n, 0.0);
  ctx.m_internal.resize(n, 0.0);
  if (cfg.outcome_kind == VariableKind::kContinuous) {
    for (std::size_t i = 0; i < n; ++i) ctx.y_internal[i] = (data.y[i] - ctx.st.y_center) / ctx.st.y_scale;
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), data.X.cols() + 2);
    design.leftCols(data.X.cols()) = data.X;
    for (std::size_t i = 0; i < n; ++i) {
      design(static_cast<Eigen::Index>(i), data.X.cols()) = data.a[i];
      design(static_cast<Eigen::Index>(i), data.X.cols() + 1) = data.m[i];
    }
    ctx.outcome_prior = resolve_prior(cfg.outcome_noise, ctx.y_internal, design);
  }
  if (cfg.mediator_kind == VariableKind::kContinuous) {
    for (std::size_t i = 0; i < n; ++i) ctx.m_internal[i] = (data.m[i] - ctx.st.mm_center) / ctx.st.mm_scale;
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), data.X.cols() + 1);
    design.leftCols(data.X.cols()) = data.X;
    for (std::size_t i = 0; i < n; ++i) design(static_cast<Eigen::Index>(i), data.X.cols()) = data.a[i];
    ctx.mediator_prior = resolve_prior(cfg.mediator_noise, ctx.m_internal, design);
  }

  Eigen::MatrixXd out_test, med_test;
  if (X_test) {
    const CovariateIndex check(*X_test);  // rejects non-finite values
    const CleverCovariates test_clever = clever_covariates_for(aux, *X_test);
    out_test = outcome_design(*X_test, test_clever);
    med_test = mediator_design(*X_test, test_clever);
    ctx.outcome_test = &out_test;
    ctx.mediator_test = &med_test;
  }

  const std::size_t total = cfg.n_chains * cfg.n_samples;
  fit.train.resize(total, n);
  if (X_test) {
    fit.test.emplace();
    fit.test->resize(total, static_cast<std::size_t>(X_test->rows()));
  }
  fit.sigma2.assign(total, 0.0);
  fit.sigma2_m.assign(total, 0.0);
  if (cfg.store_forests) {
    fit.forests.emplace();
    fit.forests->draws.resize(total);
    fit.forests->auxiliary = std::move(aux);
  }

  if (cfg.n_chains == 1) {
    run_chain(ctx, 0, fit);
    return fit;
  }
  std::vector<std::exception_ptr> errors(cfg.n_chains);
  {
    std::vector<std::jthread> workers;
    workers.reserve(cfg.n_chains);
    for (std::size_t c = 0; c < cfg.n_chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          run_chain(ctx, c, fit);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return fit;
}

FunctionDraws predict_functions(const MediationFit& fit, const Eigen::MatrixXd& X_new) {
  if (!fit.forests) throw DataError("fit has no stored forests; refit with store_forests enabled");
  const CovariateIndex check(X_new);
  const CleverCovariates clever = clever_covariates_for(fit.forests->auxiliary, X_new);
  const Eigen::MatrixXd out_design = outcome_design(X_new, clever);
  const Eigen::MatrixXd med_design = mediator_design(X_new, clever);
  const std::size_t n = static_cast<std::size_t>(X_new.rows());
  FunctionDraws out;
  out.resize(fit.forests->draws.size(), n);
  std::array<std::vector<double>, 5> buf;
  for (auto& b : buf) b.resize(n);
  for (std::size_t draw = 0; draw < fit.forests->draws.size(); ++draw) {
    const auto& slot = fit.forests->draws[draw];
    for (std::size_t f = 0; f < 5; ++f) evaluate_forest(slot[f], f < kMuM ? out_design : med_design, buf[f]);
    write_original(fit.standardization, {buf[0], buf[1], buf[2], buf[3], buf[4]}, out, draw);
  }
  return out;
}

}  // namespace bcmf
