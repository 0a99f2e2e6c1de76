#include "bcmf/effects.hpp"

#include <cmath>
#include <string>

#include "bcmf/error.hpp"
#include "bcmf/numeric.hpp"
#include "bcmf/random.hpp"

namespace bcmf {

namespace {

void require_kinds(const MediationFit& fit, VariableKind outcome, VariableKind mediator, const char* what) {
  if (fit.config.outcome_kind != outcome || fit.config.mediator_kind != mediator) {
    throw InvalidArgument(std::string(what) + ": fit has " + to_string(fit.config.outcome_kind) + " outcome and " +
                          to_string(fit.config.mediator_kind) + " mediator");
  }
}

EffectDraws allocate(const FunctionDraws& f, EffectScale scale) {
  EffectDraws out;
  out.zeta.resize(f.mu.rows(), f.mu.cols());
  out.delta.resize(f.mu.rows(), f.mu.cols());
  out.tau.resize(f.mu.rows(), f.mu.cols());
  out.scale = scale;
  return out;
}

}  // namespace

EffectDraws conditional_effects_continuous(const FunctionDraws& f) {
  EffectDraws out = allocate(f, EffectScale::kOutcome);
  out.zeta = f.zeta;
  out.delta = f.tau_m.cwiseProduct(f.d);
  out.tau = out.zeta + out.delta;
  return out;
}

EffectDraws conditional_effects_continuous(const MediationFit& fit) {
  require_kinds(fit, VariableKind::kContinuous, VariableKind::kContinuous, "conditional_effects_continuous");
  return conditional_effects_continuous(fit.train);
}

EffectDraws conditional_effects_binary_mediator(const FunctionDraws& f) {
  EffectDraws out = allocate(f, EffectScale::kOutcome);
  out.zeta = f.zeta;
  for (Eigen::Index r = 0; r < f.mu.rows(); ++r) {
    for (Eigen::Index c = 0; c < f.mu.cols(); ++c) {
      const double shift = normal_cdf(f.mu_m(r, c) + f.tau_m(r, c)) - normal_cdf(f.mu_m(r, c));
      out.delta(r, c) = f.d(r, c) * shift;
    }
  }
  out.tau = out.zeta + out.delta;
  return out;
}

EffectDraws conditional_effects_binary_mediator(const MediationFit& fit) {
  require_kinds(fit, VariableKind::kContinuous, VariableKind::kBinary, "conditional_effects_binary_mediator");
  return conditional_effects_binary_mediator(fit.train);
}

double counterfactual_mean_binary_outcome(double mu, double zeta, double d, double mu_m, double tau_m,
                                          double sigma_m, int a, int a_prime) {
  if (!(sigma_m >= 0.0)) throw InvalidArgument("counterfactual mean: sigma_m must be nonnegative");
  const double numerator = mu + a * zeta + (mu_m + a_prime * tau_m) * d;
  return normal_cdf(numerator / std::sqrt(1.0 + d * d * sigma_m * sigma_m));
}

double counterfactual_mean_binary_both(double mu, double zeta, double d, double mu_m, double tau_m, int a,
                                       int a_prime) {
  const double p = normal_cdf(mu_m + a_prime * tau_m);
  const double base = mu + a * zeta;
  return p * normal_cdf(base + d) + (1.0 - p) * normal_cdf(base);
}

EffectDraws conditional_effects_binary_outcome(const FunctionDraws& f, std::span<const double> sigma2_m,
                                               VariableKind mediator_kind) {
  if (sigma2_m.size() != f.draws()) throw InvalidArgument("binary-outcome effects: sigma2_m length mismatch");
  EffectDraws out = allocate(f, EffectScale::kProbability);
  for (Eigen::Index r = 0; r < f.mu.rows(); ++r) {
    const double sm = std::sqrt(sigma2_m[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < f.mu.cols(); ++c) {
      const auto ey = [&](int a, int ap) {
        if (mediator_kind == VariableKind::kBinary) {
          return counterfactual_mean_binary_both(f.mu(r, c), f.zeta(r, c), f.d(r, c), f.mu_m(r, c), f.tau_m(r, c),
                                                 a, ap);
        }
        return counterfactual_mean_binary_outcome(f.mu(r, c), f.zeta(r, c), f.d(r, c), f.mu_m(r, c), f.tau_m(r, c),
                                                  sm, a, ap);
      };
      const double e10 = ey(1, 0);
      out.zeta(r, c) = e10 - ey(0, 0);
      out.delta(r, c) = ey(1, 1) - e10;
    }
  }
  out.tau = out.zeta + out.delta;
  return out;
}

EffectDraws conditional_effects(const FunctionDraws& f, std::span<const double> sigma2_m, VariableKind outcome_kind,
                                VariableKind mediator_kind) {
  if (outcome_kind == VariableKind::kBinary) return conditional_effects_binary_outcome(f, sigma2_m, mediator_kind);
  if (mediator_kind == VariableKind::kBinary) return conditional_effects_binary_mediator(f);
  return conditional_effects_continuous(f);
}

EffectDraws conditional_effects(const MediationFit& fit, bool test) {
  if (test && !fit.test) throw InvalidArgument("fit has no held-out rows");
  return conditional_effects(test ? *fit.test : fit.train, fit.sigma2_m, fit.config.outcome_kind,
                             fit.config.mediator_kind);
}

AverageDraws bayesian_bootstrap_averages(const EffectDraws& effects, Rng& rng, DrawMatrix* weights) {
  const std::size_t draws = effects.draws(), n = effects.rows();
  if (n == 0) throw InvalidArgument("bayesian bootstrap: no rows");
  AverageDraws out;
  out.zeta.resize(draws);
  out.delta.resize(draws);
  out.tau.resize(draws);
  if (weights) weights->resize(static_cast<Eigen::Index>(draws), static_cast<Eigen::Index>(n));
  std::vector<double> w(n);
  for (std::size_t r = 0; r < draws; ++r) {
    rng.dirichlet_ones(w);
    const auto row = static_cast<Eigen::Index>(r);
    double z = 0.0, dl = 0.0, t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      z += w[i] * effects.zeta(row, c);
      dl += w[i] * effects.delta(row, c);
      t += w[i] * effects.tau(row, c);
      if (weights) (*weights)(row, c) = w[i];
    }
    out.zeta[r] = z;
    out.delta[r] = dl;
    out.tau[r] = t;
  }
  return out;
}

AverageDraws equal_weight_averages(const EffectDraws& effects) {
  if (effects.rows() == 0) throw InvalidArgument("equal-weight averages: no rows");
  AverageDraws out;
  const auto mean_rows = [](const DrawMatrix& m) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m.row(r).mean();
    return v;
  };
  out.zeta = mean_rows(effects.zeta);
  out.delta = mean_rows(effects.delta);
  out.tau = mean_rows(effects.tau);
  return out;
}

namespace {

template <class LabelAt>
GroupDraws group_means(const EffectDraws& effects, std::size_t groups, LabelAt label_at) {
  const auto draws = static_cast<Eigen::Index>(effects.draws());
  const auto n = static_cast<Eigen::Index>(effects.rows());
  const auto g = static_cast<Eigen::Index>(groups);
  GroupDraws out;
  out.zeta.setZero(draws, g);
  out.delta.setZero(draws, g);
  out.tau.setZero(draws, g);
  std::vector<double> count(groups);
  for (Eigen::Index r = 0; r < draws; ++r) {
    std::fill(count.begin(), count.end(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = label_at(r, i);
      if (label < 0 || label >= g) throw InvalidArgument("subgroup label " + std::to_string(label) + " out of range");
      out.zeta(r, label) += effects.zeta(r, i);
      out.delta(r, label) += effects.delta(r, i);
      out.tau(r, label) += effects.tau(r, i);
      count[static_cast<std::size_t>(label)] += 1.0;
    }
    for (Eigen::Index k = 0; k < g; ++k) {
      const double c = count[static_cast<std::size_t>(k)];
      if (c == 0.0) throw InvalidArgument("subgroup " + std::to_string(k) + " is empty");
      out.zeta(r, k) /= c;
      out.delta(r, k) /= c;
      out.tau(r, k) /= c;
    }
  }
  return out;
}

}  // namespace

GroupDraws subgroup_averages(const EffectDraws& effects, std::span<const int> labels, std::size_t groups) {
  if (labels.size() != effects.rows()) throw InvalidArgument("subgroup labels length mismatch");
  return group_means(effects, groups, [&](Eigen::Index, Eigen::Index i) { return labels[static_cast<std::size_t>(i)]; });
}

GroupDraws subgroup_averages(const EffectDraws& effects,
                             const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& labels,
                             std::size_t groups) {
  if (static_cast<std::size_t>(labels.rows()) != effects.draws() ||
      static_cast<std::size_t>(labels.cols()) != effects.rows()) {
    throw InvalidArgument("per-draw subgroup labels must be draws x rows");
  }
  return group_means(effects, groups, [&](Eigen::Index r, Eigen::Index i) { return labels(r, i); });
}

}  // namespace bcmf
