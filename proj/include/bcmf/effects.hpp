#pragma once
// Conditional and averaged natural direct / indirect effects from posterior
// function draws.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "bcmf/mediation.hpp"

namespace bcmf {

class Rng;

enum class EffectScale { kOutcome, kProbability };

// draws x rows. tau = zeta + delta.
struct EffectDraws {
  DrawMatrix zeta, delta, tau;
  EffectScale scale = EffectScale::kOutcome;

  std::size_t draws() const { return static_cast<std::size_t>(zeta.rows()); }
  std::size_t rows() const { return static_cast<std::size_t>(zeta.cols()); }
};

// zeta = zeta(x), delta = tau_m(x) d(x).
EffectDraws conditional_effects_continuous(const FunctionDraws& f);
EffectDraws conditional_effects_continuous(const MediationFit& fit);

// delta = d(x) [Phi(mu_m + tau_m) - Phi(mu_m)] with latent-scale mu_m, tau_m.
EffectDraws conditional_effects_binary_mediator(const FunctionDraws& f);
EffectDraws conditional_effects_binary_mediator(const MediationFit& fit);

// E[Y{a, M(a')} | x] under a probit outcome and Gaussian mediator:
// Phi((mu + a zeta + (mu_m + a' tau_m) d) / sqrt(1 + d^2 sigma_m^2)).
double counterfactual_mean_binary_outcome(double mu, double zeta, double d, double mu_m, double tau_m,
                                          double sigma_m, int a, int a_prime);
// Same for a probit mediator: p Phi(mu + a zeta + d) + (1 - p) Phi(mu + a zeta), p = Phi(mu_m + a' tau_m).
double counterfactual_mean_binary_both(double mu, double zeta, double d, double mu_m, double tau_m, int a,
                                       int a_prime);

// Probability-scale effects for a binary outcome:
// zeta = E[Y{1, M(0)}] - E[Y{0, M(0)}], delta = E[Y{1, M(1)}] - E[Y{1, M(0)}].
EffectDraws conditional_effects_binary_outcome(const FunctionDraws& f, std::span<const double> sigma2_m,
                                               VariableKind mediator_kind);

// Dispatches on the fit's outcome and mediator kinds. `test` selects the
// held-out rows.
EffectDraws conditional_effects(const MediationFit& fit, bool test = false);
EffectDraws conditional_effects(const FunctionDraws& f, std::span<const double> sigma2_m, VariableKind outcome_kind,
                                VariableKind mediator_kind);

struct AverageDraws {
  std::vector<double> zeta, delta, tau;
};

// One Dirichlet(1, ..., 1) weight vector per posterior draw. When `weights`
// is given it receives the draws x rows weight matrix.
AverageDraws bayesian_bootstrap_averages(const EffectDraws& effects, Rng& rng, DrawMatrix* weights = nullptr);
AverageDraws equal_weight_averages(const EffectDraws& effects);

// draws x groups unweighted member means.
struct GroupDraws {
  DrawMatrix zeta, delta, tau;
};

// Fixed groups: labels[i] in {0, ..., groups - 1}; every group must be nonempty.
GroupDraws subgroup_averages(const EffectDraws& effects, std::span<const int> labels, std::size_t groups);
// Groups recomputed per draw: labels is draws x rows.
GroupDraws subgroup_averages(const EffectDraws& effects,
                             const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& labels,
                             std::size_t groups);

}  // namespace bcmf
