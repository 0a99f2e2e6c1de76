#pragma once
// Desk-scale simulation study: synthetic covariates, three ground-truth
// families, BCMF versus the moderated LSEM baseline, and coverage / RMSE /
// bias / interval-length scoring.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcmf/data.hpp"
#include "bcmf/mediation.hpp"
#include "bcmf/summaries.hpp"
#include "bcmf/tree.hpp"

namespace bcmf {

class Rng;

enum class TruthKind { kBcmfLike, kLsem, kSparseLinear };

const char* to_string(TruthKind kind);
TruthKind parse_truth_kind(const std::string& text);

struct TruthSpec {
  TruthKind kind = TruthKind::kLsem;
  bool homogeneous = false;   // moderator slopes / steps of zeta, d, tau_m removed
  bool null_effects = false;  // zeta = tau_m = 0
  double sigma_y = 1.0;
  double sigma_m = 1.0;

  std::string label() const;
};

// intercept + x'slope + sum of step trees
struct Surface {
  double intercept = 0.0;
  Eigen::VectorXd slope;
  std::vector<DecisionTree> steps;

  double operator()(const Eigen::MatrixXd& X, Eigen::Index row) const;
};

struct GroundTruth {
  TruthSpec spec;
  std::size_t covariates = 0;
  Surface mu, zeta, d, mu_m, tau_m;
  Surface propensity;  // probit index of P(A = 1 | x)

  std::vector<double> zeta_at(const Eigen::MatrixXd& X) const;
  std::vector<double> delta_at(const Eigen::MatrixXd& X) const;  // tau_m(x) d(x)
};

// Five continuous (three standard normal, two uniform) and three binary columns.
inline constexpr std::size_t kSimCovariates = 8;
Eigen::MatrixXd sample_covariates(std::size_t n, Rng& rng);
std::vector<std::string> simulation_covariate_names();

GroundTruth make_ground_truth(const TruthSpec& spec, Rng& rng);

struct SimDataset {
  MediationData data;
  std::vector<double> zeta, delta;  // true conditional effects at the rows
  double zeta_bar = 0.0, delta_bar = 0.0;
};

// Draws A, M, Y at fixed covariates. An arm with fewer than 10 units is
// redrawn once, then reported as a DataError.
SimDataset generate_outcomes(const GroundTruth& truth, const Eigen::MatrixXd& X, Rng& rng);
SimDataset generate_dataset(const GroundTruth& truth, std::size_t n, Rng& rng);

enum class SimMethod { kBcmf, kLsem };
const char* to_string(SimMethod method);
SimMethod parse_sim_method(const std::string& text);

// BCMF settings used by the harness: one chain of 500 + 500 iterations.
BCMFConfig desk_scale_bcmf_config();

struct StudySpec {
  std::vector<TruthSpec> truths{TruthSpec{}};
  std::vector<SimMethod> methods{SimMethod::kBcmf, SimMethod::kLsem};
  std::size_t n_train = 500;
  std::size_t n_test = 500;
  std::size_t replications = 100;
  std::size_t bootstrap = 200;
  std::uint64_t seed = 1;
  BCMFConfig bcmf = desk_scale_bcmf_config();
  CartSummaryConfig dynamic_cart{2, std::nullopt};
  std::size_t threads = 1;

  void validate() const;
};

// One scored target. Per-row targets use the test rows; averages and
// subgroups use the training rows. `index` is the row or group number, -1
// for averages.
struct SimRecord {
  std::size_t replication = 0;
  std::string setting;
  std::string method;
  std::string target;
  long index = -1;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double truth = 0.0;
  bool covered = false;
  double length = 0.0;
};

struct SimAggregate {
  std::string setting, method, target;
  std::size_t count = 0;
  double coverage = 0.0;
  double rmse = 0.0;
  double bias = 0.0;  // |mean(estimate - truth)|
  double length = 0.0;
};

// Held-out accuracy of one replication for one per-row target.
struct HeldOutMetric {
  std::size_t replication = 0;
  std::string setting, method, target;
  double rmse = 0.0;
  double correlation = 0.0;
};

struct SimFailure {
  std::size_t replication = 0;
  std::string setting, method, message;
};

struct SimReport {
  std::string label;  // states the desk-scale nature of the study
  std::vector<SimRecord> records;
  std::vector<SimAggregate> aggregates;
  std::vector<HeldOutMetric> held_out;
  std::vector<SimFailure> failures;
};

std::vector<SimAggregate> aggregate_records(const std::vector<SimRecord>& records);

// Scores one interval estimate.
SimRecord score_target(double estimate, double lower, double upper, double truth);

SimReport run_study(const StudySpec& spec);

}  // namespace bcmf
