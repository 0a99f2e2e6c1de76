#include "bcmf/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <tuple>

#include "bcmf/effects.hpp"
#include "bcmf/error.hpp"
#include "bcmf/lsem.hpp"
#include "bcmf/numeric.hpp"
#include "bcmf/random.hpp"

namespace bcmf {

const char* to_string(TruthKind kind) {
  switch (kind) {
    case TruthKind::kBcmfLike:
      return "bcmf-like";
    case TruthKind::kLsem:
      return "lsem";
    case TruthKind::kSparseLinear:
      return "sparse-linear";
  }
  return "?";
}

TruthKind parse_truth_kind(const std::string& text) {
  if (text == "bcmf-like") return TruthKind::kBcmfLike;
  if (text == "lsem") return TruthKind::kLsem;
  if (text == "sparse-linear") return TruthKind::kSparseLinear;
  throw ConfigError("unknown truth kind '" + text + "' (expected bcmf-like, lsem or sparse-linear)");
}

std::string TruthSpec::label() const {
  std::string out = to_string(kind);
  if (null_effects) out += "/null";
  else if (homogeneous) out += "/homogeneous";
  return out;
}

const char* to_string(SimMethod method) { return method == SimMethod::kBcmf ? "bcmf" : "lsem"; }

SimMethod parse_sim_method(const std::string& text) {
  if (text == "bcmf") return SimMethod::kBcmf;
  if (text == "lsem") return SimMethod::kLsem;
  throw ConfigError("unknown method '" + text + "' (expected bcmf or lsem)");
}

double Surface::operator()(const Eigen::MatrixXd& X, Eigen::Index row) const {
  double v = intercept;
  if (slope.size() > 0) v += X.row(row).dot(slope);
  for (const auto& tree : steps) v += tree.node(tree.find_leaf(X, row)).value;
  return v;
}

std::vector<double> GroundTruth::zeta_at(const Eigen::MatrixXd& X) const {
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = zeta(X, i);
  return out;
}

std::vector<double> GroundTruth::delta_at(const Eigen::MatrixXd& X) const {
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = tau_m(X, i) * d(X, i);
  return out;
}

Eigen::MatrixXd sample_covariates(std::size_t n, Rng& rng) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kSimCovariates));
  constexpr double rates[3] = {0.3, 0.5, 0.7};
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
    for (int j = 3; j < 5; ++j) X(i, j) = rng.uniform();
    for (int j = 0; j < 3; ++j) X(i, 5 + j) = rng.uniform() < rates[j] ? 1.0 : 0.0;
  }
  return X;
}

std::vector<std::string> simulation_covariate_names() {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= kSimCovariates; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

namespace {

double random_cut(std::uint32_t var, Rng& rng) {
  if (var < 3) return 0.7 * rng.normal();
  if (var < 5) return 0.2 + 0.6 * rng.uniform();
  return 0.5;
}

// Depth <= 2 step function with N(0, amplitude^2) leaf values.
DecisionTree random_step_tree(double amplitude, Rng& rng) {
  DecisionTree tree(kSimCovariates);
  const auto rule = [&] {
    const auto var = static_cast<std::uint32_t>(rng.index(kSimCovariates));
    return SplitRule{var, random_cut(var, rng)};
  };
  const auto [l, r] = tree.split(tree.root(), rule(), amplitude * rng.normal(), amplitude * rng.normal());
  for (auto child : {l, r}) {
    if (rng.uniform() < 0.5) tree.split(child, rule(), amplitude * rng.normal(), amplitude * rng.normal());
  }
  return tree;
}

Surface linear_surface(double intercept, double slope_sd, Rng& rng) {
  Surface s;
  s.intercept = intercept;
  s.slope = Eigen::VectorXd::Zero(kSimCovariates);
  for (Eigen::Index j = 0; j < s.slope.size(); ++j) s.slope(j) = slope_sd * rng.normal();
  return s;
}

Surface step_surface(double intercept, std::size_t trees, double amplitude, Rng& rng) {
  Surface s;
  s.intercept = intercept;
  for (std::size_t k = 0; k < trees; ++k) s.steps.push_back(random_step_tree(amplitude, rng));
  return s;
}

}  // namespace

GroundTruth make_ground_truth(const TruthSpec& spec, Rng& rng) {
  if (!(spec.sigma_y >= 0.0 && spec.sigma_m >= 0.0)) throw ConfigError("truth noise sds must be nonnegative");
  GroundTruth t;
  t.spec = spec;
  t.covariates = kSimCovariates;
  // Confounded assignment: x1 drives both treatment and the prognostic surfaces.
  t.propensity.intercept = -0.2;
  t.propensity.slope = Eigen::VectorXd::Zero(kSimCovariates);
  t.propensity.slope(0) = 0.4;
  t.propensity.slope(5) = -0.3;

  if (spec.kind == TruthKind::kBcmfLike) {
    t.mu = step_surface(1.0, 3, 0.8, rng);
    t.mu.slope = Eigen::VectorXd::Zero(kSimCovariates);
    t.mu.slope(0) = 0.5;
    t.zeta = step_surface(0.3, 1, 0.1, rng);
    t.d = step_surface(0.3, 1, 0.05, rng);
    t.mu_m = step_surface(0.2, 3, 0.5, rng);
    t.mu_m.slope = Eigen::VectorXd::Zero(kSimCovariates);
    t.mu_m.slope(0) = 0.3;
    t.tau_m = step_surface(0.4, 1, 0.1, rng);
  } else {
    t.mu = linear_surface(1.0, 0.3, rng);
    t.mu.slope(0) = 0.5;
    t.zeta = linear_surface(0.5, 0.1, rng);
    t.d = linear_surface(0.3, 0.05, rng);
    t.mu_m = linear_surface(0.2, 0.3, rng);
    t.mu_m.slope(0) = 0.3;
    t.tau_m = linear_surface(0.4, 0.1, rng);
    if (spec.kind == TruthKind::kSparseLinear) {
      // 80% of the moderator slopes set to zero.
      const std::size_t total = 3 * kSimCovariates;
      std::vector<std::size_t> order(total);
      for (std::size_t k = 0; k < total; ++k) order[k] = k;
      for (std::size_t k = total - 1; k > 0; --k) std::swap(order[k], order[rng.index(k + 1)]);
      const auto zeroed = static_cast<std::size_t>(std::lround(0.8 * static_cast<double>(total)));
      Surface* blocks[3] = {&t.zeta, &t.d, &t.tau_m};
      for (std::size_t k = 0; k < zeroed; ++k) {
        blocks[order[k] / kSimCovariates]->slope(static_cast<Eigen::Index>(order[k] % kSimCovariates)) = 0.0;
      }
    }
  }
  if (spec.homogeneous || spec.null_effects) {
    for (Surface* s : {&t.zeta, &t.d, &t.tau_m}) {
      s->slope = Eigen::VectorXd();
      s->steps.clear();
    }
  }
  if (spec.null_effects) {
    t.zeta.intercept = 0.0;
    t.tau_m.intercept = 0.0;
  }
  return t;
}

SimDataset generate_outcomes(const GroundTruth& truth, const Eigen::MatrixXd& X, Rng& rng) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n < 50) throw InvalidArgument("simulated datasets need at least 50 rows");
  if (static_cast<std::size_t>(X.cols()) != truth.covariates) throw InvalidArgument("covariate count mismatch");
  SimDataset out;
  auto& data = out.data;
  data.X = X;
  data.covariate_names = simulation_covariate_names();
  data.a.resize(n);
  for (int attempt = 0;; ++attempt) {
    std::size_t treated = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = normal_cdf(truth.propensity(X, static_cast<Eigen::Index>(i)));
      data.a[i] = rng.uniform() < p ? 1.0 : 0.0;
      treated += data.a[i] == 1.0;
    }
    if (treated >= kMinArmSize && n - treated >= kMinArmSize) break;
    if (attempt == 1) throw DataError("simulated treatment assignment left an arm with fewer than 10 units");
  }
  data.m.resize(n);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    data.m[i] = truth.mu_m(X, r) + data.a[i] * truth.tau_m(X, r) + truth.spec.sigma_m * rng.normal();
    data.y[i] = truth.mu(X, r) + data.a[i] * truth.zeta(X, r) + data.m[i] * truth.d(X, r) +
                truth.spec.sigma_y * rng.normal();
  }
  out.zeta = truth.zeta_at(X);
  out.delta = truth.delta_at(X);
  out.zeta_bar = mean(out.zeta);
  out.delta_bar = mean(out.delta);
  return out;
}

SimDataset generate_dataset(const GroundTruth& truth, std::size_t n, Rng& rng) {
  const Eigen::MatrixXd X = sample_covariates(n, rng);
  return generate_outcomes(truth, X, rng);
}

BCMFConfig desk_scale_bcmf_config() {
  BCMFConfig cfg;
  cfg.n_chains = 1;
  cfg.burn_in = 500;
  cfg.n_samples = 500;
  return cfg;
}

void StudySpec::validate() const {
  if (truths.empty()) throw ConfigError("study needs at least one truth");
  if (methods.empty()) throw ConfigError("study needs at least one method");
  if (n_train < 50) throw ConfigError("study n_train must be at least 50");
  if (replications < 1) throw ConfigError("study needs at least one replication");
  if (bootstrap < 100) throw ConfigError("bootstrap replicates must be at least 100");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  bcmf.validate();
  dynamic_cart.validate();
}

SimRecord score_target(double estimate, double lower, double upper, double truth) {
  SimRecord r;
  r.estimate = estimate;
  r.lower = lower;
  r.upper = upper;
  r.truth = truth;
  r.covered = lower <= truth && truth <= upper;
  r.length = upper - lower;
  return r;
}

std::vector<SimAggregate> aggregate_records(const std::vector<SimRecord>& records) {
  struct Acc {
    std::size_t count = 0;
    double covered = 0, sq = 0, err = 0, length = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Acc> acc;
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.setting, r.method, r.target);
    auto [it, fresh] = acc.try_emplace(key);
    if (fresh) order.push_back(key);
    auto& a = it->second;
    const double e = r.estimate - r.truth;
    ++a.count;
    a.covered += r.covered;
    a.sq += e * e;
    a.err += e;
    a.length += r.length;
  }
  std::vector<SimAggregate> out;
  for (const auto& key : order) {
    const auto& a = acc.at(key);
    const double c = static_cast<double>(a.count);
    SimAggregate g;
    std::tie(g.setting, g.method, g.target) = key;
    g.count = a.count;
    g.coverage = a.covered / c;
    g.rmse = std::sqrt(a.sq / c);
    g.bias = std::abs(a.err / c);
    g.length = a.length / c;
    out.push_back(g);
  }
  return out;
}

namespace {

struct JobResult {
  std::vector<SimRecord> records;
  std::vector<HeldOutMetric> held_out;
  std::vector<SimFailure> failures;
};

struct Interval {
  double mean, lower, upper;
};

Interval interval_of(std::span<const double> draws) {
  const auto s = summarize_draws(draws);
  return {s.mean, s.lower, s.upper};
}

std::vector<double> column(const DrawMatrix& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

std::vector<int> fixed_groups(const Eigen::MatrixXd& X) {
  std::vector<int> labels(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    labels[static_cast<std::size_t>(i)] = 2 * static_cast<int>(X(i, 5)) + (X(i, 0) > 0.0 ? 1 : 0);
  }
  return labels;
}

std::vector<double> group_truth(std::span<const double> truth, std::span<const int> labels, std::size_t groups) {
  std::vector<double> sum(groups, 0.0), count(groups, 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sum[static_cast<std::size_t>(labels[i])] += truth[i];
    count[static_cast<std::size_t>(labels[i])] += 1.0;
  }
  for (std::size_t g = 0; g < groups; ++g) sum[g] /= count[g];
  return sum;
}

class Scorer {
 public:
  Scorer(JobResult& out, std::size_t rep, std::string setting, std::string method)
      : out_(out), rep_(rep), setting_(std::move(setting)), method_(std::move(method)) {}

  void add(const std::string& target, long index, double estimate, double lower, double upper, double truth) {
    SimRecord r = score_target(estimate, lower, upper, truth);
    r.replication = rep_;
    r.setting = setting_;
    r.method = method_;
    r.target = target;
    r.index = index;
    out_.records.push_back(std::move(r));
  }

  void held_out(const std::string& target, std::span<const double> estimate, std::span<const double> truth) {
    double sq = 0;
    for (std::size_t i = 0; i < estimate.size(); ++i) sq += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
    out_.held_out.push_back({rep_, setting_, method_, target, std::sqrt(sq / static_cast<double>(estimate.size())),
                             correlation(estimate, truth)});
  }

 private:
  JobResult& out_;
  std::size_t rep_;
  std::string setting_, method_;
};

// Per-draw effects for the grouped targets: draws x groups matrices.
void score_groups(Scorer& sc, const std::string& suffix, const DrawMatrix& zeta_g, const DrawMatrix& delta_g,
                  const std::vector<double>& zeta_hat, const std::vector<double>& delta_hat,
                  const std::vector<double>& zeta_truth, const std::vector<double>& delta_truth) {
  for (Eigen::Index g = 0; g < zeta_g.cols(); ++g) {
    const auto u = static_cast<std::size_t>(g);
    const Interval z = interval_of(column(zeta_g, g));
    const Interval d = interval_of(column(delta_g, g));
    sc.add("zeta_group_" + suffix, static_cast<long>(g), zeta_hat[u], z.lower, z.upper, zeta_truth[u]);
    sc.add("delta_group_" + suffix, static_cast<long>(g), delta_hat[u], d.lower, d.upper, delta_truth[u]);
  }
}

void run_bcmf(const StudySpec& spec, const SimDataset& ds, const Eigen::MatrixXd& X_test,
              const std::vector<double>& zeta_test, const std::vector<double>& delta_test, Rng& rng, Scorer& sc) {
  BCMFConfig cfg = spec.bcmf;
  cfg.seed = rng.next_seed();
  cfg.store_forests = false;
  const MediationFit fit = fit_bcmf(ds.data, cfg, &X_test);
  const EffectDraws test = conditional_effects(fit, true);
  const EffectDraws train = conditional_effects(fit, false);

  std::vector<double> zeta_mean(X_test.rows()), delta_mean(X_test.rows());
  for (Eigen::Index i = 0; i < X_test.rows(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const Interval z = interval_of(column(test.zeta, i));
    const Interval d = interval_of(column(test.delta, i));
    zeta_mean[u] = z.mean;
    delta_mean[u] = d.mean;
    sc.add("zeta_row", static_cast<long>(i), z.mean, z.lower, z.upper, zeta_test[u]);
    sc.add("delta_row", static_cast<long>(i), d.mean, d.lower, d.upper, delta_test[u]);
  }
  sc.held_out("zeta_row", zeta_mean, zeta_test);
  sc.held_out("delta_row", delta_mean, delta_test);

  const AverageDraws avg = bayesian_bootstrap_averages(train, rng);
  const Interval za = interval_of(avg.zeta), da = interval_of(avg.delta);
  sc.add("zeta_avg", -1, za.mean, za.lower, za.upper, ds.zeta_bar);
  sc.add("delta_avg", -1, da.mean, da.lower, da.upper, ds.delta_bar);

  const auto fixed = fixed_groups(ds.data.X);
  const GroupDraws gf = subgroup_averages(train, fixed, 4);
  const auto means = [](const DrawMatrix& m) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m.col(c).mean();
    return v;
  };
  score_groups(sc, "fixed", gf.zeta, gf.delta, means(gf.zeta), means(gf.delta), group_truth(ds.zeta, fixed, 4),
               group_truth(ds.delta, fixed, 4));

  const Eigen::VectorXd delta_post = train.delta.colwise().mean().transpose();
  const CartSummary cart =
      cart_projection(std::span<const double>(delta_post.data(), ds.data.rows()), ds.data.X, spec.dynamic_cart);
  const GroupDraws gd = subgroup_averages(train, cart.leaf_of, cart.tree.leaves);
  score_groups(sc, "dynamic", gd.zeta, gd.delta, means(gd.zeta), means(gd.delta),
               group_truth(ds.zeta, cart.leaf_of, cart.tree.leaves), group_truth(ds.delta, cart.leaf_of, cart.tree.leaves));
}

void run_lsem(const StudySpec& spec, const SimDataset& ds, const Eigen::MatrixXd& X_test,
              const std::vector<double>& zeta_test, const std::vector<double>& delta_test, Rng& rng, Scorer& sc) {
  const Eigen::Index n_test = X_test.rows(), n_train = ds.data.X.rows();
  Eigen::MatrixXd X_eval(n_test + n_train, X_test.cols());
  X_eval.topRows(n_test) = X_test;
  X_eval.bottomRows(n_train) = ds.data.X;
  const LsemBootstrap bs = lsem_residual_bootstrap(ds.data, spec.bootstrap, rng, &X_eval);

  for (Eigen::Index i = 0; i < n_test; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const Interval z = interval_of(column(bs.zeta, i));
    const Interval d = interval_of(column(bs.delta, i));
    sc.add("zeta_row", static_cast<long>(i), bs.zeta_hat[u], z.lower, z.upper, zeta_test[u]);
    sc.add("delta_row", static_cast<long>(i), bs.delta_hat[u], d.lower, d.upper, delta_test[u]);
  }
  sc.held_out("zeta_row", std::span(bs.zeta_hat).first(static_cast<std::size_t>(n_test)), zeta_test);
  sc.held_out("delta_row", std::span(bs.delta_hat).first(static_cast<std::size_t>(n_test)), delta_test);

  const Interval za = interval_of(bs.zeta_bar), da = interval_of(bs.delta_bar);
  sc.add("zeta_avg", -1, bs.zeta_bar_hat, za.lower, za.upper, ds.zeta_bar);
  sc.add("delta_avg", -1, bs.delta_bar_hat, da.lower, da.upper, ds.delta_bar);

  EffectDraws train;
  train.zeta = bs.zeta.rightCols(n_train);
  train.delta = bs.delta.rightCols(n_train);
  train.tau = train.zeta + train.delta;
  const std::vector<double> zeta_hat(bs.zeta_hat.begin() + n_test, bs.zeta_hat.end());
  const std::vector<double> delta_hat(bs.delta_hat.begin() + n_test, bs.delta_hat.end());
  const auto group_hat = [](const std::vector<double>& v, const std::vector<int>& labels, std::size_t g) {
    return group_truth(v, labels, g);
  };

  const auto fixed = fixed_groups(ds.data.X);
  const GroupDraws gf = subgroup_averages(train, fixed, 4);
  score_groups(sc, "fixed", gf.zeta, gf.delta, group_hat(zeta_hat, fixed, 4), group_hat(delta_hat, fixed, 4),
               group_truth(ds.zeta, fixed, 4), group_truth(ds.delta, fixed, 4));

  const CartSummary cart = cart_projection(delta_hat, ds.data.X, spec.dynamic_cart);
  const std::size_t g = cart.tree.leaves;
  const GroupDraws gd = subgroup_averages(train, cart.leaf_of, g);
  score_groups(sc, "dynamic", gd.zeta, gd.delta, group_hat(zeta_hat, cart.leaf_of, g),
               group_hat(delta_hat, cart.leaf_of, g), group_truth(ds.zeta, cart.leaf_of, g),
               group_truth(ds.delta, cart.leaf_of, g));
}

}  // namespace

SimReport run_study(const StudySpec& spec) {
  spec.validate();
  Rng design = derive_stream(spec.seed, 0);
  const Eigen::MatrixXd X_train = sample_covariates(spec.n_train, design);
  const Eigen::MatrixXd X_test = sample_covariates(spec.n_test, design);

  std::vector<GroundTruth> truths;
  for (std::size_t t = 0; t < spec.truths.size(); ++t) {
    Rng truth_rng = derive_stream(spec.seed, 1 + t);
    truths.push_back(make_ground_truth(spec.truths[t], truth_rng));
  }

  const std::size_t jobs = truths.size() * spec.replications;
  std::vector<JobResult> results(jobs);
  const auto run_job = [&](std::size_t job) {
    const std::size_t t = job / spec.replications, rep = job % spec.replications;
    const GroundTruth& truth = truths[t];
    const std::string setting = truth.spec.label();
    JobResult& out = results[job];
    Rng rng(spec.seed, ((t + 1) << 32) | rep);
    SimDataset ds;
    try {
      ds = generate_outcomes(truth, X_train, rng);
    } catch (const std::exception& e) {
      out.failures.push_back({rep, setting, "data", e.what()});
      return;
    }
    const auto zeta_test = truth.zeta_at(X_test);
    const auto delta_test = truth.delta_at(X_test);
    for (SimMethod method : spec.methods) {
      Rng method_rng(rng.next_seed(), static_cast<std::uint64_t>(method));
      Scorer sc(out, rep, setting, to_string(method));
      const std::size_t before = out.records.size(), held_before = out.held_out.size();
      try {
        if (method == SimMethod::kBcmf) {
          run_bcmf(spec, ds, X_test, zeta_test, delta_test, method_rng, sc);
        } else {
          run_lsem(spec, ds, X_test, zeta_test, delta_test, method_rng, sc);
        }
      } catch (const std::exception& e) {
        out.records.resize(before);
        out.held_out.resize(held_before);
        out.failures.push_back({rep, setting, to_string(method), e.what()});
      }
    }
  };

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) run_job(job);
  };
  if (spec.threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < spec.threads; ++k) pool.emplace_back(worker);
  }

  SimReport report;
  report.label = "desk-scale analogue: synthetic covariates (5 continuous, 3 binary), n_train=" +
                 std::to_string(spec.n_train) + ", n_test=" + std::to_string(spec.n_test) +
                 ", replications=" + std::to_string(spec.replications) +
                 "; not comparable in absolute terms to full-scale studies";
  for (auto& r : results) {
    report.records.insert(report.records.end(), r.records.begin(), r.records.end());
    report.held_out.insert(report.held_out.end(), r.held_out.begin(), r.held_out.end());
    report.failures.insert(report.failures.end(), r.failures.begin(), r.failures.end());
  }
  report.aggregates = aggregate_records(report.records);
  return report;
}

}  // namespace bcmf
