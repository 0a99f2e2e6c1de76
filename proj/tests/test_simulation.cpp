#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"

#include "bcmf/error.hpp"
#include "bcmf/lsem.hpp"
#include "bcmf/numeric.hpp"
#include "bcmf/random.hpp"
#include "bcmf/simulation.hpp"

using namespace bcmf;

namespace {

GroundTruth lsem_truth(double sigma, std::uint64_t seed = 3) {
  TruthSpec spec;
  spec.kind = TruthKind::kLsem;
  spec.sigma_y = sigma;
  spec.sigma_m = sigma;
  Rng rng(seed);
  return make_ground_truth(spec, rng);
}

// Truth coefficients laid out like LsemFit::outcome_coef / mediator_coef.
Eigen::VectorXd stack(std::initializer_list<const Surface*> parts) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size() * (kSimCovariates + 1)));
  Eigen::Index k = 0;
  for (const Surface* s : parts) {
    v(k++) = s->intercept;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kSimCovariates); ++j) {
      v(k++) = s->slope.size() ? s->slope(j) : 0.0;
    }
  }
  return v;
}

StudySpec tiny_study() {
  StudySpec spec;
  TruthSpec t;
  t.kind = TruthKind::kSparseLinear;
  spec.truths = {t};
  spec.n_train = 80;
  spec.n_test = 30;
  spec.replications = 2;
  spec.bootstrap = 100;
  spec.seed = 11;
  spec.bcmf.burn_in = 20;
  spec.bcmf.n_samples = 20;
  spec.bcmf.auxiliary.burn_in = 20;
  spec.bcmf.auxiliary.n_samples = 20;
  spec.bcmf.mu.trees = 20;
  spec.bcmf.mu_m.trees = 20;
  return spec;
}

}  // namespace

TEST_CASE("noiseless lsem generation reproduces the linear formulas") {
  const GroundTruth truth = lsem_truth(0.0);
  Rng rng(5);
  const SimDataset ds = generate_dataset(truth, 200, rng);
  const auto& X = ds.data.X;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const Eigen::VectorXd x = X.row(i).transpose();
    const double a = ds.data.a[u];
    const double m = truth.mu_m.intercept + x.dot(truth.mu_m.slope) + a * (truth.tau_m.intercept + x.dot(truth.tau_m.slope));
    const double y = truth.mu.intercept + x.dot(truth.mu.slope) + a * (truth.zeta.intercept + x.dot(truth.zeta.slope)) +
                     m * (truth.d.intercept + x.dot(truth.d.slope));
    CHECK(ds.data.m[u] == doctest::Approx(m).epsilon(1e-13));
    CHECK(ds.data.y[u] == doctest::Approx(y).epsilon(1e-13));
    CHECK(ds.delta[u] == doctest::Approx((truth.tau_m.intercept + x.dot(truth.tau_m.slope)) *
                                         (truth.d.intercept + x.dot(truth.d.slope))).epsilon(1e-13));
  }
  CHECK(ds.delta_bar == doctest::Approx(mean(ds.delta)).epsilon(1e-15));
}

TEST_CASE("null truth removes the mediated path") {
  TruthSpec spec;
  spec.kind = TruthKind::kBcmfLike;
  spec.null_effects = true;
  Rng rng(2);
  const GroundTruth truth = make_ground_truth(spec, rng);
  const SimDataset ds = generate_dataset(truth, 300, rng);
  for (std::size_t i = 0; i < ds.delta.size(); ++i) {
    CHECK(ds.delta[i] == 0.0);
    CHECK(ds.zeta[i] == 0.0);
  }
}

TEST_CASE("outcome noise has the configured sd") {
  TruthSpec spec;
  spec.kind = TruthKind::kBcmfLike;
  spec.sigma_y = 1.5;
  spec.sigma_m = 0.7;
  Rng rng(8);
  const GroundTruth truth = make_ground_truth(spec, rng);
  const SimDataset ds = generate_dataset(truth, 10000, rng);
  std::vector<double> ey, em;
  for (Eigen::Index i = 0; i < ds.data.X.rows(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double a = ds.data.a[u];
    ey.push_back(ds.data.y[u] - (truth.mu(ds.data.X, i) + a * truth.zeta(ds.data.X, i) + ds.data.m[u] * truth.d(ds.data.X, i)));
    em.push_back(ds.data.m[u] - (truth.mu_m(ds.data.X, i) + a * truth.tau_m(ds.data.X, i)));
  }
  CHECK(std::abs(std::sqrt(sample_variance(ey)) / 1.5 - 1.0) < 0.05);
  CHECK(std::abs(std::sqrt(sample_variance(em)) / 0.7 - 1.0) < 0.05);
}

TEST_CASE("one-sided assignment is redrawn once and then rejected") {
  GroundTruth truth = lsem_truth(1.0);
  truth.propensity.intercept = 50.0;
  Rng rng(1);
  CHECK_THROWS_AS(generate_dataset(truth, 100, rng), DataError);
}

TEST_CASE("sparse-linear truth zeroes 80% of the moderator slopes") {
  TruthSpec spec;
  spec.kind = TruthKind::kSparseLinear;
  Rng rng(4);
  const GroundTruth truth = make_ground_truth(spec, rng);
  int zero = 0;
  for (const Surface* s : {&truth.zeta, &truth.d, &truth.tau_m}) {
    for (Eigen::Index j = 0; j < s->slope.size(); ++j) zero += s->slope(j) == 0.0;
  }
  CHECK(zero == 19);  // round(0.8 * 24)
}

// With sigma_m = 0 the mediator is an exact linear combination of the
// outcome design's [1, x, A, A x] columns, so each equation is checked with
// only its own noise switched off.
TEST_CASE("noiseless lsem equations recover their coefficients") {
  for (int eq = 0; eq < 2; ++eq) {
    TruthSpec spec;
    spec.kind = TruthKind::kLsem;
    spec.sigma_y = eq == 0 ? 0.0 : 1.0;
    spec.sigma_m = eq == 0 ? 1.0 : 0.0;
    Rng rng(3);
    const GroundTruth truth = make_ground_truth(spec, rng);
    const SimDataset ds = generate_dataset(truth, 300, rng);
    const LsemFit fit = fit_lsem(ds.data);
    if (eq == 0) {
      CHECK_FALSE(fit.ridge);
      const Eigen::VectorXd outcome = stack({&truth.mu, &truth.zeta, &truth.d});
      CHECK((fit.outcome_coef - outcome).cwiseAbs().maxCoeff() < 1e-8);
    } else {
      const Eigen::VectorXd mediator = stack({&truth.mu_m, &truth.tau_m});
      CHECK((fit.mediator_coef - mediator).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("fully noiseless data falls back to the flagged ridge") {
  const GroundTruth truth = lsem_truth(0.0);
  Rng rng(6);
  const SimDataset ds = generate_dataset(truth, 300, rng);
  CHECK(fit_lsem(ds.data).ridge);
}

TEST_CASE("x-free effects give a constant zeta estimate") {
  TruthSpec spec;
  spec.kind = TruthKind::kLsem;
  spec.homogeneous = true;
  spec.sigma_y = 0.0;
  spec.sigma_m = 1.0;
  Rng rng(7);
  const GroundTruth truth = make_ground_truth(spec, rng);
  const SimDataset ds = generate_dataset(truth, 200, rng);
  const LsemFit fit = fit_lsem(ds.data);
  for (double z : fit.zeta(ds.data.X)) CHECK(z == doctest::Approx(truth.zeta.intercept).epsilon(1e-9));
}

TEST_CASE("lsem effects equal the product formula recomputed from coefficients") {
  const GroundTruth truth = lsem_truth(1.0);
  Rng rng(9);
  const SimDataset ds = generate_dataset(truth, 250, rng);
  const LsemFit fit = fit_lsem(ds.data);
  const auto p = static_cast<Eigen::Index>(kSimCovariates);
  const auto& oc = fit.outcome_coef;
  const auto& mc = fit.mediator_coef;
  const auto zeta = fit.zeta(ds.data.X);
  const auto delta = fit.delta(ds.data.X);
  for (Eigen::Index i = 0; i < ds.data.X.rows(); ++i) {
    double g = oc(p + 1), xi = oc(2 * p + 2), gm = mc(p + 1);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double x = ds.data.X(i, j);
      g += x * oc(p + 2 + j);
      xi += x * oc(2 * p + 3 + j);
      gm += x * mc(p + 2 + j);
    }
    CHECK(zeta[static_cast<std::size_t>(i)] == doctest::Approx(g).epsilon(1e-12));
    CHECK(delta[static_cast<std::size_t>(i)] == doctest::Approx(gm * xi).epsilon(1e-12));
  }
}

TEST_CASE("residual bootstrap on noiseless data has zero-width intervals") {
  const GroundTruth truth = lsem_truth(0.0);
  Rng rng(10);
  const SimDataset ds = generate_dataset(truth, 200, rng);
  const LsemBootstrap bs = lsem_residual_bootstrap(ds.data, 100, rng);
  // Fully noiseless data is collinear (see above), so the fit is the flagged
  // ridge and its residuals are O(1e-6) rather than exactly zero.
  CHECK(bs.ridge_refits == 100);
  for (Eigen::Index c = 0; c < bs.delta.cols(); ++c) {
    CHECK(bs.delta.col(c).maxCoeff() - bs.delta.col(c).minCoeff() < 1e-6);
    CHECK(bs.zeta.col(c).maxCoeff() - bs.zeta.col(c).minCoeff() < 1e-6);
  }
  const auto [lo, hi] = std::minmax_element(bs.delta_bar.begin(), bs.delta_bar.end());
  CHECK(*hi - *lo < 1e-6);
}

TEST_CASE("bootstrap intervals contain the point estimate") {
  const GroundTruth truth = lsem_truth(1.0);
  Rng rng(12);
  const SimDataset ds = generate_dataset(truth, 300, rng);
  const LsemBootstrap bs = lsem_residual_bootstrap(ds.data, 200, rng);
  std::size_t inside = 0, total = 0;
  const auto check = [&](const DrawMatrix& draws, const std::vector<double>& hat) {
    for (Eigen::Index c = 0; c < draws.cols(); ++c) {
      std::vector<double> col(static_cast<std::size_t>(draws.rows()));
      for (Eigen::Index r = 0; r < draws.rows(); ++r) col[static_cast<std::size_t>(r)] = draws(r, c);
      const auto s = summarize_draws(col);
      inside += s.lower <= hat[static_cast<std::size_t>(c)] && hat[static_cast<std::size_t>(c)] <= s.upper;
      ++total;
    }
  };
  check(bs.zeta, bs.zeta_hat);
  check(bs.delta, bs.delta_hat);
  CHECK(static_cast<double>(inside) >= 0.99 * static_cast<double>(total));
}

TEST_CASE("scorer identities") {
  const SimRecord r = score_target(0.4, 0.1, 0.9, 0.5);
  CHECK(r.covered);
  CHECK(r.length == doctest::Approx(0.8));
  CHECK_FALSE(score_target(0.4, 0.1, 0.3, 0.5).covered);

  std::vector<SimRecord> all;
  Rng rng(13);
  for (int k = 0; k < 50; ++k) {
    const double t = rng.normal();
    SimRecord x = score_target(t + 0.1 * rng.normal(), t - 1.0, t + 1.0, t);
    x.setting = "s";
    x.method = "m";
    x.target = "delta_row";
    all.push_back(x);
  }
  const auto agg = aggregate_records(all);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].coverage == 1.0);
  CHECK(agg[0].length == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(agg[0].rmse >= agg[0].bias);
}

TEST_CASE("study aggregates match a single-pass recomputation and replay exactly") {
  const StudySpec spec = tiny_study();
  const SimReport a = run_study(spec);
  CHECK(a.failures.empty());
  CHECK(a.label.find("desk-scale") != std::string::npos);

  // Independent recomputation: running sums keyed by a joined string.
  struct Sums {
    double n = 0, cov = 0, e = 0, e2 = 0, len = 0;
  };
  std::map<std::string, Sums> sums;
  for (const auto& r : a.records) {
    auto& s = sums[r.setting + "|" + r.method + "|" + r.target];
    s.n += 1;
    s.cov += r.covered ? 1 : 0;
    s.e += r.estimate - r.truth;
    s.e2 += (r.estimate - r.truth) * (r.estimate - r.truth);
    s.len += r.upper - r.lower;
  }
  REQUIRE(sums.size() == a.aggregates.size());
  for (const auto& g : a.aggregates) {
    const Sums& s = sums.at(g.setting + "|" + g.method + "|" + g.target);
    CHECK(std::abs(g.coverage - s.cov / s.n) <= 1e-12);
    CHECK(std::abs(g.bias - std::abs(s.e / s.n)) <= 1e-12);
    CHECK(std::abs(g.rmse - std::sqrt(s.e2 / s.n)) <= 1e-12);
    CHECK(std::abs(g.length - s.len / s.n) <= 1e-12);
    CHECK(g.coverage >= 0.0);
    CHECK(g.coverage <= 1.0);
    CHECK(g.rmse >= g.bias);
  }

  const SimReport b = run_study(spec);
  REQUIRE(a.records.size() == b.records.size());
  bool same = true;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    same = same && a.records[i].estimate == b.records[i].estimate && a.records[i].lower == b.records[i].lower &&
           a.records[i].upper == b.records[i].upper && a.records[i].truth == b.records[i].truth;
  }
  CHECK(same);
}
