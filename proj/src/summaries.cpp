#include "bcmf/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>

#include "bcmf/error.hpp"
#include "bcmf/numeric.hpp"

namespace bcmf {

RSquared summary_r_squared(std::span<const double> values, std::span<const double> fitted) {
  if (values.size() != fitted.size()) throw InvalidArgument("summary_r_squared: length mismatch");
  if (values.empty()) throw InvalidArgument("summary_r_squared: no values");
  const double center = mean(values);
  double resid = 0.0, total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    resid += (values[i] - fitted[i]) * (values[i] - fitted[i]);
    total += (values[i] - center) * (values[i] - center);
  }
  if (total == 0.0) return {0.0, true};
  return {1.0 - resid / total, false};
}

// ---------------------------------------------------------------------------
// CART

std::size_t CartSummaryConfig::resolved_min_leaf(std::size_t n) const {
  return min_leaf ? *min_leaf : std::max<std::size_t>(20, n / 100);
}

void CartSummaryConfig::validate() const {
  if (max_depth < 1) throw ConfigError("CART max_depth must be at least 1");
  if (min_leaf && *min_leaf < 1) throw ConfigError("CART min_leaf must be at least 1");
}

int CartTree::leaf_of(const Eigen::MatrixXd& X, Eigen::Index row) const {
  int id = 0;
  while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    id = X(row, n.variable) <= n.cutpoint ? n.left : n.right;
  }
  return id;
}

double CartTree::predict(const Eigen::MatrixXd& X, Eigen::Index row) const {
  return nodes[static_cast<std::size_t>(leaf_of(X, row))].value;
}

namespace {

class CartBuilder {
 public:
  CartBuilder(std::span<const double> values, const Eigen::MatrixXd& X, std::size_t max_depth, std::size_t min_leaf)
      : values_(values), X_(X), max_depth_(max_depth), min_leaf_(min_leaf) {}

  int build(std::vector<Eigen::Index> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sum = 0.0;
    for (auto r : rows) sum += values_[static_cast<std::size_t>(r)];
    const double node_mean = sum / static_cast<double>(rows.size());
    {
      auto& node = tree.nodes.back();
      node.depth = depth;
      node.count = rows.size();
      node.value = node_mean;
    }

    const std::size_t n = rows.size();
    if (static_cast<std::size_t>(depth) < max_depth_ && n >= 2 * min_leaf_) {
      double node_sse = 0.0;
      for (auto r : rows) {
        const double c = values_[static_cast<std::size_t>(r)] - node_mean;
        node_sse += c * c;
      }
      const double tol = 1e-12 * (1.0 + node_sse);
      double best = node_sse - tol;
      int best_var = -1;
      double best_cut = 0.0;
      std::vector<Eigen::Index> order = rows;
      for (Eigen::Index j = 0; j < X_.cols(); ++j) {
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return X_(a, j) < X_(b, j); });
        double total_s = 0.0, total_s2 = 0.0;
        for (auto r : order) {
          const double c = values_[static_cast<std::size_t>(r)] - node_mean;
          total_s += c;
          total_s2 += c * c;
        }
        double s = 0.0, s2 = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
          const double c = values_[static_cast<std::size_t>(order[k])] - node_mean;
          s += c;
          s2 += c * c;
          const std::size_t nl = k + 1, nr = n - nl;
          if (nl < min_leaf_ || nr < min_leaf_) continue;
          const double x_here = X_(order[k], j), x_next = X_(order[k + 1], j);
          if (x_here == x_next) continue;
          const double sr = total_s - s, sr2 = total_s2 - s2;
          const double sse = (s2 - s * s / static_cast<double>(nl)) + (sr2 - sr * sr / static_cast<double>(nr));
          if (sse < best - tol) {
            best = sse;
            best_var = static_cast<int>(j);
            best_cut = x_here;
          }
        }
      }
      if (best_var >= 0) {
        std::vector<Eigen::Index> left, right;
        for (auto r : rows) (X_(r, best_var) <= best_cut ? left : right).push_back(r);
        const int l = build(std::move(left), depth + 1);
        const int rt = build(std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.variable = best_var;
        node.cutpoint = best_cut;
        node.left = l;
        node.right = rt;
        return id;
      }
    }
    tree.nodes[static_cast<std::size_t>(id)].leaf_id = static_cast<int>(tree.leaves++);
    return id;
  }

  CartTree tree;

 private:
  std::span<const double> values_;
  const Eigen::MatrixXd& X_;
  std::size_t max_depth_;
  std::size_t min_leaf_;
};

}  // namespace

CartSummary cart_projection(std::span<const double> values, const Eigen::MatrixXd& X, const CartSummaryConfig& cfg) {
  cfg.validate();
  const std::size_t n = values.size();
  if (n < 1) throw InvalidArgument("cart_projection: no values");
  if (static_cast<std::size_t>(X.rows()) != n) throw InvalidArgument("cart_projection: X rows differ from values");
  CartBuilder builder(values, X, cfg.max_depth, cfg.resolved_min_leaf(n));
  std::vector<Eigen::Index> rows(n);
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  builder.build(std::move(rows), 0);

  CartSummary out;
  out.tree = std::move(builder.tree);
  out.fitted.resize(n);
  out.leaf_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& leaf = out.tree.nodes[static_cast<std::size_t>(out.tree.leaf_of(X, static_cast<Eigen::Index>(i)))];
    out.fitted[i] = leaf.value;
    out.leaf_of[i] = leaf.leaf_id;
  }
  out.r_squared = summary_r_squared(values, out.fitted);
  return out;
}

std::string format_cart_tree(const CartTree& tree, const std::vector<std::string>& names) {
  std::ostringstream os;
  os.precision(6);
  const auto name = [&](int v) {
    return static_cast<std::size_t>(v) < names.size() ? names[static_cast<std::size_t>(v)] : "x" + std::to_string(v + 1);
  };
  const auto walk = [&](auto&& self, int id, int indent) -> void {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (node.is_leaf()) {
      os << pad << "leaf " << node.leaf_id << ": " << node.value << " (n=" << node.count << ")\n";
      return;
    }
    os << pad << name(node.variable) << " <= " << node.cutpoint << ":\n";
    self(self, node.left, indent + 1);
    os << pad << name(node.variable) << " > " << node.cutpoint << ":\n";
    self(self, node.right, indent + 1);
  };
  walk(walk, 0, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// Additive model

void AdditiveSummaryConfig::validate() const {
  if (knots_per_covariate < 1) throw ConfigError("GAM knots_per_covariate must be positive");
  if (!(penalty_lambda >= 0.0)) throw ConfigError("GAM penalty_lambda must be nonnegative");
  if (max_backfit_iters < 1) throw ConfigError("GAM max_backfit_iters must be positive");
  if (!(convergence_tol > 0.0)) throw ConfigError("GAM convergence_tol must be positive");
}

namespace {

constexpr int kDegree = 3;

// Index of the knot span containing x, clamped to the last nonempty span.
std::size_t find_span(double x, std::span<const double> t) {
  const std::size_t q = t.size() - kDegree - 1;
  if (x >= t[q]) return q - 1;
  if (x <= t[kDegree]) return kDegree;
  const auto it = std::upper_bound(t.begin() + kDegree, t.begin() + static_cast<std::ptrdiff_t>(q) + 1, x);
  return static_cast<std::size_t>(it - t.begin()) - 1;
}

// The kDegree + 1 nonzero basis values at x (Cox-de Boor).
void basis_funs(std::size_t span, double x, std::span<const double> t, double* N) {
  double left[kDegree + 1], right[kDegree + 1];
  N[0] = 1.0;
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = x - t[span + 1 - static_cast<std::size_t>(j)];
    right[j] = t[span + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? N[r] / denom : 0.0;
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }
}

}  // namespace

Eigen::MatrixXd bspline_basis(std::span<const double> x, std::span<const double> knots) {
  if (knots.size() < 2 * (kDegree + 1)) throw InvalidArgument("bspline_basis: too few knots");
  const std::size_t q = knots.size() - kDegree - 1;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(q));
  double N[kDegree + 1];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = std::clamp(x[i], knots[kDegree], knots[q]);
    const std::size_t span = find_span(xi, knots);
    basis_funs(span, xi, knots, N);
    for (int r = 0; r <= kDegree; ++r) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(span - kDegree) + r) = N[r];
  }
  return B;
}

double AdditiveComponent::operator()(double x) const {
  switch (kind) {
    case Kind::kConstant:
      return 0.0;
    case Kind::kLevels:
      return coef(0) * x - shift;
    case Kind::kSpline: {
      const double xs[1] = {x};
      const Eigen::MatrixXd b = bspline_basis(xs, knots);
      return b.row(0).dot(coef) - shift;
    }
  }
  return 0.0;
}

namespace {

// One penalized univariate smoother with its factorized normal equations.
struct Smoother {
  AdditiveComponent::Kind kind = AdditiveComponent::Kind::kConstant;
  std::vector<double> knots;
  Eigen::MatrixXd B;
  Eigen::MatrixXd penalty;  // lambda * D'D
  Eigen::LDLT<Eigen::MatrixXd> solver;
  Eigen::VectorXd x;        // column values (levels)
  double x_mean = 0.0;
  double level_denominator = 1.0;
  double lambda = 0.0;

  // Centered fit to r; returns the penalty value and fills gamma / coef.
  double fit(const Eigen::VectorXd& r, Eigen::VectorXd& gamma, Eigen::VectorXd& coef, double& shift) const {
    switch (kind) {
      case AdditiveComponent::Kind::kConstant:
        gamma.setZero();
        coef.resize(0);
        shift = 0.0;
        return 0.0;
      case AdditiveComponent::Kind::kLevels: {
        const double beta = (x.array() - x_mean).matrix().dot(r) / level_denominator;
        coef.resize(1);
        coef(0) = beta;
        shift = beta * x_mean;
        gamma = beta * (x.array() - x_mean).matrix();
        return lambda * beta * beta;
      }
      case AdditiveComponent::Kind::kSpline: {
        coef = solver.solve(B.transpose() * r);
        gamma = B * coef;
        shift = gamma.mean();
        gamma.array() -= shift;
        return coef.dot(penalty * coef);
      }
    }
    return 0.0;
  }
};

bool is_binary_column(const Eigen::VectorXd& col) {
  return (col.array() == 0.0 || col.array() == 1.0).all();
}

Smoother make_smoother(const Eigen::VectorXd& col, const AdditiveSummaryConfig& cfg) {
  Smoother s;
  s.lambda = cfg.penalty_lambda;
  const double lo = col.minCoeff(), hi = col.maxCoeff();
  if (lo == hi) return s;
  const auto n = col.size();
  if (is_binary_column(col)) {
    s.kind = AdditiveComponent::Kind::kLevels;
    s.x = col;
    s.x_mean = col.mean();
    s.level_denominator = (col.array() - s.x_mean).square().sum() + cfg.penalty_lambda;
    return s;
  }
  s.kind = AdditiveComponent::Kind::kSpline;
  std::vector<double> sorted(col.data(), col.data() + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> interior;
  const std::size_t K = cfg.knots_per_covariate;
  for (std::size_t k = 1; k <= K; ++k) {
    const double v = quantile_sorted(sorted, static_cast<double>(k) / static_cast<double>(K + 1));
    if (v > lo && v < hi && (interior.empty() || v > interior.back())) interior.push_back(v);
  }
  s.knots.assign(kDegree + 1, lo);
  s.knots.insert(s.knots.end(), interior.begin(), interior.end());
  s.knots.insert(s.knots.end(), kDegree + 1, hi);
  s.B = bspline_basis(std::span<const double>(col.data(), static_cast<std::size_t>(n)), s.knots);

  // Second divided differences over the Greville abscissae, scaled by the
  // mean abscissa spacing. Linear functions have coefficients linear in the
  // abscissae, so they are exactly unpenalized.
  const auto q = s.B.cols();
  std::vector<double> g(static_cast<std::size_t>(q));
  for (Eigen::Index k = 0; k < q; ++k) {
    const auto u = static_cast<std::size_t>(k);
    g[u] = (s.knots[u + 1] + s.knots[u + 2] + s.knots[u + 3]) / 3.0;
  }
  const double h = (g.back() - g.front()) / static_cast<double>(q - 1);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(q - 2, q);
  for (Eigen::Index k = 0; k + 2 < q; ++k) {
    const auto u = static_cast<std::size_t>(k);
    const double d1 = g[u + 1] - g[u], d2 = g[u + 2] - g[u + 1];
    D(k, k) = h / d1;
    D(k, k + 1) = -h / d1 - h / d2;
    D(k, k + 2) = h / d2;
  }
  s.penalty = cfg.penalty_lambda * (D.transpose() * D);
  Eigen::MatrixXd A = s.B.transpose() * s.B;
  const double jitter = 1e-12 * A.trace() / static_cast<double>(q);
  A += s.penalty;
  A.diagonal().array() += jitter;
  s.solver.compute(A);
  return s;
}

}  // namespace

AdditiveSummary additive_projection(std::span<const double> values, const Eigen::MatrixXd& X,
                                    const AdditiveSummaryConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(values.size());
  if (n < 1) throw InvalidArgument("additive_projection: no values");
  if (X.rows() != n) throw InvalidArgument("additive_projection: X rows differ from values");
  const Eigen::Index p = X.cols();
  const Eigen::Map<const Eigen::VectorXd> y(values.data(), n);

  std::vector<Smoother> smoothers;
  smoothers.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) smoothers.push_back(make_smoother(X.col(j), cfg));

  AdditiveSummary out;
  out.intercept = y.mean();
  std::vector<Eigen::VectorXd> gamma(static_cast<std::size_t>(p), Eigen::VectorXd::Zero(n));
  std::vector<Eigen::VectorXd> coef(static_cast<std::size_t>(p));
  std::vector<double> shift(static_cast<std::size_t>(p), 0.0), pen(static_cast<std::size_t>(p), 0.0);
  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(n, out.intercept);
  Eigen::VectorXd fresh(n), partial(n);

  for (std::size_t iter = 1; iter <= cfg.max_backfit_iters; ++iter) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto u = static_cast<std::size_t>(j);
      partial = y - fitted + gamma[u];
      pen[u] = smoothers[u].fit(partial, fresh, coef[u], shift[u]);
      change = std::max(change, (fresh - gamma[u]).cwiseAbs().maxCoeff());
      fitted += fresh - gamma[u];
      gamma[u] = fresh;
    }
    out.objective.push_back((y - fitted).squaredNorm() + std::accumulate(pen.begin(), pen.end(), 0.0));
    out.iterations = iter;
    if (change < cfg.convergence_tol) {
      out.converged = true;
      break;
    }
  }

  out.components.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto u = static_cast<std::size_t>(j);
    auto& c = out.components[u];
    c.kind = smoothers[u].kind;
    c.variable = static_cast<int>(j);
    c.knots = smoothers[u].knots;
    c.coef = coef[u];
    c.shift = shift[u];
  }
  out.fitted.assign(fitted.data(), fitted.data() + n);
  out.r_squared = summary_r_squared(values, out.fitted);
  return out;
}

// ---------------------------------------------------------------------------

SummaryMethod parse_summary_method(const std::string& text) {
  if (text == "cart") return SummaryMethod::kCart;
  if (text == "gam") return SummaryMethod::kGam;
  throw ConfigError("unknown summary method '" + text + "' (expected cart or gam)");
}

SummaryDistribution posterior_summary_distribution(const DrawMatrix& effect_draws, const Eigen::MatrixXd& X,
                                                   SummaryMethod method, const CartSummaryConfig& cart_cfg,
                                                   const AdditiveSummaryConfig& gam_cfg, std::size_t grid_points) {
  if (effect_draws.cols() != X.rows()) throw InvalidArgument("summary: effect draws and covariates disagree on rows");
  if (effect_draws.rows() < 1) throw InvalidArgument("summary: no posterior draws");
  SummaryDistribution out;
  out.method = method;
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const Eigen::VectorXd posterior_mean = effect_draws.colwise().mean().transpose();
  const std::span<const double> ref_values(posterior_mean.data(), n);

  if (method == SummaryMethod::kCart) {
    out.reference_cart = cart_projection(ref_values, X, cart_cfg);
    out.reference_r_squared = out.reference_cart->r_squared.value;
  } else {
    out.reference_gam = additive_projection(ref_values, X, gam_cfg);
    out.reference_r_squared = out.reference_gam->r_squared.value;
    for (const auto& comp : out.reference_gam->components) {
      if (comp.kind == AdditiveComponent::Kind::kConstant) continue;
      ComponentBands band;
      band.variable = comp.variable;
      if (comp.kind == AdditiveComponent::Kind::kLevels) {
        band.grid = {0.0, 1.0};
      } else {
        const double lo = comp.knots.front(), hi = comp.knots.back();
        const std::size_t g = std::max<std::size_t>(grid_points, 2);
        for (std::size_t k = 0; k < g; ++k) band.grid.push_back(lo + (hi - lo) * static_cast<double>(k) / (g - 1));
      }
      for (double x : band.grid) band.reference.push_back(comp(x));
      band.draws.resize(effect_draws.rows(), static_cast<Eigen::Index>(band.grid.size()));
      out.bands.push_back(std::move(band));
    }
  }

  std::vector<double> values(n);
  for (Eigen::Index r = 0; r < effect_draws.rows(); ++r) {
    for (std::size_t i = 0; i < n; ++i) values[i] = effect_draws(r, static_cast<Eigen::Index>(i));
    RSquared r2;
    if (method == SummaryMethod::kCart) {
      r2 = cart_projection(values, X, cart_cfg).r_squared;
    } else {
      const AdditiveSummary fit = additive_projection(values, X, gam_cfg);
      r2 = fit.r_squared;
      out.unconverged_draws += !fit.converged;
      for (auto& band : out.bands) {
        const auto& comp = fit.components[static_cast<std::size_t>(band.variable)];
        for (std::size_t k = 0; k < band.grid.size(); ++k) band.draws(r, static_cast<Eigen::Index>(k)) = comp(band.grid[k]);
      }
    }
    out.r_squared.push_back(r2.value);
    out.degenerate_draws += r2.degenerate;
  }
  return out;
}

}  // namespace bcmf
