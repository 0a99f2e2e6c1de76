#include "bcmf/lsem.hpp"

#include <Eigen/Dense>

#include "bcmf/error.hpp"
#include "bcmf/random.hpp"

namespace bcmf {

namespace {

Eigen::VectorXd solve_ls(const Eigen::MatrixXd& D, const Eigen::VectorXd& y, bool& ridge) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  if (qr.rank() == D.cols()) return qr.solve(y);
  ridge = true;
  Eigen::MatrixXd A = D.transpose() * D;
  A.diagonal().array() += kLsemRidge;
  return A.ldlt().solve(D.transpose() * y);
}

// c0 + x'c for the block starting at `offset`.
double linear_block(const Eigen::VectorXd& coef, Eigen::Index offset, const Eigen::MatrixXd& X, Eigen::Index row) {
  return coef(offset) + X.row(row).dot(coef.segment(offset + 1, X.cols()));
}

void check_eval(const LsemFit& fit, const Eigen::MatrixXd& X) {
  if (static_cast<std::size_t>(X.cols()) != fit.covariates) throw InvalidArgument("LSEM: covariate count mismatch");
}

LsemFit fit_vectors(const Eigen::MatrixXd& X, std::span<const double> a, const Eigen::VectorXd& m,
                    const Eigen::VectorXd& y) {
  LsemFit fit;
  fit.covariates = static_cast<std::size_t>(X.cols());
  const Eigen::MatrixXd Dm = lsem_mediator_design(X, a);
  fit.mediator_coef = solve_ls(Dm, m, fit.ridge);
  fit.mediator_fitted = Dm * fit.mediator_coef;
  fit.mediator_resid = m - fit.mediator_fitted;
  const Eigen::MatrixXd Dy = lsem_outcome_design(X, a, std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
  fit.outcome_coef = solve_ls(Dy, y, fit.ridge);
  fit.outcome_fitted = Dy * fit.outcome_coef;
  fit.outcome_resid = y - fit.outcome_fitted;
  return fit;
}

}  // namespace

Eigen::MatrixXd lsem_mediator_design(const Eigen::MatrixXd& X, std::span<const double> a) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::MatrixXd D(n, 2 * (p + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ai = a[static_cast<std::size_t>(i)];
    D(i, 0) = 1.0;
    D.row(i).segment(1, p) = X.row(i);
    D(i, p + 1) = ai;
    D.row(i).segment(p + 2, p) = ai * X.row(i);
  }
  return D;
}

Eigen::MatrixXd lsem_outcome_design(const Eigen::MatrixXd& X, std::span<const double> a, std::span<const double> m) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::MatrixXd D(n, 3 * (p + 1));
  D.leftCols(2 * (p + 1)) = lsem_mediator_design(X, a);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mi = m[static_cast<std::size_t>(i)];
    D(i, 2 * (p + 1)) = mi;
    D.row(i).segment(2 * (p + 1) + 1, p) = mi * X.row(i);
  }
  return D;
}

std::vector<double> LsemFit::zeta(const Eigen::MatrixXd& X) const {
  check_eval(*this, X);
  const auto p = static_cast<Eigen::Index>(covariates);
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = linear_block(outcome_coef, p + 1, X, i);
  return out;
}

std::vector<double> LsemFit::delta(const Eigen::MatrixXd& X) const {
  check_eval(*this, X);
  const auto p = static_cast<Eigen::Index>(covariates);
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out[static_cast<std::size_t>(i)] =
        linear_block(mediator_coef, p + 1, X, i) * linear_block(outcome_coef, 2 * (p + 1), X, i);
  }
  return out;
}

LsemFit fit_lsem(const MediationData& data) {
  data.validate(VariableKind::kContinuous, VariableKind::kContinuous);
  const auto n = static_cast<Eigen::Index>(data.rows());
  const Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(data.m.data(), n);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.y.data(), n);
  return fit_vectors(data.X, data.a, m, y);
}

LsemBootstrap lsem_residual_bootstrap(const MediationData& data, std::size_t B, Rng& rng,
                                      const Eigen::MatrixXd* X_eval) {
  if (B < 1) throw InvalidArgument("residual bootstrap needs at least one replicate");
  const LsemFit base = fit_lsem(data);
  const Eigen::MatrixXd& Xe = X_eval ? *X_eval : data.X;
  const auto n = static_cast<Eigen::Index>(data.rows());

  LsemBootstrap out;
  out.zeta_hat = base.zeta(Xe);
  out.delta_hat = base.delta(Xe);
  {
    const auto zt = base.zeta(data.X), dt = base.delta(data.X);
    out.zeta_bar_hat = Eigen::Map<const Eigen::VectorXd>(zt.data(), n).mean();
    out.delta_bar_hat = Eigen::Map<const Eigen::VectorXd>(dt.data(), n).mean();
  }
  out.zeta.resize(static_cast<Eigen::Index>(B), Xe.rows());
  out.delta.resize(static_cast<Eigen::Index>(B), Xe.rows());
  out.zeta_bar.resize(B);
  out.delta_bar.resize(B);

  const Eigen::VectorXd em = base.mediator_resid.array() - base.mediator_resid.mean();
  const Eigen::VectorXd ey = base.outcome_resid.array() - base.outcome_resid.mean();
  const auto p = static_cast<Eigen::Index>(base.covariates);
  Eigen::VectorXd m_star(n), y_star(n);
  for (std::size_t b = 0; b < B; ++b) {
    for (Eigen::Index i = 0; i < n; ++i) m_star(i) = base.mediator_fitted(i) + em(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
    // Outcome regenerated at the new mediator values.
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ai = data.a[static_cast<std::size_t>(i)];
      const double base_part = linear_block(base.outcome_coef, 0, data.X, i) + ai * linear_block(base.outcome_coef, p + 1, data.X, i);
      y_star(i) = base_part + m_star(i) * linear_block(base.outcome_coef, 2 * (p + 1), data.X, i) +
                  ey(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
    }
    const LsemFit refit = fit_vectors(data.X, data.a, m_star, y_star);
    out.ridge_refits += refit.ridge;
    const auto z = refit.zeta(Xe), d = refit.delta(Xe);
    const auto row = static_cast<Eigen::Index>(b);
    for (Eigen::Index i = 0; i < Xe.rows(); ++i) {
      out.zeta(row, i) = z[static_cast<std::size_t>(i)];
      out.delta(row, i) = d[static_cast<std::size_t>(i)];
    }
    const auto zt = X_eval ? refit.zeta(data.X) : z;
    const auto dt = X_eval ? refit.delta(data.X) : d;
    out.zeta_bar[b] = Eigen::Map<const Eigen::VectorXd>(zt.data(), n).mean();
    out.delta_bar[b] = Eigen::Map<const Eigen::VectorXd>(dt.data(), n).mean();
  }
  return out;
}

}  // namespace bcmf
