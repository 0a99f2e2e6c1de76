#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bcmf {

// Column-wise copy of a covariate matrix plus, per column, the sorted
// distinct values and every observation's rank among them. Split proposals
// work on ranks; rules store the actual cutpoint value.
class CovariateIndex {
 public:
  explicit CovariateIndex(const Eigen::MatrixXd& X);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Eigen::MatrixXd& matrix() const { return X_; }

  double value(std::size_t row, std::size_t col) const { return X_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)); }
  std::uint32_t rank(std::size_t row, std::size_t col) const { return ranks_[col][row]; }
  std::span<const std::uint32_t> ranks(std::size_t col) const { return ranks_[col]; }
  std::span<const double> levels(std::size_t col) const { return levels_[col]; }
  std::size_t max_levels() const { return max_levels_; }

 private:
  Eigen::MatrixXd X_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::vector<double>> levels_;
  std::vector<std::vector<std::uint32_t>> ranks_;
  std::size_t max_levels_ = 0;
};

}  // namespace bcmf
