#include "bcmf/covariates.hpp"

#include <algorithm>
#include <cmath>

#include "bcmf/error.hpp"

namespace bcmf {

CovariateIndex::CovariateIndex(const Eigen::MatrixXd& X)
    : X_(X), rows_(static_cast<std::size_t>(X.rows())), cols_(static_cast<std::size_t>(X.cols())) {
  if (!X_.allFinite()) throw DataError("covariate matrix contains non-finite values");
  levels_.resize(cols_);
  ranks_.resize(cols_);
  for (std::size_t c = 0; c < cols_; ++c) {
    const auto col = X_.col(static_cast<Eigen::Index>(c));
    std::vector<double> sorted(col.data(), col.data() + rows_);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    ranks_[c].resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), col[static_cast<Eigen::Index>(i)]);
      ranks_[c][i] = static_cast<std::uint32_t>(it - sorted.begin());
    }
    max_levels_ = std::max(max_levels_, sorted.size());
    levels_[c] = std::move(sorted);
  }
}

}  // namespace bcmf
