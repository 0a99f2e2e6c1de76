#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace bcmf {

enum class VariableKind { kContinuous, kBinary };

const char* to_string(VariableKind kind);
VariableKind parse_variable_kind(const std::string& text);

// Outcome, binary treatment, mediator and (already binarized) covariates.
struct MediationData {
  std::vector<double> y;
  std::vector<double> a;
  std::vector<double> m;
  Eigen::MatrixXd X;
  std::vector<std::string> covariate_names;

  std::size_t rows() const { return y.size(); }
  std::size_t treated() const;

  // Throws DataError on shape mismatch, non-finite values, non-binary A, an
  // empty arm, or non-binary Y/M for binary kinds.
  void validate(VariableKind outcome_kind, VariableKind mediator_kind) const;
};

}  // namespace bcmf
