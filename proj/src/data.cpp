#include "bcmf/data.hpp"

#include <cmath>

#include "bcmf/error.hpp"

namespace bcmf {

const char* to_string(VariableKind kind) { return kind == VariableKind::kBinary ? "binary" : "continuous"; }

VariableKind parse_variable_kind(const std::string& text) {
  if (text == "continuous") return VariableKind::kContinuous;
  if (text == "binary") return VariableKind::kBinary;
  throw ConfigError("unknown variable kind '" + text + "' (expected continuous or binary)");
}

std::size_t MediationData::treated() const {
  std::size_t count = 0;
  for (double v : a) count += v == 1.0;
  return count;
}

namespace {

void check_column(const std::vector<double>& v, const char* name, bool binary) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw DataError(std::string(name) + " is not finite at row " + std::to_string(i + 1));
    if (binary && v[i] != 0.0 && v[i] != 1.0) {
      throw DataError(std::string(name) + " must be 0/1, found " + std::to_string(v[i]) + " at row " +
                      std::to_string(i + 1));
    }
  }
}

}  // namespace

void MediationData::validate(VariableKind outcome_kind, VariableKind mediator_kind) const {
  const std::size_t n = y.size();
  if (n == 0) throw DataError("no observations");
  if (a.size() != n || m.size() != n || static_cast<std::size_t>(X.rows()) != n) {
    throw DataError("outcome, treatment, mediator and covariates have different row counts");
  }
  if (!covariate_names.empty() && covariate_names.size() != static_cast<std::size_t>(X.cols())) {
    throw DataError("covariate name count does not match covariate columns");
  }
  check_column(y, "outcome", outcome_kind == VariableKind::kBinary);
  check_column(a, "treatment", true);
  check_column(m, "mediator", mediator_kind == VariableKind::kBinary);
  if (!X.allFinite()) throw DataError("covariates contain non-finite values");
  const std::size_t t = treated();
  if (t == 0 || t == n) throw DataError("both treatment arms must be nonempty");
}

}  // namespace bcmf
