#pragma once
// Delimited text ingestion and export.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcmf/data.hpp"

namespace bcmf::io {

// Raw header + string cells. Quoted fields ("a,b", "say ""hi""") are supported.
struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Throws DataError on a missing file, missing header, duplicate header name
// or a ragged row. Row numbers in messages count data rows from 1.
TextTable read_table(const std::string& path, char delimiter = ',');

struct DataSpec {
  std::string path;
  char delimiter = ',';
  std::string outcome;
  std::string treatment;
  std::string mediator;
  std::vector<std::string> covariates;   // empty: every other column
  std::vector<std::string> categorical;  // one-hot encoded, levels in lexicographic order
  VariableKind outcome_kind = VariableKind::kContinuous;
  VariableKind mediator_kind = VariableKind::kContinuous;
};

MediationData ingest(const DataSpec& spec);

// Numeric covariate matrix from a table; `columns` empty means all. Columns
// listed in `categorical` are one-hot encoded as in ingest.
struct CovariateTable {
  Eigen::MatrixXd X;
  std::vector<std::string> names;
};
CovariateTable read_covariates(const std::string& path, const std::vector<std::string>& columns = {},
                               const std::vector<std::string>& categorical = {}, char delimiter = ',');

// Rebuilds a training covariate layout from a new file: a name present in
// the header is read as a number; "col=level" is the indicator of a raw
// categorical column `col` (unseen levels encode as all zeros).
CovariateTable read_covariates_like(const std::string& path, const std::vector<std::string>& names,
                                    char delimiter = ',');

// Writes y, a, m and the covariates under the given role names with
// round-trip precision.
void export_data(const MediationData& data, const std::string& path, const std::string& outcome = "y",
                 const std::string& treatment = "a", const std::string& mediator = "m");

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace bcmf::io
