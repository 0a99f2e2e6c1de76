#include "bcmf/io/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "bcmf/error.hpp"
#include "bcmf/io/output.hpp"

namespace bcmf::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delimiter, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw DataError("unterminated quote on line " + std::to_string(line_no));
  out.push_back(trim(cell));
  return out;
}

bool is_missing(const std::string& cell) {
  static const std::set<std::string> tokens{"", "NA", "N/A", "NaN", "nan", "null", "NULL", "."};
  return tokens.count(cell) > 0;
}

std::string where(const TextTable& t, std::size_t row, std::size_t col) {
  return "row " + std::to_string(row + 1) + ", column '" + t.header[col] + "'";
}

double parse_cell(const TextTable& t, std::size_t row, std::size_t col) {
  const std::string& cell = t.rows[row][col];
  if (is_missing(cell)) throw DataError("missing value at " + where(t, row, col));
  const char* first = cell.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw DataError("unparseable number '" + cell + "' at " + where(t, row, col));
  }
  return v;
}

std::size_t column_index(const TextTable& t, const std::string& name, const std::string& role) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw DataError(role + " column '" + name + "' not found in header");
  return static_cast<std::size_t>(it - t.header.begin());
}

// Numeric columns as-is; categorical columns expand to one 0/1 column per level.
CovariateTable encode(const TextTable& t, const std::vector<std::string>& names,
                      const std::vector<std::string>& categorical) {
  const std::set<std::string> cats(categorical.begin(), categorical.end());
  for (const auto& c : categorical) {
    if (std::find(names.begin(), names.end(), c) == names.end()) {
      throw ConfigError("categorical column '" + c + "' is not a covariate");
    }
  }
  const std::size_t n = t.rows.size();
  std::vector<std::vector<double>> cols;
  CovariateTable out;
  for (const auto& name : names) {
    const std::size_t j = column_index(t, name, "covariate");
    if (cats.count(name)) {
      std::set<std::string> levels;
      for (std::size_t i = 0; i < n; ++i) {
        if (is_missing(t.rows[i][j])) throw DataError("missing value at " + where(t, i, j));
        levels.insert(t.rows[i][j]);
      }
      for (const auto& level : levels) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = t.rows[i][j] == level ? 1.0 : 0.0;
        cols.push_back(std::move(col));
        out.names.push_back(name + "=" + level);
      }
    } else {
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = parse_cell(t, i, j);
      cols.push_back(std::move(col));
      out.names.push_back(name);
    }
  }
  out.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cols[c][i];
  }
  return out;
}

}  // namespace

TextTable read_table(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  TextTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (trim(line).empty()) continue;
      t.header = split_line(line, delimiter, line_no);
      std::set<std::string> seen;
      for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (t.header[j].empty()) throw DataError("empty column name at position " + std::to_string(j + 1));
        if (!seen.insert(t.header[j]).second) throw DataError("duplicate header name '" + t.header[j] + "'");
      }
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_line(line, delimiter, line_no);
    if (cells.size() != t.header.size()) {
      throw DataError("row " + std::to_string(t.rows.size() + 1) + " (line " + std::to_string(line_no) + ") has " +
                      std::to_string(cells.size()) + " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DataError("data file '" + path + "' has no header row");
  return t;
}

MediationData ingest(const DataSpec& spec) {
  const TextTable t = read_table(spec.path, spec.delimiter);
  const std::set<std::string> roles{spec.outcome, spec.treatment, spec.mediator};
  if (roles.size() != 3) throw ConfigError("outcome, treatment and mediator must be distinct columns");
  const std::size_t jy = column_index(t, spec.outcome, "outcome");
  const std::size_t ja = column_index(t, spec.treatment, "treatment");
  const std::size_t jm = column_index(t, spec.mediator, "mediator");

  std::vector<std::string> covariates = spec.covariates;
  if (covariates.empty()) {
    for (const auto& h : t.header) {
      if (!roles.count(h)) covariates.push_back(h);
    }
  }
  for (const auto& c : covariates) {
    if (roles.count(c)) throw ConfigError("column '" + c + "' cannot be both a covariate and a role column");
  }
  if (covariates.empty()) throw DataError("no covariate columns");

  MediationData data;
  const std::size_t n = t.rows.size();
  data.y.resize(n);
  data.a.resize(n);
  data.m.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.y[i] = parse_cell(t, i, jy);
    data.a[i] = parse_cell(t, i, ja);
    data.m[i] = parse_cell(t, i, jm);
    if (data.a[i] != 0.0 && data.a[i] != 1.0) {
      throw DataError("treatment must be 0 or 1; found '" + t.rows[i][ja] + "' at " + where(t, i, ja));
    }
    if (spec.outcome_kind == VariableKind::kBinary && data.y[i] != 0.0 && data.y[i] != 1.0) {
      throw DataError("binary outcome must be 0 or 1 at " + where(t, i, jy));
    }
    if (spec.mediator_kind == VariableKind::kBinary && data.m[i] != 0.0 && data.m[i] != 1.0) {
      throw DataError("binary mediator must be 0 or 1 at " + where(t, i, jm));
    }
  }
  CovariateTable cov = encode(t, covariates, spec.categorical);
  data.X = std::move(cov.X);
  data.covariate_names = std::move(cov.names);
  data.validate(spec.outcome_kind, spec.mediator_kind);
  return data;
}

CovariateTable read_covariates(const std::string& path, const std::vector<std::string>& columns,
                               const std::vector<std::string>& categorical, char delimiter) {
  const TextTable t = read_table(path, delimiter);
  return encode(t, columns.empty() ? t.header : columns, categorical);
}

CovariateTable read_covariates_like(const std::string& path, const std::vector<std::string>& names,
                                    char delimiter) {
  const TextTable t = read_table(path, delimiter);
  const std::size_t n = t.rows.size();
  CovariateTable out;
  out.names = names;
  out.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const auto direct = std::find(t.header.begin(), t.header.end(), names[c]);
    if (direct != t.header.end()) {
      const auto j = static_cast<std::size_t>(direct - t.header.begin());
      for (std::size_t i = 0; i < n; ++i) out.X(static_cast<Eigen::Index>(i), col) = parse_cell(t, i, j);
      continue;
    }
    const auto eq = names[c].find('=');
    if (eq == std::string::npos) throw DataError("covariate column '" + names[c] + "' not found in header");
    const std::size_t j = column_index(t, names[c].substr(0, eq), "categorical");
    const std::string level = names[c].substr(eq + 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (is_missing(t.rows[i][j])) throw DataError("missing value at " + where(t, i, j));
      out.X(static_cast<Eigen::Index>(i), col) = t.rows[i][j] == level ? 1.0 : 0.0;
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void export_data(const MediationData& data, const std::string& path, const std::string& outcome,
                 const std::string& treatment, const std::string& mediator) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << csv_field(outcome) << ',' << csv_field(treatment) << ',' << csv_field(mediator);
  for (const auto& name : data.covariate_names) out << ',' << csv_field(name);
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out << format_double(data.y[i]) << ',' << format_double(data.a[i]) << ',' << format_double(data.m[i]);
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << ',' << format_double(data.X(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
  file.commit();
}

}  // namespace bcmf::io
