#include "bcmf/io/reports.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "bcmf/error.hpp"
#include "bcmf/io/output.hpp"
#include "bcmf/io/table.hpp"
#include "bcmf/numeric.hpp"

namespace bcmf::io {

namespace {

std::string num(double v) { return format_double(v); }

std::vector<double> column(const DrawMatrix& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

void summary_line(std::ostream& out, const std::string& prefix, std::span<const double> draws) {
  const auto s = summarize_draws(draws);
  out << prefix << ',' << num(s.mean) << ',' << num(s.sd) << ',' << num(s.lower) << ',' << num(s.upper) << '\n';
}

std::string variable_name(int v, const std::vector<std::string>& names) {
  const auto u = static_cast<std::size_t>(v);
  return u < names.size() ? names[u] : "x" + std::to_string(v + 1);
}

}  // namespace

void write_effects(const std::string& dir, const EffectDraws& effects, const AverageDraws& averages,
                   std::size_t samples_per_chain) {
  const Eigen::Index draws = effects.zeta.rows(), rows = effects.zeta.cols();
  if (samples_per_chain == 0) throw InvalidArgument("samples_per_chain must be positive");
  OutputSet files(dir);

  auto& d = files.open("effect_draws.csv");
  d << "draw,chain,row,zeta,delta,tau\n";
  for (Eigen::Index s = 0; s < draws; ++s) {
    const auto chain = static_cast<std::size_t>(s) / samples_per_chain;
    for (Eigen::Index i = 0; i < rows; ++i) {
      d << s << ',' << chain << ',' << i << ',' << num(effects.zeta(s, i)) << ',' << num(effects.delta(s, i)) << ','
        << num(effects.tau(s, i)) << '\n';
    }
  }

  auto& r = files.open("row_summary.csv");
  r << "row,effect,mean,sd,lower,upper\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::string row = std::to_string(i);
    summary_line(r, row + ",zeta", column(effects.zeta, i));
    summary_line(r, row + ",delta", column(effects.delta, i));
    summary_line(r, row + ",tau", column(effects.tau, i));
  }

  auto& a = files.open("average_draws.csv");
  a << "draw,zeta_bar,delta_bar,tau_bar\n";
  for (std::size_t s = 0; s < averages.zeta.size(); ++s) {
    a << s << ',' << num(averages.zeta[s]) << ',' << num(averages.delta[s]) << ',' << num(averages.tau[s]) << '\n';
  }

  auto& as = files.open("average_summary.csv");
  as << "effect,scale,mean,sd,lower,upper\n";
  const char* scale = effects.scale == EffectScale::kProbability ? "probability" : "outcome";
  summary_line(as, std::string("zeta_bar,") + scale, averages.zeta);
  summary_line(as, std::string("delta_bar,") + scale, averages.delta);
  summary_line(as, std::string("tau_bar,") + scale, averages.tau);
  files.commit();
}

EffectDraws read_effect_draws(const std::string& dir) {
  const TextTable t = read_table(dir + "/effect_draws.csv");
  const std::vector<std::string> expected{"draw", "chain", "row", "zeta", "delta", "tau"};
  if (t.header != expected) throw DataError("'" + dir + "/effect_draws.csv' does not have the effects table header");
  std::size_t draws = 0, rows = 0;
  std::vector<std::array<double, 5>> parsed;
  parsed.reserve(t.rows.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    std::array<double, 5> v{};
    const std::size_t cols[5] = {0, 2, 3, 4, 5};
    for (std::size_t c = 0; c < 5; ++c) {
      try {
        std::size_t used = 0;
        v[c] = std::stod(t.rows[k][cols[c]], &used);
        if (used != t.rows[k][cols[c]].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw DataError("unparseable value in effect_draws.csv row " + std::to_string(k + 1));
      }
    }
    draws = std::max(draws, static_cast<std::size_t>(v[0]) + 1);
    rows = std::max(rows, static_cast<std::size_t>(v[1]) + 1);
    parsed.push_back(v);
  }
  if (draws * rows != parsed.size()) throw DataError("effect_draws.csv is not a complete draws x rows table");
  EffectDraws e;
  e.zeta.resize(static_cast<Eigen::Index>(draws), static_cast<Eigen::Index>(rows));
  e.delta.resizeLike(e.zeta);
  e.tau.resizeLike(e.zeta);
  for (const auto& v : parsed) {
    const auto s = static_cast<Eigen::Index>(v[0]), i = static_cast<Eigen::Index>(v[1]);
    e.zeta(s, i) = v[2];
    e.delta(s, i) = v[3];
    e.tau(s, i) = v[4];
  }
  return e;
}

std::vector<std::string> cart_leaf_rules(const CartTree& tree, const std::vector<std::string>& names) {
  std::vector<std::string> rules(tree.leaves);
  const auto walk = [&](auto&& self, int id, const std::string& path) -> void {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      rules[static_cast<std::size_t>(node.leaf_id)] = path.empty() ? "all" : path;
      return;
    }
    const std::string var = variable_name(node.variable, names);
    const std::string join = path.empty() ? "" : path + " & ";
    self(self, node.left, join + var + " <= " + num(node.cutpoint));
    self(self, node.right, join + var + " > " + num(node.cutpoint));
  };
  if (!tree.nodes.empty()) walk(walk, 0, "");
  return rules;
}

void write_summary(const std::string& dir, const SummaryDistribution& summary,
                   const std::vector<std::string>& covariate_names) {
  OutputSet files(dir);
  auto& d = files.open("r2_draws.csv");
  d << "draw,r_squared\n";
  for (std::size_t s = 0; s < summary.r_squared.size(); ++s) d << s << ',' << num(summary.r_squared[s]) << '\n';

  auto& s = files.open("r2_summary.csv");
  const auto post = summarize_draws(summary.r_squared);
  s << "method,reference,mean,sd,lower,upper,degenerate_draws,unconverged_draws\n";
  s << (summary.method == SummaryMethod::kCart ? "cart" : "gam") << ',' << num(summary.reference_r_squared) << ','
    << num(post.mean) << ',' << num(post.sd) << ',' << num(post.lower) << ',' << num(post.upper) << ','
    << summary.degenerate_draws << ',' << summary.unconverged_draws << '\n';

  if (summary.reference_cart) {
    const CartTree& tree = summary.reference_cart->tree;
    files.open("tree.txt") << format_cart_tree(tree, covariate_names);
    auto& r = files.open("rules.csv");
    r << "leaf,rule,count,value\n";
    const auto rules = cart_leaf_rules(tree, covariate_names);
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) continue;
      r << node.leaf_id << ',' << csv_field(rules[static_cast<std::size_t>(node.leaf_id)]) << ',' << node.count << ','
        << num(node.value) << '\n';
    }
  }
  if (summary.method == SummaryMethod::kGam) {
    auto& c = files.open("components.csv");
    c << "variable,x,reference,mean,lower,upper\n";
    for (const auto& band : summary.bands) {
      const std::string var = csv_field(variable_name(band.variable, covariate_names));
      for (std::size_t g = 0; g < band.grid.size(); ++g) {
        const auto col = column(band.draws, static_cast<Eigen::Index>(g));
        const auto p = summarize_draws(col);
        c << var << ',' << num(band.grid[g]) << ',' << num(band.reference[g]) << ',' << num(p.mean) << ','
          << num(p.lower) << ',' << num(p.upper) << '\n';
      }
    }
  }
  files.commit();
}

std::string format_aggregate_table(const SimReport& report) {
  std::ostringstream os;
  os << report.label << "\n\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %-6s %-20s %8s %8s %8s %8s %7s\n", "Setting", "Method", "Target",
                "Coverage", "RMSE", "Bias", "Length", "Count");
  os << line;
  for (const auto& a : report.aggregates) {
    std::snprintf(line, sizeof(line), "%-24s %-6s %-20s %8.3f %8.4f %8.4f %8.4f %7zu\n", a.setting.c_str(),
                  a.method.c_str(), a.target.c_str(), a.coverage, a.rmse, a.bias, a.length, a.count);
    os << line;
  }
  if (!report.failures.empty()) os << "\n" << report.failures.size() << " failed fits (see failures.csv)\n";
  return os.str();
}

void write_sim_report(const std::string& dir, const SimReport& report) {
  OutputSet files(dir);
  auto& r = files.open("records.csv");
  r << "replication,setting,method,target,index,estimate,lower,upper,truth,covered,length\n";
  for (const auto& x : report.records) {
    r << x.replication << ',' << csv_field(x.setting) << ',' << x.method << ',' << x.target << ',' << x.index << ','
      << num(x.estimate) << ',' << num(x.lower) << ',' << num(x.upper) << ',' << num(x.truth) << ','
      << (x.covered ? 1 : 0) << ',' << num(x.length) << '\n';
  }
  auto& a = files.open("aggregates.csv");
  a << "Setting,Method,Target,Coverage,RMSE,Bias,Length,Count\n";
  for (const auto& g : report.aggregates) {
    a << csv_field(g.setting) << ',' << g.method << ',' << g.target << ',' << num(g.coverage) << ',' << num(g.rmse)
      << ',' << num(g.bias) << ',' << num(g.length) << ',' << g.count << '\n';
  }
  auto& h = files.open("held_out.csv");
  h << "replication,setting,method,target,rmse,correlation\n";
  for (const auto& x : report.held_out) {
    h << x.replication << ',' << csv_field(x.setting) << ',' << x.method << ',' << x.target << ',' << num(x.rmse)
      << ',' << num(x.correlation) << '\n';
  }
  auto& f = files.open("failures.csv");
  f << "replication,setting,method,message\n";
  for (const auto& x : report.failures) {
    f << x.replication << ',' << csv_field(x.setting) << ',' << x.method << ',' << csv_field(x.message) << '\n';
  }
  files.open("report.txt") << format_aggregate_table(report);
  files.commit();
}

}  // namespace bcmf::io
