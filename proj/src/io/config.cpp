#include "bcmf/io/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "bcmf/error.hpp"

namespace bcmf::io {

namespace {

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) throw ConfigError("'" + path + "' must be a mapping");
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  require_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + (path.empty() ? key : path + "." + key) + "'");
    }
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for '" + path + "'");
  }
}

template <class T>
void read(const YAML::Node& parent, const std::string& key, const std::string& path, T& out) {
  if (const auto node = parent[key]) out = scalar<T>(node, path + "." + key);
}

void read_size(const YAML::Node& parent, const std::string& key, const std::string& path, std::size_t& out) {
  if (const auto node = parent[key]) {
    const auto v = scalar<long long>(node, path + "." + key);
    if (v < 0) throw ConfigError("'" + path + "." + key + "' must be nonnegative");
    out = static_cast<std::size_t>(v);
  }
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) throw ConfigError("'" + path + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : node) out.push_back(scalar<std::string>(item, path));
  return out;
}

VariableKind kind(const YAML::Node& node, const std::string& path) {
  try {
    return parse_variable_kind(scalar<std::string>(node, path));
  } catch (const Error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

void read_forest(const YAML::Node& node, const std::string& path, ForestParams& f) {
  check_keys(node, path, {"trees", "alpha", "beta", "k"});
  read_size(node, "trees", path, f.trees);
  read(node, "alpha", path, f.prior.alpha);
  read(node, "beta", path, f.prior.beta);
  read(node, "k", path, f.k);
}

void read_noise(const YAML::Node& node, const std::string& path, NoisePriorConfig& n) {
  check_keys(node, path, {"nu", "quantile", "lambda"});
  read(node, "nu", path, n.nu);
  read(node, "quantile", path, n.quantile);
  if (const auto l = node["lambda"]) n.lambda = scalar<double>(l, path + ".lambda");
}

void read_model(const YAML::Node& node, const std::string& path, BCMFConfig& cfg) {
  check_keys(node, path,
             {"burn_in", "n_samples", "chains", "store_forests", "forests", "outcome_noise", "mediator_noise",
              "auxiliary", "outcome_kind", "mediator_kind"});
  read_size(node, "burn_in", path, cfg.burn_in);
  read_size(node, "n_samples", path, cfg.n_samples);
  read_size(node, "chains", path, cfg.n_chains);
  read(node, "store_forests", path, cfg.store_forests);
  if (const auto k = node["outcome_kind"]) cfg.outcome_kind = kind(k, path + ".outcome_kind");
  if (const auto k = node["mediator_kind"]) cfg.mediator_kind = kind(k, path + ".mediator_kind");
  if (const auto forests = node["forests"]) {
    const std::string fp = path + ".forests";
    check_keys(forests, fp, {"mu", "zeta", "d", "mu_m", "tau_m"});
    const std::pair<const char*, ForestParams*> slots[] = {
        {"mu", &cfg.mu}, {"zeta", &cfg.zeta}, {"d", &cfg.d}, {"mu_m", &cfg.mu_m}, {"tau_m", &cfg.tau_m}};
    for (const auto& [name, params] : slots) {
      if (const auto f = forests[name]) read_forest(f, fp + "." + name, *params);
    }
  }
  if (const auto n = node["outcome_noise"]) read_noise(n, path + ".outcome_noise", cfg.outcome_noise);
  if (const auto n = node["mediator_noise"]) read_noise(n, path + ".mediator_noise", cfg.mediator_noise);
  if (const auto aux = node["auxiliary"]) {
    const std::string ap = path + ".auxiliary";
    check_keys(aux, ap, {"trees", "alpha", "beta", "k", "burn_in", "n_samples"});
    read_size(aux, "trees", ap, cfg.auxiliary.forest.trees);
    read(aux, "alpha", ap, cfg.auxiliary.forest.prior.alpha);
    read(aux, "beta", ap, cfg.auxiliary.forest.prior.beta);
    read(aux, "k", ap, cfg.auxiliary.forest.k);
    read_size(aux, "burn_in", ap, cfg.auxiliary.burn_in);
    read_size(aux, "n_samples", ap, cfg.auxiliary.n_samples);
  }
}

void read_cart(const YAML::Node& node, const std::string& path, CartSummaryConfig& c) {
  check_keys(node, path, {"max_depth", "min_leaf"});
  read_size(node, "max_depth", path, c.max_depth);
  if (node["min_leaf"]) {
    std::size_t v = 0;
    read_size(node, "min_leaf", path, v);
    c.min_leaf = v;
  }
}

char delimiter(const YAML::Node& node, const std::string& path) {
  const auto s = scalar<std::string>(node, path);
  if (s == "\\t" || s == "tab") return '\t';
  if (s.size() != 1) throw ConfigError("'" + path + "' must be a single character");
  return s[0];
}

void read_data(const YAML::Node& node, DataSpec& d) {
  const std::string p = "data";
  check_keys(node, p,
             {"path", "delimiter", "outcome", "treatment", "mediator", "covariates", "categorical", "outcome_kind",
              "mediator_kind"});
  read(node, "path", p, d.path);
  if (const auto n = node["delimiter"]) d.delimiter = delimiter(n, p + ".delimiter");
  read(node, "outcome", p, d.outcome);
  read(node, "treatment", p, d.treatment);
  read(node, "mediator", p, d.mediator);
  if (const auto n = node["covariates"]) d.covariates = string_list(n, p + ".covariates");
  if (const auto n = node["categorical"]) d.categorical = string_list(n, p + ".categorical");
  if (const auto n = node["outcome_kind"]) d.outcome_kind = kind(n, p + ".outcome_kind");
  if (const auto n = node["mediator_kind"]) d.mediator_kind = kind(n, p + ".mediator_kind");
  for (const auto* role : {&d.outcome, &d.treatment, &d.mediator}) {
    if (role->empty()) throw ConfigError("data section needs outcome, treatment and mediator column names");
  }
}

void read_study(const YAML::Node& node, StudySpec& s) {
  const std::string p = "study";
  check_keys(node, p,
             {"truths", "methods", "n_train", "n_test", "replications", "bootstrap", "threads", "dynamic_cart",
              "model"});
  if (const auto truths = node["truths"]) {
    if (!truths.IsSequence()) throw ConfigError("'study.truths' must be a list");
    s.truths.clear();
    for (std::size_t i = 0; i < truths.size(); ++i) {
      const auto t = truths[i];
      const std::string tp = p + ".truths[" + std::to_string(i) + "]";
      check_keys(t, tp, {"kind", "homogeneous", "null_effects", "sigma_y", "sigma_m"});
      TruthSpec spec;
      if (const auto k = t["kind"]) spec.kind = parse_truth_kind(scalar<std::string>(k, tp + ".kind"));
      read(t, "homogeneous", tp, spec.homogeneous);
      read(t, "null_effects", tp, spec.null_effects);
      read(t, "sigma_y", tp, spec.sigma_y);
      read(t, "sigma_m", tp, spec.sigma_m);
      s.truths.push_back(spec);
    }
  }
  if (const auto m = node["methods"]) {
    s.methods.clear();
    for (const auto& name : string_list(m, p + ".methods")) s.methods.push_back(parse_sim_method(name));
  }
  read_size(node, "n_train", p, s.n_train);
  read_size(node, "n_test", p, s.n_test);
  read_size(node, "replications", p, s.replications);
  read_size(node, "bootstrap", p, s.bootstrap);
  read_size(node, "threads", p, s.threads);
  if (const auto c = node["dynamic_cart"]) read_cart(c, p + ".dynamic_cart", s.dynamic_cart);
  if (const auto m = node["model"]) read_model(m, p + ".model", s.bcmf);
}

RunConfig from_node(const YAML::Node& root) {
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  check_keys(root, "", {"data", "model", "summary", "study"});
  if (const auto d = root["data"]) {
    cfg.data.emplace();
    read_data(d, *cfg.data);
  }
  if (const auto m = root["model"]) read_model(m, "model", cfg.model);
  if (cfg.data) {
    // The data section's declared kinds drive the model unless overridden there.
    if (!root["model"] || !root["model"]["outcome_kind"]) cfg.model.outcome_kind = cfg.data->outcome_kind;
    if (!root["model"] || !root["model"]["mediator_kind"]) cfg.model.mediator_kind = cfg.data->mediator_kind;
  }
  if (const auto s = root["summary"]) {
    check_keys(s, "summary", {"cart", "gam", "grid_points"});
    if (const auto c = s["cart"]) read_cart(c, "summary.cart", cfg.cart);
    if (const auto g = s["gam"]) {
      check_keys(g, "summary.gam", {"knots", "lambda", "max_iters", "tol"});
      read_size(g, "knots", "summary.gam", cfg.gam.knots_per_covariate);
      read(g, "lambda", "summary.gam", cfg.gam.penalty_lambda);
      read_size(g, "max_iters", "summary.gam", cfg.gam.max_backfit_iters);
      read(g, "tol", "summary.gam", cfg.gam.convergence_tol);
    }
    read_size(s, "grid_points", "summary", cfg.grid_points);
  }
  if (const auto s = root["study"]) read_study(s, cfg.study);

  cfg.model.validate();
  cfg.cart.validate();
  cfg.gam.validate();
  cfg.study.validate();
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  return from_node(root);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bcmf::io
