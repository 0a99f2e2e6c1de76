#include "bcmf/io/draws_file.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "bcmf/error.hpp"
#include "bcmf/io/output.hpp"

namespace bcmf::io {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'B', 'C', 'M', 'F', 'D', 'R', 'A', 'W'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void doubles(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) put(p[i]);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <class T>
  T get() {
    T v;
    bytes(reinterpret_cast<char*>(&v), sizeof(T));
    return to_little(v);
  }
  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("draws file is truncated");
  }
  void doubles(double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = get<double>();
  }

 private:
  std::istream& in_;
};

json forest_params_json(const ForestParams& f) {
  return {{"trees", f.trees}, {"alpha", f.prior.alpha}, {"beta", f.prior.beta}, {"k", f.k}};
}

ForestParams forest_params_from(const json& j) {
  ForestParams f;
  f.trees = j.at("trees").get<std::size_t>();
  f.prior.alpha = j.at("alpha").get<double>();
  f.prior.beta = j.at("beta").get<double>();
  f.k = j.at("k").get<double>();
  return f;
}

json noise_json(const NoisePriorConfig& n) {
  json j = {{"nu", n.nu}, {"quantile", n.quantile}};
  j["lambda"] = n.lambda ? json(*n.lambda) : json(nullptr);
  return j;
}

NoisePriorConfig noise_from(const json& j) {
  NoisePriorConfig n;
  n.nu = j.at("nu").get<double>();
  n.quantile = j.at("quantile").get<double>();
  if (!j.at("lambda").is_null()) n.lambda = j.at("lambda").get<double>();
  return n;
}

json config_json(const BCMFConfig& c) {
  return {{"forests",
           {{"mu", forest_params_json(c.mu)},
            {"zeta", forest_params_json(c.zeta)},
            {"d", forest_params_json(c.d)},
            {"mu_m", forest_params_json(c.mu_m)},
            {"tau_m", forest_params_json(c.tau_m)}}},
          {"burn_in", c.burn_in},
          {"n_samples", c.n_samples},
          {"chains", c.n_chains},
          {"seed", c.seed},
          {"outcome_kind", to_string(c.outcome_kind)},
          {"mediator_kind", to_string(c.mediator_kind)},
          {"outcome_noise", noise_json(c.outcome_noise)},
          {"mediator_noise", noise_json(c.mediator_noise)},
          {"auxiliary",
           {{"forest", forest_params_json(c.auxiliary.forest)},
            {"burn_in", c.auxiliary.burn_in},
            {"n_samples", c.auxiliary.n_samples},
            {"noise_nu", c.auxiliary.noise_nu},
            {"noise_quantile", c.auxiliary.noise_quantile}}},
          {"store_forests", c.store_forests}};
}

BCMFConfig config_from(const json& j) {
  BCMFConfig c;
  const auto& f = j.at("forests");
  c.mu = forest_params_from(f.at("mu"));
  c.zeta = forest_params_from(f.at("zeta"));
  c.d = forest_params_from(f.at("d"));
  c.mu_m = forest_params_from(f.at("mu_m"));
  c.tau_m = forest_params_from(f.at("tau_m"));
  c.burn_in = j.at("burn_in").get<std::size_t>();
  c.n_samples = j.at("n_samples").get<std::size_t>();
  c.n_chains = j.at("chains").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.outcome_kind = parse_variable_kind(j.at("outcome_kind").get<std::string>());
  c.mediator_kind = parse_variable_kind(j.at("mediator_kind").get<std::string>());
  c.outcome_noise = noise_from(j.at("outcome_noise"));
  c.mediator_noise = noise_from(j.at("mediator_noise"));
  const auto& a = j.at("auxiliary");
  c.auxiliary.forest = forest_params_from(a.at("forest"));
  c.auxiliary.burn_in = a.at("burn_in").get<std::size_t>();
  c.auxiliary.n_samples = a.at("n_samples").get<std::size_t>();
  c.auxiliary.noise_nu = a.at("noise_nu").get<double>();
  c.auxiliary.noise_quantile = a.at("noise_quantile").get<double>();
  c.store_forests = j.at("store_forests").get<bool>();
  return c;
}

json bart_header(const BartModel& m) {
  return {{"probit", m.probit}, {"center", m.center}, {"scale", m.scale}, {"dimension", m.dimension},
          {"draws", m.draws.size()}};
}

void put_forest(Writer& w, const Forest& f) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(f.trees.size()));
  w.put(f.leaf_sd);
  w.put(f.tree_prior.alpha);
  w.put(f.tree_prior.beta);
  for (const auto& tree : f.trees) {
    const auto nodes = tree.preorder();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tree.dimension()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(nodes.size()));
    for (const auto& e : nodes) {
      w.put<std::uint8_t>(e.internal ? 1 : 0);
      w.put<std::uint32_t>(e.rule.variable);
      w.put(e.rule.cutpoint);
      w.put(e.value);
    }
  }
}

Forest get_forest(Reader& r) {
  Forest f;
  const auto trees = r.get<std::uint32_t>();
  f.leaf_sd = r.get<double>();
  f.tree_prior.alpha = r.get<double>();
  f.tree_prior.beta = r.get<double>();
  f.trees.reserve(trees);
  std::vector<DecisionTree::PreorderEntry> nodes;
  for (std::uint32_t t = 0; t < trees; ++t) {
    const auto dimension = r.get<std::uint32_t>();
    const auto count = r.get<std::uint32_t>();
    nodes.resize(count);
    for (auto& e : nodes) {
      e.internal = r.get<std::uint8_t>() != 0;
      e.rule.variable = r.get<std::uint32_t>();
      e.rule.cutpoint = r.get<double>();
      e.value = r.get<double>();
    }
    try {
      f.trees.push_back(DecisionTree::from_preorder(dimension, nodes));
    } catch (const Error& e) {
      throw DataError(std::string("corrupt forest in draws file: ") + e.what());
    }
  }
  return f;
}

template <class Draws>
auto* blocks(Draws& f, std::size_t k) {
  decltype(&f.mu) all[5] = {&f.mu, &f.zeta, &f.d, &f.mu_m, &f.tau_m};
  return all[k];
}

}  // namespace

void write_draws(const std::string& path, const DrawsFile& file) {
  const MediationFit& fit = file.fit;
  const std::size_t draws = fit.draws(), rows = fit.train.rows();
  if (fit.sigma2.size() != draws || fit.sigma2_m.size() != draws) throw InvalidArgument("variance draws mismatch");
  const auto& st = fit.standardization;
  json h;
  h["format"] = "bcmf-draws";
  h["version"] = kDrawsFormatVersion;
  h["config"] = config_json(fit.config);
  h["standardization"] = {{"y_center", st.y_center},   {"y_scale", st.y_scale},     {"m_center", st.m_center},
                          {"m_scale", st.m_scale},     {"mm_center", st.mm_center}, {"mm_scale", st.mm_scale}};
  h["chains"] = fit.n_chains;
  h["samples_per_chain"] = fit.n_samples;
  h["draws"] = draws;
  h["rows"] = rows;
  h["test_rows"] = fit.test ? json(fit.test->rows()) : json(nullptr);
  h["covariates"] = file.covariate_names;
  h["forests"] = fit.forests.has_value();
  if (fit.forests) {
    if (fit.forests->draws.size() != draws) throw InvalidArgument("stored forest count does not match draws");
    h["auxiliary"] = {{"propensity", bart_header(fit.forests->auxiliary.propensity)},
                      {"mediator", bart_header(fit.forests->auxiliary.mediator)}};
  }
  const std::string header = h.dump();

  AtomicFile out(path, true);
  Writer w(out.stream());
  w.bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kDrawsFormatVersion);
  w.put<std::uint64_t>(header.size());
  w.bytes(header.data(), header.size());
  for (std::size_t k = 0; k < 5; ++k) w.doubles(blocks(fit.train, k)->data(), draws * rows);
  if (fit.test) {
    for (std::size_t k = 0; k < 5; ++k) w.doubles(blocks(*fit.test, k)->data(), draws * fit.test->rows());
  }
  w.doubles(fit.sigma2.data(), draws);
  w.doubles(fit.sigma2_m.data(), draws);
  for (const auto* v : {&fit.clever.pi_hat, &fit.clever.m0_hat, &fit.clever.m1_hat}) {
    if (v->size() != rows) throw InvalidArgument("clever covariate length mismatch");
    w.doubles(v->data(), rows);
  }
  if (fit.forests) {
    for (const auto& set : fit.forests->draws) {
      for (const auto& f : set) put_forest(w, f);
    }
    for (const auto* m : {&fit.forests->auxiliary.propensity, &fit.forests->auxiliary.mediator}) {
      for (const auto& f : m->draws) put_forest(w, f);
    }
  }
  out.commit();
}

DrawsFile read_draws(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open draws file '" + path + "'");
  Reader r(in);
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError("'" + path + "' is not a draws file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kDrawsFormatVersion) {
    throw DataError("draws file '" + path + "' has format version " + std::to_string(version) +
                    "; this build reads version " + std::to_string(kDrawsFormatVersion));
  }
  const auto header_size = r.get<std::uint64_t>();
  if (header_size > (1u << 30)) throw DataError("draws file header is implausibly large");
  std::string header(header_size, '\0');
  r.bytes(header.data(), header.size());

  DrawsFile file;
  MediationFit& fit = file.fit;
  std::size_t draws = 0, rows = 0;
  bool has_forests = false;
  json aux;
  try {
    const json h = json::parse(header);
    fit.config = config_from(h.at("config"));
    const auto& s = h.at("standardization");
    fit.standardization = {s.at("y_center").get<double>(), s.at("y_scale").get<double>(),
                           s.at("m_center").get<double>(), s.at("m_scale").get<double>(),
                           s.at("mm_center").get<double>(), s.at("mm_scale").get<double>()};
    fit.n_chains = h.at("chains").get<std::size_t>();
    fit.n_samples = h.at("samples_per_chain").get<std::size_t>();
    draws = h.at("draws").get<std::size_t>();
    rows = h.at("rows").get<std::size_t>();
    if (!h.at("test_rows").is_null()) {
      fit.test.emplace();
      fit.test->resize(draws, h.at("test_rows").get<std::size_t>());
    }
    file.covariate_names = h.at("covariates").get<std::vector<std::string>>();
    has_forests = h.at("forests").get<bool>();
    if (has_forests) aux = h.at("auxiliary");
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed draws file header: ") + e.what());
  }
  if (fit.n_chains * fit.n_samples != draws) throw DataError("draws file chain layout is inconsistent");

  fit.train.resize(draws, rows);
  for (std::size_t k = 0; k < 5; ++k) r.doubles(blocks(fit.train, k)->data(), draws * rows);
  if (fit.test) {
    for (std::size_t k = 0; k < 5; ++k) r.doubles(blocks(*fit.test, k)->data(), draws * fit.test->rows());
  }
  fit.sigma2.resize(draws);
  fit.sigma2_m.resize(draws);
  r.doubles(fit.sigma2.data(), draws);
  r.doubles(fit.sigma2_m.data(), draws);
  for (auto* v : {&fit.clever.pi_hat, &fit.clever.m0_hat, &fit.clever.m1_hat}) {
    v->resize(rows);
    r.doubles(v->data(), rows);
  }
  if (has_forests) {
    StoredForests stored;
    stored.draws.resize(draws);
    for (auto& set : stored.draws) {
      for (auto& f : set) f = get_forest(r);
    }
    try {
      for (auto [name, model] : {std::pair{"propensity", &stored.auxiliary.propensity},
                                 std::pair{"mediator", &stored.auxiliary.mediator}}) {
        const auto& m = aux.at(name);
        model->probit = m.at("probit").get<bool>();
        model->center = m.at("center").get<double>();
        model->scale = m.at("scale").get<double>();
        model->dimension = m.at("dimension").get<std::size_t>();
        model->draws.resize(m.at("draws").get<std::size_t>());
        for (auto& f : model->draws) f = get_forest(r);
      }
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed draws file header: ") + e.what());
    }
    fit.forests = std::move(stored);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("draws file has trailing bytes");
  return file;
}

}  // namespace bcmf::io
