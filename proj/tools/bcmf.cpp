// bcmf: fit / effects / summarize / simulate front end.
//
// Exit status: 0 success, 1 usage or configuration error, 2 data error,
// 3 runtime failure. BCMF_LOG_LEVEL=trace|debug|info|warn|error|off.

#include <cstdlib>
#include <filesystem>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "bcmf/effects.hpp"
#include "bcmf/error.hpp"
#include "bcmf/io/config.hpp"
#include "bcmf/io/draws_file.hpp"
#include "bcmf/io/output.hpp"
#include "bcmf/io/reports.hpp"
#include "bcmf/io/table.hpp"
#include "bcmf/numeric.hpp"
#include "bcmf/random.hpp"
#include "bcmf/simulation.hpp"
#include "bcmf/summaries.hpp"

namespace {

using namespace bcmf;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

// Bayesian-bootstrap weights for `effects` come from this stream of the fit seed.
constexpr std::uint64_t kEffectsStream = 1000;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("bcmf");
  logger->set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("BCMF_LOG_LEVEL")) {
    const auto parsed = spdlog::level::from_str(level);
    // from_str maps unknown names to off; only honour it when asked for.
    if (parsed != spdlog::level::off || std::string(level) == "off") spdlog::set_level(parsed);
  }
}

struct FitArgs {
  std::string data, config, out;
  std::uint64_t seed = 0;
  std::size_t chains = 0;
};

struct EffectsArgs {
  std::string draws, out, newdata;
};

struct SummarizeArgs {
  std::string effects, covariates, method, out, config, effect = "delta";
};

struct SimulateArgs {
  std::string config, out;
  std::uint64_t seed = 0;
};

void write_fit_summary(const std::string& path, const MediationFit& fit, const MediationData& data) {
  io::AtomicFile file(path);
  auto& out = file.stream();
  out << "rows " << data.rows() << " (treated " << data.treated() << ")\n";
  out << "covariates " << data.X.cols() << "\n";
  out << "chains " << fit.n_chains << " x " << fit.n_samples << " kept draws (burn-in " << fit.config.burn_in
      << ")\n";
  out << "outcome " << to_string(fit.config.outcome_kind) << ", mediator " << to_string(fit.config.mediator_kind)
      << "\n";
  const auto line = [&](const char* name, std::span<const double> draws) {
    const auto s = summarize_draws(draws);
    out << name << " mean " << io::format_double(s.mean) << " sd " << io::format_double(s.sd) << " 95% ["
        << io::format_double(s.lower) << ", " << io::format_double(s.upper) << "]\n";
  };
  line("sigma2", fit.sigma2);
  line("sigma2_m", fit.sigma2_m);
  const AverageDraws avg = equal_weight_averages(conditional_effects(fit));
  line("zeta_bar(sample)", avg.zeta);
  line("delta_bar(sample)", avg.delta);
  line("tau_bar(sample)", avg.tau);
  file.commit();
}

int run_fit(const FitArgs& args) {
  io::RunConfig cfg = io::load_config(args.config);
  if (!cfg.data) throw ConfigError("config needs a data section naming the outcome, treatment and mediator columns");
  io::DataSpec spec = *cfg.data;
  spec.path = args.data;
  cfg.model.seed = args.seed;
  if (args.chains > 0) cfg.model.n_chains = args.chains;
  cfg.model.validate();

  const MediationData data = io::ingest(spec);
  spdlog::info("read {} rows, {} covariate columns from {}", data.rows(), data.X.cols(), spec.path);
  spdlog::info("fitting {} chain(s) of {} + {} iterations", cfg.model.n_chains, cfg.model.burn_in,
               cfg.model.n_samples);
  io::DrawsFile file;
  file.fit = fit_bcmf(data, cfg.model);
  file.covariate_names = data.covariate_names;
  io::write_draws(args.out, file);
  write_fit_summary(args.out + ".summary.txt", file.fit, data);
  spdlog::info("wrote {} draws to {}", file.fit.draws(), args.out);
  return 0;
}

int run_effects(const EffectsArgs& args) {
  const io::DrawsFile file = io::read_draws(args.draws);
  const MediationFit& fit = file.fit;
  EffectDraws effects;
  if (args.newdata.empty()) {
    effects = conditional_effects(fit);
  } else {
    const auto table = io::read_covariates_like(args.newdata, file.covariate_names);
    const FunctionDraws f = predict_functions(fit, table.X);
    effects = conditional_effects(f, fit.sigma2_m, fit.config.outcome_kind, fit.config.mediator_kind);
  }
  Rng rng = derive_stream(fit.config.seed, kEffectsStream);
  const AverageDraws avg = bayesian_bootstrap_averages(effects, rng);
  io::write_effects(args.out, effects, avg, fit.n_samples);
  spdlog::info("wrote {} x {} effect draws to {}", effects.draws(), effects.rows(), args.out);
  return 0;
}

int run_summarize(const SummarizeArgs& args) {
  io::RunConfig cfg = args.config.empty() ? io::RunConfig{} : io::load_config(args.config);
  const SummaryMethod method = parse_summary_method(args.method);
  const EffectDraws effects = io::read_effect_draws(args.effects);

  // With a data section, the covariates are its covariate columns (roles
  // excluded); otherwise every column of the file.
  std::vector<std::string> columns, categorical;
  if (cfg.data) {
    categorical = cfg.data->categorical;
    columns = cfg.data->covariates;
    if (columns.empty()) {
      for (const auto& h : io::read_table(args.covariates, cfg.data->delimiter).header) {
        if (h != cfg.data->outcome && h != cfg.data->treatment && h != cfg.data->mediator) columns.push_back(h);
      }
    }
  }
  const auto table = io::read_covariates(args.covariates, columns, categorical,
                                         cfg.data ? cfg.data->delimiter : ',');
  if (static_cast<std::size_t>(table.X.rows()) != effects.rows()) {
    throw DataError("covariate file has " + std::to_string(table.X.rows()) + " rows but the effects cover " +
                    std::to_string(effects.rows()));
  }
  const DrawMatrix* draws = nullptr;
  if (args.effect == "delta") draws = &effects.delta;
  else if (args.effect == "zeta") draws = &effects.zeta;
  else if (args.effect == "tau") draws = &effects.tau;
  else throw ConfigError("--effect must be delta, zeta or tau");

  const SummaryDistribution summary =
      posterior_summary_distribution(*draws, table.X, method, cfg.cart, cfg.gam, cfg.grid_points);
  io::write_summary(args.out, summary, table.names);
  spdlog::info("summary reference R^2 {:.4f}; wrote {}", summary.reference_r_squared, args.out);
  return 0;
}

int run_simulate(const SimulateArgs& args) {
  io::RunConfig cfg = io::load_config(args.config);
  cfg.study.seed = args.seed;
  spdlog::info("running {} truth(s) x {} replication(s)", cfg.study.truths.size(), cfg.study.replications);
  const SimReport report = run_study(cfg.study);
  io::write_sim_report(args.out, report);
  if (!report.failures.empty()) spdlog::warn("{} fits failed; see failures.csv", report.failures.size());
  spdlog::info("wrote report to {}", args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Bayesian causal mediation forests"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit the mediation model and write a draws file");
  fit_cmd->add_option("--data", fit.data, "delimited data file")->required();
  fit_cmd->add_option("--config", fit.config, "YAML configuration")->required();
  fit_cmd->add_option("--out", fit.out, "draws file to write")->required();
  fit_cmd->add_option("--seed", fit.seed, "random seed")->required();
  fit_cmd->add_option("--chains", fit.chains, "number of chains (overrides the config)")->check(CLI::PositiveNumber);

  EffectsArgs eff;
  auto* eff_cmd = app.add_subcommand("effects", "conditional and average effects from a draws file");
  eff_cmd->add_option("--draws", eff.draws, "draws file")->required();
  eff_cmd->add_option("--out", eff.out, "output directory")->required();
  eff_cmd->add_option("--newdata", eff.newdata, "covariates to predict at (needs stored forests)");

  SummarizeArgs sum;
  auto* sum_cmd = app.add_subcommand("summarize", "tree or additive projection of the effect posterior");
  sum_cmd->add_option("--effects", sum.effects, "effects directory")->required();
  sum_cmd->add_option("--covariates", sum.covariates, "covariate file for the effect rows")->required();
  sum_cmd->add_option("--method", sum.method, "cart or gam")->required()->check(CLI::IsMember({"cart", "gam"}));
  sum_cmd->add_option("--out", sum.out, "output directory")->required();
  sum_cmd->add_option("--config", sum.config, "YAML configuration (summary and data sections)");
  sum_cmd->add_option("--effect", sum.effect, "delta, zeta or tau")->check(CLI::IsMember({"delta", "zeta", "tau"}));

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "desk-scale simulation study");
  sim_cmd->add_option("--config", sim.config, "YAML configuration with a study section")->required();
  sim_cmd->add_option("--out", sim.out, "output directory")->required();
  sim_cmd->add_option("--seed", sim.seed, "random seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit);
    if (eff_cmd->parsed()) return run_effects(eff);
    if (sum_cmd->parsed()) return run_summarize(sum);
    if (sim_cmd->parsed()) return run_simulate(sim);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
