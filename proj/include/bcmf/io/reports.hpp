#pragma once
// CSV / text artifacts of the effects, summarize and simulate subcommands.
// Each writer stages all of its files and renames them together.

#include <string>
#include <vector>

#include "bcmf/effects.hpp"
#include "bcmf/simulation.hpp"
#include "bcmf/summaries.hpp"

namespace bcmf::io {

// effect_draws.csv   draw, chain, row, zeta, delta, tau  (draws x rows lines)
// row_summary.csv    row, effect, mean, sd, lower, upper
// average_draws.csv  draw, zeta_bar, delta_bar, tau_bar
// average_summary.csv effect, scale, mean, sd, lower, upper
void write_effects(const std::string& dir, const EffectDraws& effects, const AverageDraws& averages,
                   std::size_t samples_per_chain);

// Reads effect_draws.csv back into draws x rows matrices.
EffectDraws read_effect_draws(const std::string& dir);

// r2_draws.csv, r2_summary.csv, plus tree.txt / rules.csv for CART or
// components.csv for the additive summary.
void write_summary(const std::string& dir, const SummaryDistribution& summary,
                   const std::vector<std::string>& covariate_names);

// One line per leaf: the conjunction of split conditions leading to it.
std::vector<std::string> cart_leaf_rules(const CartTree& tree, const std::vector<std::string>& names);

// records.csv, aggregates.csv (Setting, Method, Target, Coverage, RMSE, Bias,
// Length, Count), held_out.csv, failures.csv and report.txt with the label.
void write_sim_report(const std::string& dir, const SimReport& report);

std::string format_aggregate_table(const SimReport& report);

}  // namespace bcmf::io
