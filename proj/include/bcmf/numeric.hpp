#pragma once

#include <span>
#include <vector>

namespace bcmf {

double normal_cdf(double x);
double normal_quantile(double p);
double chi_squared_quantile(double p, double df);

double mean(std::span<const double> v);
// Sample variance with denominator n - 1; 0 for fewer than two values.
double sample_variance(std::span<const double> v);

// Type-7 quantile: linear interpolation between order statistics
// x_(floor(h)) and x_(floor(h)+1) with h = (n - 1) p.
double quantile(std::vector<double> values, double p);
double quantile_sorted(std::span<const double> sorted, double p);

struct PosteriorSummary {
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
};

PosteriorSummary summarize_draws(std::span<const double> draws);

}  // namespace bcmf
