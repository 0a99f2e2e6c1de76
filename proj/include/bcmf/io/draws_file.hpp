#pragma once
// Versioned binary container for a fitted mediation model.
//
//   bytes 0-7   magic "BCMFDRAW"
//   u32         format version
//   u64         header length, then a JSON header (config echo,
//               standardization, chain layout, row counts, covariate names)
//   f64 blocks  train mu, zeta, d, mu_m, tau_m (draws x rows, row-major),
//               optional test blocks, sigma2, sigma2_m, clever covariates
//   forests     optional: per draw the five forests, then the two auxiliary
//               BART models, each tree as a preorder node list
//
// All integers and doubles are little-endian.

#include <string>
#include <vector>

#include "bcmf/mediation.hpp"

namespace bcmf::io {

inline constexpr std::uint32_t kDrawsFormatVersion = 1;

struct DrawsFile {
  MediationFit fit;
  std::vector<std::string> covariate_names;
};

void write_draws(const std::string& path, const DrawsFile& file);
// Throws DataError on a bad magic, a version mismatch or truncation.
DrawsFile read_draws(const std::string& path);

}  // namespace bcmf::io
