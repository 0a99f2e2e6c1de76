#pragma once
// Seeded random streams. Every sampler component takes an Rng& so a chain is
// reproducible from (seed, stream). Draw sequences are stable for a given
// standard library; they are not guaranteed identical across libstdc++ and
// libc++ because the std distributions differ.

#include <cstdint>
#include <random>
#include <span>

namespace bcmf {

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();                          // [0, 1)
  double normal();                           // N(0, 1)
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape);                // Gamma(shape, 1)
  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }
  double exponential();                      // Exp(1)
  std::size_t index(std::size_t n);          // uniform on {0, ..., n-1}

  // Fill `out` with one Dirichlet(1, ..., 1) draw.
  void dirichlet_ones(std::span<double> out);

  std::uint64_t next_seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Child stream with a seed that does not overlap the parent's sequence.
Rng derive_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace bcmf
