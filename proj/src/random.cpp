#include "bcmf/random.hpp"

#include <array>

namespace bcmf {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6263u};
  engine_.seed(seq);
}

double Rng::uniform() { return std::generate_canonical<double, 53>(engine_); }

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double Rng::exponential() {
  std::exponential_distribution<double> dist(1.0);
  return dist(engine_);
}

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

void Rng::dirichlet_ones(std::span<double> out) {
  double total = 0.0;
  for (double& w : out) {
    w = exponential();
    total += w;
  }
  for (double& w : out) w /= total;
}

Rng derive_stream(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream + 1); }

}  // namespace bcmf
