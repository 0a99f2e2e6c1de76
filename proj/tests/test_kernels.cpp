#include <cmath>
#include <vector>

#include "doctest.h"

#include "bcmf/random.hpp"
#include "bcmf/simd/kernels.hpp"

using namespace bcmf;

namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal(0.0, 3.0);
  return v;
}

}  // namespace

TEST_CASE("active kernel table is one of the known implementations") {
  const auto& active = simd::active();
  CHECK((active.name == "scalar" || active.name == "avx2"));
}

TEST_CASE("vector kernels match the scalar reference") {
  const simd::KernelTable* vec = simd::avx2_kernels();
  if (vec == nullptr) {
    MESSAGE("AVX2 unavailable; equivalence test skipped");
    return;
  }
  const auto& ref = simd::scalar_kernels();
  Rng rng(11);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 17u, 64u, 203u}) {
    CAPTURE(n);
    const auto y = random_vector(n, rng), s = random_vector(n, rng), a = random_vector(n, rng),
               b = random_vector(n, rng), c = random_vector(n, rng);
    std::vector<double> out_ref(n), out_vec(n);

    ref.partial_residual(y, s, a, b, out_ref);
    vec->partial_residual(y, s, a, b, out_vec);
    CHECK(out_ref == out_vec);

    ref.residual2(y, s, a, b, c, out_ref);
    vec->residual2(y, s, a, b, c, out_vec);
    CHECK(out_ref == out_vec);

    ref.multiply(a, b, out_ref);
    vec->multiply(a, b, out_vec);
    CHECK(out_ref == out_vec);

    std::vector<double> t_ref = c, t_vec = c;
    ref.replace_component(t_ref, a, b);
    vec->replace_component(t_vec, a, b);
    CHECK(t_ref == t_vec);

    const double scale = 1.0 + static_cast<double>(n);
    CHECK(std::abs(ref.scaled_sse(y, s, a) - vec->scaled_sse(y, s, a)) <= 1e-12 * scale * 100.0);
    CHECK(std::abs(ref.dot(a, b) - vec->dot(a, b)) <= 1e-12 * scale * 10.0);
    CHECK(std::abs(ref.sum(a) - vec->sum(a)) <= 1e-12 * scale * 10.0);
  }
}

TEST_CASE("scalar kernels compute the documented formulas") {
  const auto& k = simd::scalar_kernels();
  const std::vector<double> y{1.0, 2.0}, s{2.0, 0.0}, total{3.0, 5.0}, own{1.0, 4.0};
  std::vector<double> out(2);
  k.partial_residual(y, s, total, own, out);
  CHECK(out[0] == doctest::Approx(1.0 - 2.0 * 2.0));
  CHECK(out[1] == doctest::Approx(2.0));
  CHECK(k.scaled_sse(y, s, own) == doctest::Approx(1.0 + 4.0));
  CHECK(k.dot(y, s) == doctest::Approx(2.0));
  CHECK(k.sum(total) == doctest::Approx(8.0));
}
