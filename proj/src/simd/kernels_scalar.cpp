#include "bcmf/simd/kernels.hpp"

namespace bcmf::simd {
namespace {

void partial_residual(cspan y, cspan s, cspan total, cspan own, mspan out) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double others = total[i] - own[i];
    const double scaled = s[i] * others;
    out[i] = y[i] - scaled;
  }
}

void residual2(cspan y, cspan s1, cspan f1, cspan s2, cspan f2, mspan out) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double p1 = s1[i] * f1[i];
    const double p2 = s2[i] * f2[i];
    out[i] = (y[i] - p1) - p2;
  }
}

void multiply(cspan a, cspan b, mspan out) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void replace_component(mspan total, cspan fresh, cspan stale) {
  const std::size_t n = total.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double delta = fresh[i] - stale[i];
    total[i] = total[i] + delta;
  }
}

double scaled_sse(cspan y, cspan s, cspan fit) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - s[i] * fit[i];
    acc += e * e;
  }
  return acc;
}

double dot(cspan a, cspan b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(cspan a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",  partial_residual, residual2, multiply,
                                 replace_component, scaled_sse, dot, sum};
  return table;
}

}  // namespace bcmf::simd
