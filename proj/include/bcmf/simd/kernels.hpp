#pragma once
// Data-parallel inner loops of the backfitting sampler.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// implementation. The active table is chosen once at startup from CPUID and
// the BCMF_SIMD environment variable ("scalar" or "avx2").
//
// Elementwise kernels are bit-identical across implementations (no FMA
// contraction). Reductions may differ in the last few ulps because the
// vector path sums in four interleaved lanes.

#include <cstddef>
#include <span>
#include <string_view>

namespace bcmf::simd {

using cspan = std::span<const double>;
using mspan = std::span<double>;

struct KernelTable {
  std::string_view name;
  // out = y - s * (total - own)
  void (*partial_residual)(cspan y, cspan s, cspan total, cspan own, mspan out);
  // out = y - s1 * f1 - s2 * f2
  void (*residual2)(cspan y, cspan s1, cspan f1, cspan s2, cspan f2, mspan out);
  // out = a * b
  void (*multiply)(cspan a, cspan b, mspan out);
  // total += fresh - stale
  void (*replace_component)(mspan total, cspan fresh, cspan stale);
  // sum (y - s * fit)^2
  double (*scaled_sse)(cspan y, cspan s, cspan fit);
  double (*dot)(cspan a, cspan b);
  double (*sum)(cspan a);
};

const KernelTable& scalar_kernels();

// nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

// Table used by the sampler.
const KernelTable& active();

}  // namespace bcmf::simd
