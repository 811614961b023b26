// Microbenchmarks for the hot paths: exact linear algebra, convolution,
// traces, and presheaf enumeration.

#include <benchmark/benchmark.h>

#include "fincat/enriched.hpp"
#include "fincat/frobenius.hpp"
#include "fincat/groupoid.hpp"
#include "fincat/kernelcalc.hpp"
#include "fincat/qmat.hpp"

namespace {

using namespace fincat;

QMat random_qmat(int n, unsigned long long seed) {
  QMat m(n, n);
  unsigned long long s = seed;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      s = s * 6364136223846793005ull + 1442695040888963407ull;
      m.at(i, j) = Rat(long((s >> 33) % 19) - 9);
    }
  return m;
}

void BM_qmat_rank(benchmark::State& state) {
  QMat m = random_qmat(int(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(m.rank());
}
BENCHMARK(BM_qmat_rank)->Arg(8)->Arg(16)->Arg(32);

void BM_qmat_inverse(benchmark::State& state) {
  QMat m = random_qmat(int(state.range(0)), 11);
  for (int i = 0; i < m.rows(); ++i) m.at(i, i) += 100;  // keep it invertible
  for (auto _ : state) benchmark::DoNotOptimize(m.inverse());
}
BENCHMARK(BM_qmat_inverse)->Arg(8)->Arg(16);

void BM_convolve_discrete(benchmark::State& state) {
  int n = int(state.range(0));
  auto y = groupoid::FinGroupoid::discrete([n] {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("p" + std::to_string(i));
    return v;
  }());
  std::vector<std::vector<int>> dims(n, std::vector<int>(n, 1));
  kernel::Kernel k = kernel::Kernel::from_dims(y, y, dims);
  for (auto _ : state) benchmark::DoNotOptimize(kernel::convolve(k, k));
}
BENCHMARK(BM_convolve_discrete)->Arg(2)->Arg(4);

void BM_trace_unit_kernel(benchmark::State& state) {
  auto y = groupoid::FinGroupoid::one_point(groupoid::FinGroup::symmetric(int(state.range(0))));
  kernel::Kernel u = kernel::identity_kernel(y).k;
  for (auto _ : state) benchmark::DoNotOptimize(kernel::trace_lt_ag(u).dim);
}
BENCHMARK(BM_trace_unit_kernel)->Arg(3)->Arg(4);

void BM_tr_frob(benchmark::State& state) {
  auto y = groupoid::FinGroupoid::one_point(groupoid::FinGroup::cyclic(int(state.range(0))));
  groupoid::GroupoidMap f = groupoid::GroupoidMap::identity(y);
  for (auto _ : state) benchmark::DoNotOptimize(frob::tr_frob(y, f).dim);
}
BENCHMARK(BM_tr_frob)->Arg(3)->Arg(5);

void BM_presheaves_boolean(benchmark::State& state) {
  auto cs = coeff::CoeffSystem::boolean_quantale();
  enriched::EnrichedCat c = enriched::self_enrichment(cs);
  for (auto _ : state) benchmark::DoNotOptimize(enriched::presheaves(c).size());
}
BENCHMARK(BM_presheaves_boolean);

}  // namespace

BENCHMARK_MAIN();
