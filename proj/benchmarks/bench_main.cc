// Copyright 2026 The dlbandit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "dlbandit/bandit_core.h"
#include "dlbandit/consensus.h"
#include "dlbandit/graph.h"
#include "dlbandit/sim.h"

namespace dlbandit {
namespace {

CommMatrix ring(std::size_t n) {
  SplitMix64 rng(0);
  return build_comm_matrix(build_topology(TopologyKind::kRing, n, std::nullopt, rng));
}

// One Chebyshev mixing step over a ring of N agents, each holding an N×(d+1)
// slot payload.
void BM_CommStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = ring(n);
  const auto plan = make_mixing_plan(p, 1.0 / 21.0);
  std::vector<Eigen::MatrixXd> now(n, Eigen::MatrixXd::Random(static_cast<Eigen::Index>(n), 6));
  std::vector<Eigen::MatrixXd> prev = now;
  for (auto _ : state) {
    auto next = comm_step(now, prev, 2, p, plan);
    benchmark::DoNotOptimize(next.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_CommStep)->Arg(5)->Arg(20)->Arg(50);

void BM_UcbSelectBox(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  SufficientStats stats(d, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd x = Eigen::VectorXd::Random(static_cast<Eigen::Index>(d));
    stats.add(x, 0.1 * k);
  }
  const auto cs = make_confidence_set(stats, 1.5, NormFlavor::kEll1Scaled);
  for (auto _ : state) {
    auto sel = ucb_select_box(d, cs);
    benchmark::DoNotOptimize(sel.value);
  }
}
BENCHMARK(BM_UcbSelectBox)->Arg(2)->Arg(5)->Arg(10);

// Whole simulated rounds of DLUCB on the headline setup.
void BM_DlucbRealization(benchmark::State& state) {
  ExperimentConfig c;
  c.topology.kind = TopologyKind::kErdosRenyi;
  c.topology.n = static_cast<std::size_t>(state.range(0));
  c.dim = 5;
  c.horizon = 200;
  c.realizations = 1;
  for (auto _ : state) {
    const Trace tr = run_realization(c, 0);
    benchmark::DoNotOptimize(tr.final_regret());
  }
  state.SetItemsProcessed(state.iterations() * c.horizon);
}
BENCHMARK(BM_DlucbRealization)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dlbandit

BENCHMARK_MAIN();
