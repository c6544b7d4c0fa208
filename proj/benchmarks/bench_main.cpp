#include <benchmark/benchmark.h>

#include "ergmkit/estimation.hpp"
#include "ergmkit/sampling.hpp"

using namespace ergmkit;

namespace {

Network empty_network(int n, std::string id = "b") {
  std::vector<NodeAttributes> nodes(n);
  for (int v = 0; v < n; ++v) {
    nodes[v].group = v % 3 ? "A" : "B";
    nodes[v].gender = v % 2 ? "M" : "F";
  }
  NetworkAttributes attrs;
  attrs.id = std::move(id);
  attrs.n_s = n;
  return Network(std::move(nodes), std::span<const Dyad>{}, std::move(attrs));
}

ModelSpec dependent_model() {
  ModelSpec m;
  m.terms = {{StatTerm::edges(), Modifier::one(), "edges"},
             {StatTerm::two_star(), Modifier::one(), "twostar"},
             {StatTerm::triangle(), Modifier::one(), "triangle"},
             {StatTerm::match("gender"), Modifier::one(), "match"}};
  return m;
}

void BM_StatSpaceFree(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ModelSpec model = dependent_model();
  const BoundModel bound(model, empty_network(n));
  for (auto _ : state) benchmark::DoNotOptimize(StatSpace::build(bound, Constraint::free()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(space_size(n, Constraint::free())));
}
BENCHMARK(BM_StatSpaceFree)->Arg(4)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_StatSpaceFixedEdges(benchmark::State& state) {
  ModelSpec model;
  model.terms = {{StatTerm::match("gender"), Modifier::one(), "homophily"}};
  const BoundModel bound(model, empty_network(8));
  for (auto _ : state) benchmark::DoNotOptimize(StatSpace::build(bound, Constraint::fixed_edges(20)));
  state.SetItemsProcessed(state.iterations() * 3108105L);
}
BENCHMARK(BM_StatSpaceFixedEdges)->Unit(benchmark::kMillisecond);

void BM_ExactMoments(benchmark::State& state) {
  const ModelSpec model = dependent_model();
  const StatSpace space = StatSpace::build(BoundModel(model, empty_network(6)), Constraint::free());
  const Eigen::Vector4d theta(-0.5, 0.1, 0.2, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(space.moments(theta));
}
BENCHMARK(BM_ExactMoments);

void BM_MhSteps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const bool conditional = state.range(1) != 0;
  const ModelSpec model = dependent_model();
  const Network net = empty_network(n);
  const BoundModel bound(model, net);
  Adjacency start(n);
  for (int i = 1; i < n; ++i) start.set(0, i, true);
  const Constraint c = conditional ? Constraint::fixed_edges(n - 1) : Constraint::free();
  MhChain chain(bound, start, Eigen::Vector4d(-1.0, 0.05, 0.2, 0.3), c);
  Rng rng = make_rng(1);
  for (auto _ : state) chain.run(1000, rng);
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_MhSteps)->Args({8, 0})->Args({8, 1})->Args({16, 0})->Args({16, 1});

void BM_Mple(benchmark::State& state) {
  const ModelSpec model = dependent_model();
  std::vector<Network> nets;
  Rng rng = make_rng(2);
  for (int s = 0; s < state.range(0); ++s) {
    const int n = 3 + static_cast<int>(uniform_below(rng, 6));
    Network net = empty_network(n, "s" + std::to_string(s));
    Adjacency a(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) a.set(i, j, uniform01(rng) < 0.4);
    }
    nets.push_back(net.with_adjacency(a));
  }
  const NetworkSample sample({"A", "B"}, nets);
  for (auto _ : state) benchmark::DoNotOptimize(mple(model, sample));
}
BENCHMARK(BM_Mple)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
