#include <cmath>
#include <memory>

#include <benchmark/benchmark.h>

#include "loadsr/actor.hpp"
#include "loadsr/critic.hpp"
#include "loadsr/expr_tree.hpp"
#include "loadsr/random.hpp"
#include "loadsr/search.hpp"

using namespace loadsr;

namespace {

Dataset sine_data(std::size_t n)
{
    Dataset ds;
    ds.X = Matrix(n, 1);
    ds.y.resize(n);
    Rng rng(7);
    for (std::size_t i = 0; i < n; ++i) {
        ds.X(i, 0) = uniform(rng, -3.0, 3.0);
        ds.y[i] = std::sin(ds.X(i, 0));
    }
    ds.feature_names = { "x0" };
    ds.target_name = "y";
    return ds;
}

ExpressionTree sample_tree(std::size_t depth, std::uint64_t seed)
{
    auto shape = std::make_shared<const TreeTemplate>(TreeTemplate::build(depth, 1));
    auto lib = std::make_shared<const OperatorLibrary>(default_library(1));
    Rng rng(seed);
    OperatorAssignment a;
    for (auto k : shape->choice_counts(*lib)) a.push_back(static_cast<int>(rng() % k));
    auto tree = assign_operators(shape, lib, a);
    init_params(tree, seed);
    return tree;
}

} // namespace

static void BM_Evaluate(benchmark::State& state)
{
    auto ds = sine_data(1000);
    auto tree = sample_tree(static_cast<std::size_t>(state.range(0)), 1);
    EvalWorkspace ws;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mean_squared_error(tree, ds.X, ds.y, ws));
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Evaluate)->Arg(3)->Arg(5)->Arg(7);

static void BM_LossGradient(benchmark::State& state)
{
    auto ds = sine_data(1000);
    auto tree = sample_tree(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(loss_and_gradients(tree, ds.X, ds.y));
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_LossGradient)->Arg(3)->Arg(5)->Arg(7);

static void BM_CriticTrain(benchmark::State& state)
{
    auto ds = sine_data(100);
    auto base = sample_tree(5, 3);
    for (auto _ : state) {
        auto tree = base;
        benchmark::DoNotOptimize(train_critic(tree, ds.X, ds.y, 0.1, 100));
    }
}
BENCHMARK(BM_CriticTrain);

static void BM_ActorStep(benchmark::State& state)
{
    auto shape = TreeTemplate::build(5, 1);
    auto lib = default_library(1);
    auto policy = new_policy(shape, lib, 1.0);
    Rng rng(4);
    for (auto _ : state) {
        auto batch = sample_batch(policy, 32, rng);
        std::vector<ScoredAction> scored;
        for (auto& s : batch) scored.push_back({ s.action, uniform(rng, 0.0, 1.0) });
        risk_seeking_update(policy, scored, 0.5);
    }
}
BENCHMARK(BM_ActorStep);

static void BM_SearchIteration(benchmark::State& state)
{
    auto ds = sine_data(100);
    SearchConfig config;
    config.actor_iterations = 1;
    config.finetune_iterations = 1;
    config.pool_capacity = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_search(config, ds));
    }
}
BENCHMARK(BM_SearchIteration)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
