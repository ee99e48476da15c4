#include <benchmark/benchmark.h>

#include "qubognn/heuristics.hpp"
#include "qubognn/model.hpp"
#include "qubognn/qubo.hpp"
#include "qubognn/tensor.hpp"

using namespace qgnn;

namespace {

const Graph& regular_graph() {
    static const Graph g = gen_random_regular(500, 5, 42);
    return g;
}

void bm_neighbor_mean(benchmark::State& state) {
    const Graph& g = regular_graph();
    ad::Mat<float> h(g.num_nodes(), static_cast<std::size_t>(state.range(0)), 0.5f);
    for (auto _ : state) {
        ad::Tape<float> tape(&g);
        benchmark::DoNotOptimize(tape.neighbor_mean(tape.input(h)));
    }
}
BENCHMARK(bm_neighbor_mean)->Arg(14)->Arg(50);

void bm_forward_backward(benchmark::State& state) {
    const Graph& g = regular_graph();
    const model::ModelConfig config = model::default_model_config(ProblemKind::maxcut);
    auto feature_rng = rng::make_stream(1, rng::Stream::features);
    auto init_rng = rng::make_stream(1, rng::Stream::init);
    auto dropout_rng = rng::make_stream(1, rng::Stream::dropout);
    const auto features = model::build_static_features<float>(g, config, feature_rng);
    const auto params = model::init_model<float>(config, init_rng);
    const auto recurrent = model::RecurrentState<float>::zeros(g.num_nodes(), 1);

    ad::Tape<float> tape(&g);
    for (auto _ : state) {
        tape.reset();
        auto bound = model::bind_params(tape, params);
        const int feat = tape.input(features);
        const int rec = tape.input(
            model::make_recurrent(recurrent.raw, recurrent.prob, config.recurrent_mode));
        auto nodes = model::forward(tape, params, bound, feat, rec, config, dropout_rng);
        const int loss = tape.maxcut_loss(nodes.prob);
        tape.backward(loss);
        benchmark::DoNotOptimize(tape.grad(bound.ids[0]));
    }
}
BENCHMARK(bm_forward_backward);

void bm_maxcut_loss_kernel(benchmark::State& state) {
    const Graph& g = regular_graph();
    std::vector<double> p(g.num_nodes(), 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(relaxed_loss(ProblemKind::maxcut, g, p));
}
BENCHMARK(bm_maxcut_loss_kernel);

void bm_eo_updates(benchmark::State& state) {
    const Graph& g = regular_graph();
    heuristics::EoConfig config;
    config.update_budget = static_cast<std::uint64_t>(state.range(0));
    config.restarts = 1;
    for (auto _ : state) benchmark::DoNotOptimize(heuristics::tau_eo_maxcut(g, config));
}
BENCHMARK(bm_eo_updates)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
