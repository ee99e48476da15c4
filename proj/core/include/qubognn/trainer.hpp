#pragma once

#include "qubognn/graph.hpp"
#include "qubognn/model.hpp"
#include "qubognn/qubo.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qgnn::train {

enum class Precision { single, double_ };

// Called every checkpoint_every iterations with the current weights (always
// handed over in single precision, the checkpoint format).
using CheckpointSink =
    std::function<void(std::uint64_t seed, std::size_t iteration,
                       const model::Params<float>& params)>;

struct TrainConfig {
    double learning_rate = 0.014;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip_norm = 2.0;
    std::size_t max_iters = 100000; // 50000 for random regular graphs
    std::size_t loss_window = 500;
    double loss_delta = 1e-5;
    double coloring_abs_stop = 1e-3;
    bool deterministic = true;  // keeps fixed reduction order in parallel paths
    Precision precision = Precision::single;
    std::size_t trace_every = 0;      // 0 disables the loss trace
    std::size_t best_stall_iters = 0; // 0 disables; stop after this many iters without a
                                      // best-solution update (recommended > 1e4)
    std::size_t composite_copies = 1; // train on a disjoint union of this many copies
    std::size_t checkpoint_every = 0; // 0 disables
    CheckpointSink checkpoint_sink;

    void validate() const;
};

enum class StopReason { converged, abs_stop, max_iters };
std::string_view to_string(StopReason reason);

struct TracePoint {
    std::size_t iteration;
    double loss;
    double best_metric;
};

struct RunResult {
    Assignment best_assignment;
    Metrics best_metrics;
    std::size_t best_iteration = 0;
    std::size_t iterations_run = 0;
    StopReason stop_reason = StopReason::max_iters;
    std::vector<TracePoint> loss_trace;
    double wall_time_seconds = 0.0;
    double final_loss = 0.0;
    double max_post_clip_norm = 0.0; // diagnostics for the clip invariant
    bool mis_repair_applied = false; // no feasible iterate was ever seen
    std::uint64_t seed = 0;
};

// Thrown when training hits a non-finite loss or activation; carries whatever
// best solution had been tracked so far.
struct TrainAbort : std::runtime_error {
    TrainAbort(const std::string& what, RunResult partial_result)
        : std::runtime_error(what), partial(std::move(partial_result)) {}
    RunResult partial;
};

// Scales all gradients by max_norm / g when the global L2 norm g exceeds
// max_norm. Returns the pre-clip norm.
double clip_global_norm(std::vector<ad::Mat<float>>& grads, double max_norm);
double clip_global_norm(std::vector<ad::Mat<double>>& grads, double max_norm);

// Standard bias-corrected Adam over a flat parameter list.
template <class T>
struct AdamState {
    std::vector<ad::Mat<T>> m, v;

    template <class Params>
    static AdamState init(const Params& params) {
        AdamState state;
        params.visit([&](const ad::Mat<T>& p) {
            state.m.emplace_back(p.rows, p.cols, T(0));
            state.v.emplace_back(p.rows, p.cols, T(0));
        });
        return state;
    }
};

template <class T>
void adam_step(std::vector<ad::Mat<T>*>& params, const std::vector<ad::Mat<T>>& grads,
               AdamState<T>& state, std::size_t t, const TrainConfig& config);

// One full training run of the recurrent-feature GNN on one problem instance.
RunResult train(ProblemKind kind, const Graph& graph, const model::ModelConfig& model_config,
                const TrainConfig& train_config, std::uint64_t seed);

struct SeedSummary {
    double best = 0.0;   // best metric across seeds (max cut / min violations / max set)
    double median = 0.0;
    double worst = 0.0;
};

struct MultiSeedResult {
    RunResult best;
    std::vector<RunResult> per_seed;
    SeedSummary summary;
};

// Independent runs, one per seed, executed on a small worker pool. The best
// result is selected by the problem's objective.
MultiSeedResult multi_seed(ProblemKind kind, const Graph& graph,
                           const model::ModelConfig& model_config,
                           const TrainConfig& train_config,
                           std::span<const std::uint64_t> seeds, std::size_t threads = 0);

// Picks the headline metric of a result: cut size (maxcut), violations
// (coloring, smaller is better) or feasible set size (mis).
double headline_metric(ProblemKind kind, const RunResult& result);
bool result_better(ProblemKind kind, const RunResult& a, const RunResult& b);

struct ChromaticResult {
    bool found = false;
    std::size_t k = 0;             // smallest k with a violation-free coloring
    Assignment coloring;
    std::size_t best_k = 0;        // on failure: k with the fewest violations
    std::size_t best_violations = 0;
    std::vector<std::pair<std::size_t, std::size_t>> attempts; // (k, min violations)
};

// Successively increases the color count from start_k, running up to
// seeds_per_k seeds each, until a zero-violation coloring appears.
ChromaticResult chromatic_search(const Graph& graph, std::size_t start_k, std::size_t max_k,
                                 std::size_t seeds_per_k, const TrainConfig& train_config,
                                 std::uint64_t base_seed, std::size_t threads = 0,
                                 const model::ModelConfig* config_template = nullptr);

// Worker-pool width: explicit argument, else QUBOSOLVE_THREADS, else the
// hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

// Derives n distinct run seeds from one base seed.
std::vector<std::uint64_t> derive_seeds(std::uint64_t base_seed, std::size_t count);

} // namespace qgnn::train
