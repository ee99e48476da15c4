#include "qubognn/trainer.hpp"
#include "qubognn/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <thread>

namespace qgnn::train {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
    if (grad_clip_norm <= 0.0) throw std::invalid_argument("grad_clip_norm must be > 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (loss_window < 1 || loss_window >= max_iters)
        throw std::invalid_argument("loss_window must be in [1, max_iters)");
    if (loss_delta <= 0.0) throw std::invalid_argument("loss_delta must be > 0");
    if (composite_copies < 1) throw std::invalid_argument("composite_copies must be >= 1");
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
        case StopReason::converged: return "converged";
        case StopReason::abs_stop: return "abs_stop";
        case StopReason::max_iters: return "max_iters";
    }
    return "?";
}

namespace {

template <class T>
double global_norm(const std::vector<ad::Mat<T>>& grads) {
    double sum = 0.0;
    for (const auto& g : grads)
        for (T v : g.data) sum += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(sum);
}

template <class T>
double clip_impl(std::vector<ad::Mat<T>>& grads, double max_norm) {
    if (max_norm <= 0.0) throw std::invalid_argument("max_norm must be > 0");
    const double norm = global_norm(grads);
    if (norm > max_norm) {
        const T scale = static_cast<T>(max_norm / norm);
        for (auto& g : grads)
            for (T& v : g.data) v *= scale;
    }
    return norm;
}

} // namespace

double clip_global_norm(std::vector<ad::Mat<float>>& grads, double max_norm) {
    return clip_impl(grads, max_norm);
}
double clip_global_norm(std::vector<ad::Mat<double>>& grads, double max_norm) {
    return clip_impl(grads, max_norm);
}

template <class T>
void adam_step(std::vector<ad::Mat<T>*>& params, const std::vector<ad::Mat<T>>& grads,
               AdamState<T>& state, std::size_t t, const TrainConfig& config) {
    if (t < 1) throw std::invalid_argument("adam_step requires t >= 1");
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    const T beta1 = static_cast<T>(config.adam_beta1);
    const T beta2 = static_cast<T>(config.adam_beta2);
    const T eps = static_cast<T>(config.adam_eps);
    const T lr = static_cast<T>(config.learning_rate);
    const T correction1 = T(1) - static_cast<T>(std::pow(config.adam_beta1, static_cast<double>(t)));
    const T correction2 = T(1) - static_cast<T>(std::pow(config.adam_beta2, static_cast<double>(t)));

    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        ad::Mat<T>& p = *params[pi];
        const ad::Mat<T>& g = grads[pi];
        ad::Mat<T>& m = state.m[pi];
        ad::Mat<T>& v = state.v[pi];
        if (p.size() != g.size()) throw std::invalid_argument("adam_step: grad shape mismatch");
        for (std::size_t e = 0; e < p.size(); ++e) {
            m.data[e] = beta1 * m.data[e] + (T(1) - beta1) * g.data[e];
            v.data[e] = beta2 * v.data[e] + (T(1) - beta2) * g.data[e] * g.data[e];
            const T m_hat = m.data[e] / correction1;
            const T v_hat = v.data[e] / correction2;
            p.data[e] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

template void adam_step<float>(std::vector<ad::Mat<float>*>&, const std::vector<ad::Mat<float>>&,
                               AdamState<float>&, std::size_t, const TrainConfig&);
template void adam_step<double>(std::vector<ad::Mat<double>*>&,
                                const std::vector<ad::Mat<double>>&, AdamState<double>&,
                                std::size_t, const TrainConfig&);

namespace {

double headline_from_metrics(ProblemKind kind, const Metrics& m) {
    switch (kind) {
        case ProblemKind::maxcut: return static_cast<double>(m.cut_size);
        case ProblemKind::coloring: return static_cast<double>(m.violations);
        case ProblemKind::mis: return static_cast<double>(m.set_size);
    }
    return 0.0;
}

// Best-solution tracker. For composite (disjoint-union) training each copy is
// evaluated separately and the tracker keeps the best copy-local assignment.
struct BestTracker {
    ProblemKind kind = ProblemKind::maxcut;
    bool has_best = false;
    Assignment assignment;
    Metrics metrics;
    std::size_t iteration = 0;

    bool better(const Metrics& candidate) const {
        if (!has_best) {
            if (kind == ProblemKind::mis) return candidate.feasible;
            return true;
        }
        switch (kind) {
            case ProblemKind::maxcut: return candidate.cut_size > metrics.cut_size;
            case ProblemKind::coloring: return candidate.violations < metrics.violations;
            case ProblemKind::mis:
                return candidate.feasible && candidate.set_size > metrics.set_size;
        }
        return false;
    }

    // Returns true when the best was updated.
    bool offer(const Assignment& candidate, const Metrics& m, std::size_t iter) {
        if (!better(m)) return false;
        assignment = candidate;
        metrics = m;
        iteration = iter;
        has_best = true;
        return true;
    }
};

template <class T>
RunResult train_impl(ProblemKind kind, const Graph& original_graph,
                     const model::ModelConfig& model_config, const TrainConfig& train_config,
                     std::uint64_t seed) {
    model_config.validate();
    train_config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const std::size_t copies = train_config.composite_copies;
    Graph composite;
    const Graph& graph =
        copies > 1 ? (composite = disjoint_union(original_graph, copies)) : original_graph;
    const std::size_t n_original = original_graph.num_nodes();
    const std::size_t k = model_config.out_dim;

    auto feature_rng = rng::make_stream(seed, rng::Stream::features);
    auto init_rng = rng::make_stream(seed, rng::Stream::init);
    auto dropout_rng = rng::make_stream(seed, rng::Stream::dropout);

    auto features = model::build_static_features<T>(graph, model_config, feature_rng);
    auto params = model::init_model<T>(model_config, init_rng);
    auto recurrent = model::RecurrentState<T>::zeros(graph.num_nodes(), k);
    auto adam = AdamState<T>::init(params);

    std::vector<ad::Mat<T>*> param_ptrs;
    params.visit([&](ad::Mat<T>& m) { param_ptrs.push_back(&m); });

    BestTracker tracker;
    tracker.kind = kind;
    RunResult result;
    result.seed = seed;

    std::deque<double> window;
    std::vector<double> prob_buffer(graph.num_nodes() * k);
    std::size_t last_best_update = 0;

    auto finish = [&](StopReason reason, std::size_t iters) {
        result.stop_reason = reason;
        result.iterations_run = iters;
        result.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    ad::Tape<T> tape(&graph, /*check_finite=*/true);
    std::size_t t = 0;
    for (; t < train_config.max_iters; ++t) {
        tape.reset();
        auto bound = model::bind_params(tape, params);
        const int feat_id = tape.input(features);
        int rec_id = -1;
        if (model_config.use_recurrent)
            rec_id = tape.input(model::make_recurrent(recurrent.raw, recurrent.prob,
                                                      model_config.recurrent_mode));

        model::ForwardNodes nodes;
        int loss_id = -1;
        double loss = 0.0;
        try {
            nodes = model::forward(tape, params, bound, feat_id, rec_id, model_config,
                                   dropout_rng);
            switch (kind) {
                case ProblemKind::maxcut: loss_id = tape.maxcut_loss(nodes.prob); break;
                case ProblemKind::coloring: loss_id = tape.coloring_loss(nodes.prob); break;
                case ProblemKind::mis:
                    loss_id = tape.mis_loss(
                        nodes.prob,
                        static_cast<T>(mis_penalty_at(t, train_config.max_iters)));
                    break;
            }
            loss = static_cast<double>(tape.value(loss_id)(0, 0));
            if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");
        } catch (const std::runtime_error& e) {
            finish(StopReason::max_iters, t);
            throw TrainAbort("training aborted at iteration " + std::to_string(t) + ": " +
                                 e.what(),
                             std::move(result));
        }
        result.final_loss = loss;

        tape.backward(loss_id);
        std::vector<ad::Mat<T>> grads;
        grads.reserve(bound.ids.size());
        for (int id : bound.ids) grads.push_back(tape.grad_or_zeros(id));
        const double pre_clip = clip_impl(grads, train_config.grad_clip_norm);
        result.max_post_clip_norm =
            std::max(result.max_post_clip_norm, std::min(pre_clip, train_config.grad_clip_norm));
        adam_step(param_ptrs, grads, adam, t + 1, train_config);

        // candidate extraction straight from the training forward
        const ad::Mat<T>& prob = tape.value(nodes.prob);
        for (std::size_t i = 0; i < prob.size(); ++i)
            prob_buffer[i] = static_cast<double>(prob.data[i]);

        bool updated = false;
        for (std::size_t copy = 0; copy < copies; ++copy) {
            std::span<const double> slice(prob_buffer.data() + copy * n_original * k,
                                          n_original * k);
            Assignment assignment = discretize(kind, slice, k);
            Metrics metrics = evaluate(assignment, original_graph);
            updated |= tracker.offer(assignment, metrics, t);
        }
        if (updated) last_best_update = t;

        if (train_config.trace_every > 0 && t % train_config.trace_every == 0) {
            const double best_metric =
                tracker.has_best ? headline_from_metrics(kind, tracker.metrics)
                                 : std::numeric_limits<double>::quiet_NaN();
            result.loss_trace.push_back({t, loss, best_metric});
        }

        // Convergence watches a penalty-independent loss for MIS so the ramp
        // itself does not mask a plateau.
        double window_loss = loss;
        if (kind == ProblemKind::mis)
            window_loss = relaxed_loss(kind, graph, prob_buffer, 1, 2.0);

        window.push_back(window_loss);
        if (window.size() > train_config.loss_window) window.pop_front();
        if (window.size() == train_config.loss_window) {
            const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
            if (*hi - *lo < train_config.loss_delta) {
                finish(StopReason::converged, t + 1);
                break;
            }
        }
        if (kind == ProblemKind::coloring &&
            std::abs(loss) < train_config.coloring_abs_stop) {
            finish(StopReason::abs_stop, t + 1);
            break;
        }
        if (train_config.best_stall_iters > 0 && tracker.has_best &&
            t - last_best_update >= train_config.best_stall_iters) {
            finish(StopReason::converged, t + 1);
            break;
        }
        if (train_config.checkpoint_every > 0 && train_config.checkpoint_sink &&
            (t + 1) % train_config.checkpoint_every == 0) {
            train_config.checkpoint_sink(seed, t + 1, params.template cast<float>());
        }

        // detach outputs into the next iteration's recurrent feature
        recurrent.raw = tape.value(nodes.raw);
        recurrent.prob = tape.value(nodes.prob);
    }
    if (t == train_config.max_iters) finish(StopReason::max_iters, t);

    if (kind == ProblemKind::mis && !tracker.has_best) {
        // no feasible iterate was ever seen: repair the final iterate
        std::span<const double> slice(prob_buffer.data(), n_original);
        Assignment final_assignment = discretize(kind, slice, 1);
        final_assignment = repair_mis(original_graph, std::move(final_assignment), slice);
        tracker.offer(final_assignment, evaluate(final_assignment, original_graph),
                      t > 0 ? t - 1 : 0);
        result.mis_repair_applied = true;
    }
    if (!tracker.has_best) {
        std::span<const double> slice(prob_buffer.data(), n_original * k);
        Assignment fallback = discretize(kind, slice, k);
        Metrics metrics = evaluate(fallback, original_graph);
        tracker.offer(fallback, metrics, 0);
    }

    result.best_assignment = tracker.assignment;
    result.best_metrics = tracker.metrics;
    result.best_iteration = tracker.iteration;
    return result;
}

} // namespace

double headline_metric(ProblemKind kind, const RunResult& result) {
    return headline_from_metrics(kind, result.best_metrics);
}

bool result_better(ProblemKind kind, const RunResult& a, const RunResult& b) {
    const double ma = headline_metric(kind, a);
    const double mb = headline_metric(kind, b);
    if (kind == ProblemKind::coloring) return ma < mb;
    if (kind == ProblemKind::mis && a.best_metrics.feasible != b.best_metrics.feasible)
        return a.best_metrics.feasible;
    return ma > mb;
}

RunResult train(ProblemKind kind, const Graph& graph, const model::ModelConfig& model_config,
                const TrainConfig& train_config, std::uint64_t seed) {
    if (train_config.precision == Precision::double_)
        return train_impl<double>(kind, graph, model_config, train_config, seed);
    return train_impl<float>(kind, graph, model_config, train_config, seed);
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QUBOSOLVE_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 0) return static_cast<std::size_t>(parsed);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t base_seed, std::size_t count) {
    rng::SplitMix64 sm(base_seed ^ 0x5eedba5eULL);
    std::vector<std::uint64_t> seeds(count);
    for (auto& s : seeds) s = sm.next();
    return seeds;
}

MultiSeedResult multi_seed(ProblemKind kind, const Graph& graph,
                           const model::ModelConfig& model_config,
                           const TrainConfig& train_config,
                           std::span<const std::uint64_t> seeds, std::size_t threads) {
    if (seeds.empty()) throw std::invalid_argument("multi_seed requires at least one seed");
    const std::size_t workers = std::min(resolve_threads(threads), seeds.size());

    std::vector<RunResult> results(seeds.size());
    std::vector<std::string> errors(seeds.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                results[i] = train(kind, graph, model_config, train_config, seeds[i]);
            } catch (const TrainAbort& e) {
                results[i] = e.partial;
                errors[i] = e.what();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error(err);

    MultiSeedResult out;
    out.per_seed = std::move(results);
    std::size_t best_index = 0;
    std::vector<double> metrics;
    metrics.reserve(out.per_seed.size());
    for (std::size_t i = 0; i < out.per_seed.size(); ++i) {
        metrics.push_back(headline_metric(kind, out.per_seed[i]));
        if (i > 0 && result_better(kind, out.per_seed[i], out.per_seed[best_index]))
            best_index = i;
    }
    out.best = out.per_seed[best_index];

    std::sort(metrics.begin(), metrics.end());
    const std::size_t n = metrics.size();
    const double median =
        n % 2 == 1 ? metrics[n / 2] : 0.5 * (metrics[n / 2 - 1] + metrics[n / 2]);
    if (kind == ProblemKind::coloring) {
        out.summary = {metrics.front(), median, metrics.back()}; // fewer violations is better
    } else {
        out.summary = {metrics.back(), median, metrics.front()};
    }
    return out;
}

ChromaticResult chromatic_search(const Graph& graph, std::size_t start_k, std::size_t max_k,
                                 std::size_t seeds_per_k, const TrainConfig& train_config,
                                 std::uint64_t base_seed, std::size_t threads,
                                 const model::ModelConfig* config_template) {
    if (start_k < 1) throw std::invalid_argument("chromatic_search requires start_k >= 1");
    if (seeds_per_k < 1) throw std::invalid_argument("seeds_per_k must be >= 1");

    ChromaticResult result;
    result.best_violations = std::numeric_limits<std::size_t>::max();
    const auto seeds = derive_seeds(base_seed, seeds_per_k);
    const std::size_t workers = resolve_threads(threads);

    for (std::size_t k = start_k; k <= max_k; ++k) {
        model::ModelConfig config =
            config_template ? *config_template
                            : model::default_model_config(ProblemKind::coloring, k);
        config.out_dim = k;

        std::size_t min_violations = std::numeric_limits<std::size_t>::max();
        Assignment best_coloring;
        // seeds run in small parallel batches with an early exit between batches
        for (std::size_t batch = 0; batch < seeds.size() && min_violations > 0;
             batch += workers) {
            const std::size_t count = std::min(workers, seeds.size() - batch);
            MultiSeedResult batch_result =
                multi_seed(ProblemKind::coloring, graph, config, train_config,
                           {seeds.data() + batch, count}, workers);
            if (batch_result.best.best_metrics.violations < min_violations) {
                min_violations = batch_result.best.best_metrics.violations;
                best_coloring = batch_result.best.best_assignment;
            }
        }

        result.attempts.emplace_back(k, min_violations);
        if (min_violations < result.best_violations) {
            result.best_violations = min_violations;
            result.best_k = k;
        }
        if (min_violations == 0) {
            result.found = true;
            result.k = k;
            result.coloring = std::move(best_coloring);
            return result;
        }
    }
    return result;
}

} // namespace qgnn::train
