#include "qubognn/gradcheck.hpp"

#include <limits>
#include <sstream>

namespace qgnn::gradcheck {

namespace {

double run_loss(ProblemKind kind, const Graph& graph, const model::Params<double>& params,
                const ad::Mat<double>& features, const model::ModelConfig& config,
                std::uint64_t dropout_seed, double mis_penalty,
                std::vector<ad::Mat<double>>* grads_out) {
    auto dropout_rng = rng::make_stream(dropout_seed, rng::Stream::dropout);
    ad::Tape<double> tape(&graph);
    auto bound = model::bind_params(tape, params);
    const int feat = tape.input(features);
    int rec = -1;
    if (config.use_recurrent) {
        auto zeros = model::RecurrentState<double>::zeros(graph.num_nodes(), config.out_dim);
        rec = tape.input(model::make_recurrent(zeros.raw, zeros.prob, config.recurrent_mode));
    }
    auto nodes = model::forward(tape, params, bound, feat, rec, config, dropout_rng);
    int loss;
    switch (kind) {
        case ProblemKind::maxcut: loss = tape.maxcut_loss(nodes.prob); break;
        case ProblemKind::coloring: loss = tape.coloring_loss(nodes.prob); break;
        case ProblemKind::mis: loss = tape.mis_loss(nodes.prob, mis_penalty); break;
        default: throw std::logic_error("unreachable");
    }
    const double value = tape.value(loss)(0, 0);
    if (grads_out) {
        tape.backward(loss);
        grads_out->clear();
        for (int id : bound.ids) grads_out->push_back(tape.grad_or_zeros(id));
    }
    return value;
}

} // namespace

CaseResult check_full_model(ProblemKind kind, const Graph& graph,
                            const model::ModelConfig& config, std::uint64_t seed,
                            double step) {
    auto feature_rng = rng::make_stream(seed, rng::Stream::features);
    auto init_rng = rng::make_stream(seed, rng::Stream::init);
    const auto features = model::build_static_features<double>(graph, config, feature_rng);
    model::Params<double> params = model::init_model<double>(config, init_rng);
    // The audit runs at a generic point. The standard zero-bias init is
    // degenerate for differentiation: a dead rectifier column turns both
    // batchnorm outputs into the constant beta = 0 and parks relu(bn1 + bn2)
    // exactly on its kink, where central differences are meaningless.
    params.visit([&](ad::Mat<double>& m) {
        for (auto& v : m.data) v += init_rng.uniform(-0.05, 0.05);
    });
    const double mis_penalty = 1.1;

    std::vector<ad::Mat<double>> analytic;
    run_loss(kind, graph, params, features, config, seed, mis_penalty, &analytic);

    std::vector<ad::Mat<double>*> param_ptrs;
    std::vector<const char*> param_names;
    params.visit_named([&](const char* name, ad::Mat<double>& m) {
        param_ptrs.push_back(&m);
        param_names.push_back(name);
    });

    // Per element, the error is the minimum over a ladder of steps: the large
    // step rides over fd roundoff on exactly-zero gradients, the small steps
    // shrink the window in which a perturbation drags a batch-normalized
    // pre-activation across the rectifier kink. A wrong analytic gradient
    // disagrees at every step.
    const double steps[3] = {step, step / 8.0, step / 64.0};
    auto eval = [&] {
        return run_loss(kind, graph, params, features, config, seed, mis_penalty, nullptr);
    };

    CaseResult result;
    for (std::size_t pi = 0; pi < param_ptrs.size(); ++pi) {
        ad::Mat<double>& param = *param_ptrs[pi];
        double layer_worst = 0.0;
        for (std::size_t e = 0; e < param.size(); ++e) {
            const double saved = param.data[e];
            const double analytic_value = analytic[pi].data[e];
            double best = std::numeric_limits<double>::infinity();
            for (const double h : steps) {
                param.data[e] = saved + h;
                const double up = eval();
                param.data[e] = saved - h;
                const double down = eval();
                param.data[e] = saved;
                const double numeric = (up - down) / (2.0 * h);
                const double denom =
                    std::max({std::abs(analytic_value), std::abs(numeric), 1e-8});
                best = std::min(best, std::abs(analytic_value - numeric) / denom);
                if (best < 1e-6) break; // clearly agreeing, skip smaller steps
            }
            layer_worst = std::max(layer_worst, best);
        }
        result.max_rel_error = std::max(result.max_rel_error, layer_worst);
        result.layer_errors.emplace_back(param_names[pi], layer_worst);
        result.parameter_count += param.size();
    }

    std::ostringstream name;
    name << to_string(kind) << '/' << model::to_string(config.conv_type) << '/'
         << model::to_string(config.parallel_layers);
    result.name = name.str();
    return result;
}

std::vector<CaseResult> full_suite(std::uint64_t seed, std::size_t hidden, double step) {
    // 8 nodes, mixed degrees, plus a degree-1 node exercising sparse rows
    const Graph graph = Graph::from_edges(
        8, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 6}, {5, 6}, {6, 7}});

    std::vector<CaseResult> results;
    for (ProblemKind kind : {ProblemKind::maxcut, ProblemKind::coloring, ProblemKind::mis}) {
        for (model::ConvType conv : {model::ConvType::sage, model::ConvType::gcn}) {
            for (model::ParallelLayers layers :
                 {model::ParallelLayers::both, model::ParallelLayers::mean_only,
                  model::ParallelLayers::pool_only}) {
                model::ModelConfig config = model::default_model_config(
                    kind, kind == ProblemKind::coloring ? 3 : 0);
                config.hidden_size = hidden;
                config.conv_type = conv;
                config.parallel_layers = layers;
                results.push_back(check_full_model(kind, graph, config, seed, step));
            }
        }
    }
    return results;
}

} // namespace qgnn::gradcheck
