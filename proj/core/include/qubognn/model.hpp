#pragma once

#include "qubognn/graph.hpp"
#include "qubognn/qubo.hpp"
#include "qubognn/rng.hpp"
#include "qubognn/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgnn::model {

enum class ConvType { sage, gcn };
enum class RecurrentMode { raw, prob, both };
enum class ParallelLayers { both, mean_only, pool_only };

std::string_view to_string(ConvType v);
std::string_view to_string(RecurrentMode v);
std::string_view to_string(ParallelLayers v);
ConvType conv_type_from_string(std::string_view s);
RecurrentMode recurrent_mode_from_string(std::string_view s);
ParallelLayers parallel_layers_from_string(std::string_view s);

struct ModelConfig {
    ConvType conv_type = ConvType::sage;
    std::size_t hidden_size = 50; // 50 for maxcut/mis, 140 for coloring
    std::size_t out_dim = 1;      // 1 for maxcut/mis, k for coloring
    RecurrentMode recurrent_mode = RecurrentMode::both;
    ParallelLayers parallel_layers = ParallelLayers::both;
    double dropout_rate = 0.5;
    std::size_t random_dim = 10;
    bool use_shared = true;
    bool use_pagerank = true;
    bool use_recurrent = true;

    std::size_t static_dim() const {
        return random_dim + (use_shared ? 1 : 0) + (use_pagerank ? 1 : 0);
    }
    std::size_t recurrent_dim() const {
        if (!use_recurrent) return 0;
        return out_dim * (recurrent_mode == RecurrentMode::both ? 2 : 1);
    }
    std::size_t input_dim() const { return static_dim() + recurrent_dim(); }

    void validate() const {
        if (hidden_size < 1) throw std::invalid_argument("hidden_size must be >= 1");
        if (out_dim < 1) throw std::invalid_argument("out_dim must be >= 1");
        if (dropout_rate < 0.0 || dropout_rate >= 1.0)
            throw std::invalid_argument("dropout_rate must be in [0, 1)");
        if (input_dim() == 0) throw std::invalid_argument("model input has zero width");
    }
};

// Sensible defaults per problem kind (hidden width of the binary problems vs
// coloring, output width 1 vs k).
ModelConfig default_model_config(ProblemKind kind, std::size_t k = 0);

constexpr double kBatchNormEps = 1e-5;

// All trainable weights. Branches absent under the current config stay empty
// and are skipped by visit().
template <class T>
struct Params {
    ad::Mat<T> w_mean, b_mean;         // mean-aggregation branch
    ad::Mat<T> w_pool_pre, b_pool_pre; // pool pre-transform (sage only)
    ad::Mat<T> w_pool, b_pool;         // pool-aggregation branch
    ad::Mat<T> bn1_gamma, bn1_beta;    // after mean branch
    ad::Mat<T> bn2_gamma, bn2_beta;    // after pool branch
    ad::Mat<T> w_out, b_out;           // final mean-aggregation layer

    // Fixed traversal order; defines the parameter flattening used by the
    // optimizer, the gradient clip and the checkpoint format.
    template <class F>
    void visit_named(F&& f) {
        visit_impl(*this, std::forward<F>(f));
    }
    template <class F>
    void visit_named(F&& f) const {
        visit_impl(*this, std::forward<F>(f));
    }
    template <class F>
    void visit(F&& f) {
        visit_impl(*this, [&](const char*, ad::Mat<T>& m) { f(m); });
    }
    template <class F>
    void visit(F&& f) const {
        visit_impl(*this, [&](const char*, const ad::Mat<T>& m) { f(m); });
    }

    std::size_t scalar_count() const {
        std::size_t total = 0;
        visit([&](const ad::Mat<T>& m) { total += m.size(); });
        return total;
    }

private:
    template <class Self, class F>
    static void visit_impl(Self& self, F&& f) {
        auto call = [&](const char* name, auto& m) {
            if (!m.empty()) f(name, m);
        };
        call("w_mean", self.w_mean);
        call("b_mean", self.b_mean);
        call("w_pool_pre", self.w_pool_pre);
        call("b_pool_pre", self.b_pool_pre);
        call("w_pool", self.w_pool);
        call("b_pool", self.b_pool);
        call("bn1_gamma", self.bn1_gamma);
        call("bn1_beta", self.bn1_beta);
        call("bn2_gamma", self.bn2_gamma);
        call("bn2_beta", self.bn2_beta);
        call("w_out", self.w_out);
        call("b_out", self.b_out);
    }

public:
    template <class U>
    Params<U> cast() const {
        Params<U> out;
        out.w_mean = w_mean.template cast<U>();
        out.b_mean = b_mean.template cast<U>();
        out.w_pool_pre = w_pool_pre.template cast<U>();
        out.b_pool_pre = b_pool_pre.template cast<U>();
        out.w_pool = w_pool.template cast<U>();
        out.b_pool = b_pool.template cast<U>();
        out.bn1_gamma = bn1_gamma.template cast<U>();
        out.bn1_beta = bn1_beta.template cast<U>();
        out.bn2_gamma = bn2_gamma.template cast<U>();
        out.bn2_beta = bn2_beta.template cast<U>();
        out.w_out = w_out.template cast<U>();
        out.b_out = b_out.template cast<U>();
        return out;
    }
};

// Per-node recurrent feature carried across iterations, always detached from
// the record that produced it. raw is the pre-activation output, prob the
// sigmoid / row-softmax of it. Both start at zero.
template <class T>
struct RecurrentState {
    ad::Mat<T> raw;
    ad::Mat<T> prob;

    static RecurrentState zeros(std::size_t n, std::size_t out_dim) {
        return {ad::Mat<T>(n, out_dim, T(0)), ad::Mat<T>(n, out_dim, T(0))};
    }
};

template <class T>
ad::Mat<T> make_recurrent(const ad::Mat<T>& raw, const ad::Mat<T>& prob,
                          RecurrentMode mode) {
    switch (mode) {
        case RecurrentMode::raw: return raw;
        case RecurrentMode::prob: return prob;
        case RecurrentMode::both: {
            ad::Mat<T> out(raw.rows, raw.cols + prob.cols);
            for (std::size_t i = 0; i < raw.rows; ++i) {
                for (std::size_t j = 0; j < raw.cols; ++j) out(i, j) = raw(i, j);
                for (std::size_t j = 0; j < prob.cols; ++j) out(i, raw.cols + j) = prob(i, j);
            }
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

// Static input features, sampled once per run and frozen:
// [random_dim uniform columns | constant 1.0 column | pagerank column].
template <class T>
ad::Mat<T> build_static_features(const Graph& g, const ModelConfig& config,
                                 rng::Xoshiro256ss& rng) {
    config.validate();
    const std::size_t n = g.num_nodes();
    ad::Mat<T> features(n, config.static_dim());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < config.random_dim; ++j)
            features(i, j) = static_cast<T>(rng.uniform());
    std::size_t col = config.random_dim;
    if (config.use_shared) {
        for (std::size_t i = 0; i < n; ++i) features(i, col) = T(1);
        ++col;
    }
    if (config.use_pagerank) {
        const auto pr = pagerank(g);
        for (std::size_t i = 0; i < n; ++i) features(i, col) = static_cast<T>(pr[i]);
    }
    return features;
}

namespace detail {

template <class T>
ad::Mat<T> glorot(std::size_t fan_in, std::size_t fan_out, std::size_t rows,
                  std::size_t cols, rng::Xoshiro256ss& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    ad::Mat<T> m(rows, cols);
    for (auto& v : m.data) v = static_cast<T>(rng.uniform(-limit, limit));
    return m;
}

} // namespace detail

// Glorot-uniform weights, zero biases, batchnorm gamma=1 beta=0. Matrices are
// drawn in visit() order, so a seed pins every byte of the result.
template <class T>
Params<T> init_model(const ModelConfig& config, rng::Xoshiro256ss& rng) {
    config.validate();
    const std::size_t in = config.input_dim();
    const std::size_t hidden = config.hidden_size;
    const std::size_t out = config.out_dim;
    const bool sage = config.conv_type == ConvType::sage;
    const std::size_t branch_in = sage ? 2 * in : in;
    const std::size_t out_in = sage ? 2 * hidden : hidden;
    const bool mean_branch = config.parallel_layers != ParallelLayers::pool_only;
    const bool pool_branch = config.parallel_layers != ParallelLayers::mean_only;

    Params<T> p;
    if (mean_branch) {
        p.w_mean = detail::glorot<T>(branch_in, hidden, branch_in, hidden, rng);
        p.b_mean = ad::Mat<T>(1, hidden, T(0));
    }
    if (pool_branch) {
        if (sage) {
            p.w_pool_pre = detail::glorot<T>(in, in, in, in, rng);
            p.b_pool_pre = ad::Mat<T>(1, in, T(0));
        }
        p.w_pool = detail::glorot<T>(branch_in, hidden, branch_in, hidden, rng);
        p.b_pool = ad::Mat<T>(1, hidden, T(0));
    }
    if (mean_branch) {
        p.bn1_gamma = ad::Mat<T>(1, hidden, T(1));
        p.bn1_beta = ad::Mat<T>(1, hidden, T(0));
    }
    if (pool_branch) {
        p.bn2_gamma = ad::Mat<T>(1, hidden, T(1));
        p.bn2_beta = ad::Mat<T>(1, hidden, T(0));
    }
    p.w_out = detail::glorot<T>(out_in, out, out_in, out, rng);
    p.b_out = ad::Mat<T>(1, out, T(0));
    return p;
}

// Tape leaf ids of the bound parameters, in visit() order.
struct BoundParams {
    std::vector<int> ids;
};

template <class T>
BoundParams bind_params(ad::Tape<T>& tape, const Params<T>& params) {
    BoundParams bound;
    params.visit([&](const ad::Mat<T>& m) { bound.ids.push_back(tape.param(m)); });
    return bound;
}

struct ForwardNodes {
    int prob = -1; // sigmoid (out_dim 1) or row-softmax (coloring)
    int raw = -1;  // pre-activation output
};

// One full forward pass: parallel mean/pool convolutions over the fused
// static+recurrent input, batchnorm on each branch, rectified sum, dropout,
// and a final mean-aggregation layer. conv gcn swaps each aggregation block
// for the symmetric-normalized form, keeping the macro-topology.
template <class T>
ForwardNodes forward(ad::Tape<T>& tape, const Params<T>& params, const BoundParams& bound,
                     int static_features, int recurrent_features, const ModelConfig& config,
                     rng::Xoshiro256ss& dropout_rng) {
    config.validate();
    const bool sage = config.conv_type == ConvType::sage;
    const bool mean_branch = config.parallel_layers != ParallelLayers::pool_only;
    const bool pool_branch = config.parallel_layers != ParallelLayers::mean_only;

    // id lookup in visit order
    std::size_t cursor = 0;
    auto next_id = [&](const ad::Mat<T>& m) -> int {
        return m.empty() ? -1 : bound.ids.at(cursor++);
    };
    const int w_mean = next_id(params.w_mean);
    const int b_mean = next_id(params.b_mean);
    const int w_pool_pre = next_id(params.w_pool_pre);
    const int b_pool_pre = next_id(params.b_pool_pre);
    const int w_pool = next_id(params.w_pool);
    const int b_pool = next_id(params.b_pool);
    const int bn1_gamma = next_id(params.bn1_gamma);
    const int bn1_beta = next_id(params.bn1_beta);
    const int bn2_gamma = next_id(params.bn2_gamma);
    const int bn2_beta = next_id(params.bn2_beta);
    const int w_out = next_id(params.w_out);
    const int b_out = next_id(params.b_out);

    int h0 = static_features;
    if (config.use_recurrent) {
        if (recurrent_features < 0)
            throw std::invalid_argument("forward: recurrent features required");
        h0 = tape.concat_cols(static_features, recurrent_features);
    }

    auto sage_block = [&](int x, int w, int b, bool pool) {
        int agg = pool ? tape.neighbor_pool(x, w_pool_pre, b_pool_pre) : tape.neighbor_mean(x);
        return tape.relu(tape.affine(tape.concat_cols(x, agg), w, b));
    };
    auto gcn_block = [&](int x, int w, int b) {
        return tape.relu(tape.affine(tape.gcn_norm(x), w, b));
    };

    int fused = -1;
    if (mean_branch && pool_branch) {
        int h1 = sage ? sage_block(h0, w_mean, b_mean, false) : gcn_block(h0, w_mean, b_mean);
        int h2 = sage ? sage_block(h0, w_pool, b_pool, true) : gcn_block(h0, w_pool, b_pool);
        int n1 = tape.batchnorm(h1, bn1_gamma, bn1_beta, static_cast<T>(kBatchNormEps));
        int n2 = tape.batchnorm(h2, bn2_gamma, bn2_beta, static_cast<T>(kBatchNormEps));
        fused = tape.relu(tape.add(n1, n2));
    } else if (mean_branch) {
        int h1 = sage ? sage_block(h0, w_mean, b_mean, false) : gcn_block(h0, w_mean, b_mean);
        fused = tape.relu(tape.batchnorm(h1, bn1_gamma, bn1_beta, static_cast<T>(kBatchNormEps)));
    } else {
        int h2 = sage ? sage_block(h0, w_pool, b_pool, true) : gcn_block(h0, w_pool, b_pool);
        fused = tape.relu(tape.batchnorm(h2, bn2_gamma, bn2_beta, static_cast<T>(kBatchNormEps)));
    }

    int dropped = tape.dropout(fused, config.dropout_rate, dropout_rng);

    int raw;
    if (sage) {
        int agg = tape.neighbor_mean(dropped);
        raw = tape.affine(tape.concat_cols(dropped, agg), w_out, b_out);
    } else {
        raw = tape.affine(tape.gcn_norm(dropped), w_out, b_out);
    }

    ForwardNodes nodes;
    nodes.raw = raw;
    nodes.prob = config.out_dim == 1 ? tape.sigmoid(raw) : tape.softmax_rows(raw);
    return nodes;
}

} // namespace qgnn::model
