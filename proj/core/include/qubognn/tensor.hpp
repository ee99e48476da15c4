#pragma once

#include "qubognn/graph.hpp"
#include "qubognn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <new>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace qgnn::ad {

// Skips value-initialization on resize; every op either fills its output
// completely or asks for an explicit zero fill.
template <class T>
struct uninit_allocator : std::allocator<T> {
    template <class U>
    struct rebind {
        using other = uninit_allocator<U>;
    };
    template <class U>
    void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
        ::new (static_cast<void*>(p)) U;
    }
    template <class U, class... Args>
    void construct(U* p, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
};

// Dense row-major matrix. Training runs in single precision, correctness
// checks in double; both instantiations share this code.
// Mat(r, c) leaves the buffer uninitialized; pass a fill value when the
// contents must start defined.
template <class T>
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<T, uninit_allocator<T>> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
    Mat(std::size_t r, std::size_t c, T fill) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    T operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool empty() const { return data.empty(); }
    std::size_t size() const { return data.size(); }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <class U>
    Mat<U> cast() const {
        Mat<U> out(rows, cols);
        for (std::size_t i = 0; i < data.size(); ++i)
            out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

enum class Op : std::uint8_t {
    input,
    param,
    affine,
    concat_cols,
    add,
    relu,
    sigmoid,
    softmax_rows,
    batchnorm,
    dropout,
    neighbor_mean,
    neighbor_max,
    gcn_norm,
    maxcut_loss,
    coloring_loss,
    mis_loss,
    sum_all,
};

// Records one forward pass over a fixed op set and replays it in reverse for
// exact gradients. A record is consumed by exactly one backward() call;
// reset() recycles the buffers so a training loop can reuse one tape per run
// without reallocating. Neighbor aggregation ops need the graph the record
// was created with. Gradients do not flow into `input` leaves, only into
// `param` leaves and anything derived from them.
template <class T>
class Tape {
public:
    explicit Tape(const Graph* graph = nullptr, bool check_finite = false)
        : graph_(graph), check_finite_(check_finite) {}

    // Drops all nodes but keeps their storage for the next forward pass.
    void reset() {
        for (Node& node : nodes_) {
            reclaim(node.value);
            reclaim(node.grad);
            reclaim(node.aux);
            reclaim(node.aux2);
            reclaim_idx(node.idx);
        }
        nodes_.clear();
        consumed_ = false;
    }

    int input(const Mat<T>& value) { return push(Op::input, copy_in(value), false); }
    int param(const Mat<T>& value) { return push(Op::param, copy_in(value), true); }

    // x: n x in, w: in x out, b: 1 x out (broadcast over rows)
    int affine(int x, int w, int b) {
        const Mat<T>& hx = value(x);
        const Mat<T>& hw = value(w);
        const Mat<T>& hb = value(b);
        if (hx.cols != hw.rows || hb.rows != 1 || hb.cols != hw.cols)
            throw std::invalid_argument("affine: shape mismatch");
        Mat<T> out = make(hx.rows, hw.cols);
        const std::size_t in = hx.cols, width = hw.cols;
        for (std::size_t i = 0; i < hx.rows; ++i) {
            T* __restrict__ out_row = &out.data[i * width];
            const T* __restrict__ bias = hb.data.data();
            for (std::size_t o = 0; o < width; ++o) out_row[o] = bias[o];
            const T* __restrict__ x_row = &hx.data[i * in];
            for (std::size_t k2 = 0; k2 < in; ++k2) {
                const T xv = x_row[k2];
                if (xv == T(0)) continue;
                const T* __restrict__ w_row = &hw.data[k2 * width];
                for (std::size_t o = 0; o < width; ++o) out_row[o] += xv * w_row[o];
            }
        }
        return push(Op::affine, std::move(out), any_grad({x, w, b}), x, w, b);
    }

    int concat_cols(int a, int b) {
        const Mat<T>& ha = value(a);
        const Mat<T>& hb = value(b);
        if (ha.rows != hb.rows) throw std::invalid_argument("concat_cols: row mismatch");
        Mat<T> out = make(ha.rows, ha.cols + hb.cols);
        for (std::size_t i = 0; i < ha.rows; ++i) {
            for (std::size_t j = 0; j < ha.cols; ++j) out(i, j) = ha(i, j);
            for (std::size_t j = 0; j < hb.cols; ++j) out(i, ha.cols + j) = hb(i, j);
        }
        return push(Op::concat_cols, std::move(out), any_grad({a, b}), a, b);
    }

    int add(int a, int b) {
        const Mat<T>& ha = value(a);
        const Mat<T>& hb = value(b);
        if (ha.rows != hb.rows || ha.cols != hb.cols)
            throw std::invalid_argument("add: shape mismatch");
        Mat<T> out = make(ha.rows, ha.cols);
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = ha.data[i] + hb.data[i];
        return push(Op::add, std::move(out), any_grad({a, b}), a, b);
    }

    int relu(int x) {
        const Mat<T>& hx = value(x);
        Mat<T> out = make(hx.rows, hx.cols);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const T v = hx.data[i];
            out.data[i] = v > T(0) ? v : T(0);
        }
        return push(Op::relu, std::move(out), any_grad({x}), x);
    }

    int sigmoid(int x) {
        const Mat<T>& hx = value(x);
        Mat<T> out = make(hx.rows, hx.cols);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const T v = hx.data[i];
            if (v >= T(0)) {
                const T e = std::exp(-v);
                out.data[i] = T(1) / (T(1) + e);
            } else {
                const T e = std::exp(v);
                out.data[i] = e / (T(1) + e);
            }
        }
        return push(Op::sigmoid, std::move(out), any_grad({x}), x);
    }

    int softmax_rows(int x) {
        const Mat<T>& hx = value(x);
        Mat<T> out = make(hx.rows, hx.cols);
        for (std::size_t i = 0; i < out.rows; ++i) {
            const T* in_row = &hx.data[i * hx.cols];
            T* row = &out.data[i * out.cols];
            T mx = in_row[0];
            for (std::size_t j = 1; j < out.cols; ++j) mx = std::max(mx, in_row[j]);
            T sum = T(0);
            for (std::size_t j = 0; j < out.cols; ++j) {
                row[j] = std::exp(in_row[j] - mx);
                sum += row[j];
            }
            for (std::size_t j = 0; j < out.cols; ++j) row[j] /= sum;
        }
        return push(Op::softmax_rows, std::move(out), any_grad({x}), x);
    }

    // Column statistics over all rows (the node batch), biased variance,
    // then per-column scale/shift. No running statistics are kept.
    int batchnorm(int x, int gamma, int beta, T eps) {
        const Mat<T>& hx = value(x);
        const Mat<T>& hg = value(gamma);
        const Mat<T>& hb = value(beta);
        if (hg.rows != 1 || hg.cols != hx.cols || hb.rows != 1 || hb.cols != hx.cols)
            throw std::invalid_argument("batchnorm: parameter shape mismatch");
        const std::size_t n = hx.rows, c = hx.cols;
        Mat<T> normalized = make(n, c);
        Mat<T> invstd = make(1, c);
        for (std::size_t j = 0; j < c; ++j) {
            T mean = T(0);
            for (std::size_t i = 0; i < n; ++i) mean += hx(i, j);
            mean /= static_cast<T>(n);
            T var = T(0);
            for (std::size_t i = 0; i < n; ++i) {
                const T d = hx(i, j) - mean;
                var += d * d;
            }
            var /= static_cast<T>(n);
            const T is = T(1) / std::sqrt(var + eps);
            invstd(0, j) = is;
            for (std::size_t i = 0; i < n; ++i) normalized(i, j) = (hx(i, j) - mean) * is;
        }
        Mat<T> out = make(n, c);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j)
                out(i, j) = hg.data[j] * normalized(i, j) + hb.data[j];
        int id = push(Op::batchnorm, std::move(out), any_grad({x, gamma, beta}), x, gamma, beta);
        nodes_[id].aux = std::move(normalized);
        nodes_[id].aux2 = std::move(invstd);
        return id;
    }

    // Inverted dropout, always in training mode. rate == 0 keeps the input
    // bit-identical and draws nothing from the generator.
    int dropout(int x, double rate, rng::Xoshiro256ss& rng) {
        if (rate < 0.0 || rate >= 1.0)
            throw std::invalid_argument("dropout rate must be in [0, 1)");
        if (rate == 0.0) {
            int id = push(Op::dropout, copy_in(value(x)), any_grad({x}), x);
            return id; // empty mask means identity
        }
        const Mat<T>& hx = value(x);
        const T scale = static_cast<T>(1.0 / (1.0 - rate));
        Mat<T> mask = make(hx.rows, hx.cols);
        Mat<T> out = make(hx.rows, hx.cols);
        for (std::size_t i = 0; i < hx.size(); ++i) {
            const T m = rng.uniform() < rate ? T(0) : scale;
            mask.data[i] = m;
            out.data[i] = hx.data[i] * m;
        }
        int id = push(Op::dropout, std::move(out), any_grad({x}), x);
        nodes_[id].aux = std::move(mask);
        return id;
    }

    // Row i of the output is the mean of x over N(i); zero for isolated nodes.
    int neighbor_mean(int x) {
        const Graph& g = need_graph();
        const Mat<T>& hx = value(x);
        if (hx.rows != g.num_nodes()) throw std::invalid_argument("neighbor_mean: row mismatch");
        Mat<T> out = make_zero(hx.rows, hx.cols);
        for (std::uint32_t i = 0; i < g.num_nodes(); ++i) {
            const auto nb = g.neighbors(i);
            if (nb.empty()) continue;
            T* out_row = &out.data[i * out.cols];
            for (std::uint32_t j : nb) {
                const T* in_row = &hx.data[static_cast<std::size_t>(j) * hx.cols];
                for (std::size_t cidx = 0; cidx < hx.cols; ++cidx) out_row[cidx] += in_row[cidx];
            }
            const T inv = T(1) / static_cast<T>(nb.size());
            for (std::size_t cidx = 0; cidx < hx.cols; ++cidx) out_row[cidx] *= inv;
        }
        return push(Op::neighbor_mean, std::move(out), any_grad({x}), x);
    }

    // Element-wise max over N(i). The backward pass routes each output
    // element's gradient to the first (lowest-index) neighbor attaining the
    // max. Isolated nodes produce a zero row and receive no gradient.
    int neighbor_max(int x) {
        const Graph& g = need_graph();
        const Mat<T>& hx = value(x);
        if (hx.rows != g.num_nodes()) throw std::invalid_argument("neighbor_max: row mismatch");
        Mat<T> out = make_zero(hx.rows, hx.cols);
        std::vector<std::int32_t> argmax = make_idx(hx.rows * hx.cols);
        for (std::uint32_t i = 0; i < g.num_nodes(); ++i) {
            const auto nb = g.neighbors(i);
            if (nb.empty()) continue;
            T* out_row = &out.data[i * out.cols];
            std::int32_t* arg_row = &argmax[i * out.cols];
            bool first = true;
            for (std::uint32_t j : nb) { // sorted, so first max wins ties
                const T* in_row = &hx.data[static_cast<std::size_t>(j) * hx.cols];
                if (first) {
                    for (std::size_t cidx = 0; cidx < hx.cols; ++cidx) {
                        out_row[cidx] = in_row[cidx];
                        arg_row[cidx] = static_cast<std::int32_t>(j);
                    }
                    first = false;
                } else {
                    for (std::size_t cidx = 0; cidx < hx.cols; ++cidx) {
                        if (in_row[cidx] > out_row[cidx]) {
                            out_row[cidx] = in_row[cidx];
                            arg_row[cidx] = static_cast<std::int32_t>(j);
                        }
                    }
                }
            }
        }
        int id = push(Op::neighbor_max, std::move(out), any_grad({x}), x);
        nodes_[id].idx = std::move(argmax);
        return id;
    }

    // GraphSAGE pool aggregation: trainable affine + rectifier per neighbor
    // row, then element-wise max.
    int neighbor_pool(int x, int w_pool, int b_pool) {
        return neighbor_max(relu(affine(x, w_pool, b_pool)));
    }

    // Symmetric-normalized aggregation with self-loops:
    // out_i = sum_{j in N(i) + i} x_j / sqrt((deg_i + 1) (deg_j + 1)).
    // The operator is symmetric, so backward applies it to the gradient.
    int gcn_norm(int x) {
        const Graph& g = need_graph();
        const Mat<T>& hx = value(x);
        if (hx.rows != g.num_nodes()) throw std::invalid_argument("gcn_norm: row mismatch");
        Mat<T> out = apply_gcn(hx);
        return push(Op::gcn_norm, std::move(out), any_grad({x}), x);
    }

    // Relaxed losses as scalar-output ops with analytic edge-sum backward.
    int maxcut_loss(int p) {
        const Graph& g = need_graph();
        const Mat<T>& hp = value(p);
        require_prob_shape(hp, 1, "maxcut_loss");
        double loss = 0.0;
        for (const auto& [u, v] : g.edges())
            loss += 2.0 * static_cast<double>(hp.data[u]) * static_cast<double>(hp.data[v]) -
                    static_cast<double>(hp.data[u]) - static_cast<double>(hp.data[v]);
        Mat<T> out(1, 1, static_cast<T>(loss));
        return push(Op::maxcut_loss, std::move(out), any_grad({p}), p);
    }

    int coloring_loss(int p) {
        const Graph& g = need_graph();
        const Mat<T>& hp = value(p);
        if (hp.rows != g.num_nodes()) throw std::invalid_argument("coloring_loss: row mismatch");
        double loss = 0.0;
        for (const auto& [u, v] : g.edges()) {
            const T* pu = &hp.data[static_cast<std::size_t>(u) * hp.cols];
            const T* pv = &hp.data[static_cast<std::size_t>(v) * hp.cols];
            for (std::size_t c = 0; c < hp.cols; ++c)
                loss += static_cast<double>(pu[c]) * static_cast<double>(pv[c]);
        }
        Mat<T> out(1, 1, static_cast<T>(loss));
        return push(Op::coloring_loss, std::move(out), any_grad({p}), p);
    }

    int mis_loss(int p, T penalty) {
        const Graph& g = need_graph();
        const Mat<T>& hp = value(p);
        require_prob_shape(hp, 1, "mis_loss");
        double loss = 0.0;
        for (std::size_t i = 0; i < hp.rows; ++i) loss -= static_cast<double>(hp.data[i]);
        for (const auto& [u, v] : g.edges())
            loss += static_cast<double>(penalty) * static_cast<double>(hp.data[u]) *
                    static_cast<double>(hp.data[v]);
        Mat<T> out(1, 1, static_cast<T>(loss));
        int id = push(Op::mis_loss, std::move(out), any_grad({p}), p);
        nodes_[id].scalar = penalty;
        return id;
    }

    int sum_all(int x) {
        const Mat<T>& hx = value(x);
        T total = T(0);
        for (T v : hx.data) total += v;
        Mat<T> out(1, 1, total);
        return push(Op::sum_all, std::move(out), any_grad({x}), x);
    }

    const Mat<T>& value(int id) const { return nodes_[check_id(id)].value; }

    // Zero matrix when no gradient reached the node.
    const Mat<T>& grad(int id) const {
        const Node& node = nodes_[check_id(id)];
        if (node.grad.empty()) {
            static const Mat<T> empty;
            return empty;
        }
        return node.grad;
    }

    Mat<T> grad_or_zeros(int id) const {
        const Node& node = nodes_[check_id(id)];
        if (node.grad.empty()) return Mat<T>(node.value.rows, node.value.cols, T(0));
        return node.grad;
    }

    // Reverse sweep from a scalar node. May be called once per record.
    void backward(int loss_id) {
        if (consumed_)
            throw std::logic_error("backward: record already consumed");
        consumed_ = true;
        Node& loss = nodes_[check_id(loss_id)];
        if (loss.value.rows != 1 || loss.value.cols != 1)
            throw std::invalid_argument("backward: loss must be a 1x1 scalar");
        loss.grad = Mat<T>(1, 1, T(1));

        for (int id = loss_id; id >= 0; --id) {
            Node& node = nodes_[id];
            if (node.grad.empty() || !node.needs_grad) continue;
            backward_node(node);
        }
    }

    std::size_t node_count() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

private:
    struct Node {
        Op op;
        int a = -1, b = -1, c = -1;
        bool needs_grad = false;
        Mat<T> value;
        Mat<T> grad;
        Mat<T> aux;                     // dropout mask / batchnorm normalized input
        Mat<T> aux2;                    // batchnorm inverse stddev row
        std::vector<std::int32_t> idx;  // neighbor_max argmax
        T scalar = T(0);                // mis penalty
    };

    const Graph& need_graph() const {
        if (!graph_) throw std::logic_error("this op requires a graph-bound record");
        return *graph_;
    }

    int check_id(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
            throw std::out_of_range("bad tape node id");
        return id;
    }

    bool any_grad(std::initializer_list<int> ids) const {
        for (int id : ids)
            if (id >= 0 && nodes_[check_id(id)].needs_grad) return true;
        return false;
    }

    void require_prob_shape(const Mat<T>& m, std::size_t cols, const char* who) const {
        if (m.rows != need_graph().num_nodes() || m.cols != cols)
            throw std::invalid_argument(std::string(who) + ": bad shape");
    }

    int push(Op op, Mat<T> value, bool needs_grad, int a = -1, int b = -1, int c = -1) {
        if (check_finite_ && !value.all_finite())
            throw std::runtime_error("non-finite activation in op #" +
                                     std::to_string(nodes_.size()) + " (op code " +
                                     std::to_string(static_cast<int>(op)) + ")");
        Node node;
        node.op = op;
        node.a = a;
        node.b = b;
        node.c = c;
        node.needs_grad = needs_grad || op == Op::param;
        node.value = std::move(value);
        nodes_.push_back(std::move(node));
        return static_cast<int>(nodes_.size()) - 1;
    }

    Mat<T>& accum(int id) {
        Node& node = nodes_[check_id(id)];
        if (node.grad.empty()) node.grad = make_zero(node.value.rows, node.value.cols);
        return node.grad;
    }

    bool wants(int id) const { return id >= 0 && nodes_[id].needs_grad; }

    Mat<T> apply_gcn(const Mat<T>& hx) {
        const Graph& g = need_graph();
        if (gcn_scale_.empty()) {
            gcn_scale_.resize(g.num_nodes());
            for (std::uint32_t i = 0; i < g.num_nodes(); ++i)
                gcn_scale_[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
        }
        Mat<T> out = make_zero(hx.rows, hx.cols);
        for (std::uint32_t i = 0; i < g.num_nodes(); ++i) {
            const T si = static_cast<T>(gcn_scale_[i]);
            T* out_row = &out.data[i * out.cols];
            const T* self_row = &hx.data[static_cast<std::size_t>(i) * hx.cols];
            const T self_w = si * si;
            for (std::size_t cidx = 0; cidx < hx.cols; ++cidx)
                out_row[cidx] += self_w * self_row[cidx];
            for (std::uint32_t j : g.neighbors(i)) {
                const T w = si * static_cast<T>(gcn_scale_[j]);
                const T* in_row = &hx.data[static_cast<std::size_t>(j) * hx.cols];
                for (std::size_t cidx = 0; cidx < hx.cols; ++cidx)
                    out_row[cidx] += w * in_row[cidx];
            }
        }
        return out;
    }

    void backward_node(Node& node) {
        const Mat<T>& gy = node.grad;
        switch (node.op) {
            case Op::input:
            case Op::param:
                return;
            case Op::affine: {
                const Mat<T>& x = nodes_[node.a].value;
                const Mat<T>& w = nodes_[node.b].value;
                const std::size_t in = x.cols, width = w.cols;
                if (wants(node.a)) {
                    Mat<T>& gx = accum(node.a);
                    for (std::size_t i = 0; i < x.rows; ++i) {
                        const T* __restrict__ gy_row = &gy.data[i * width];
                        T* __restrict__ gx_row = &gx.data[i * in];
                        for (std::size_t k2 = 0; k2 < in; ++k2) {
                            const T* __restrict__ w_row = &w.data[k2 * width];
                            T acc = T(0);
                            for (std::size_t o = 0; o < width; ++o) acc += gy_row[o] * w_row[o];
                            gx_row[k2] += acc;
                        }
                    }
                }
                if (wants(node.b)) {
                    Mat<T>& gw = accum(node.b);
                    for (std::size_t i = 0; i < x.rows; ++i) {
                        const T* __restrict__ x_row = &x.data[i * in];
                        const T* __restrict__ gy_row = &gy.data[i * width];
                        for (std::size_t k2 = 0; k2 < in; ++k2) {
                            const T xv = x_row[k2];
                            if (xv == T(0)) continue;
                            T* __restrict__ gw_row = &gw.data[k2 * width];
                            for (std::size_t o = 0; o < width; ++o) gw_row[o] += xv * gy_row[o];
                        }
                    }
                }
                if (wants(node.c)) {
                    Mat<T>& gb = accum(node.c);
                    for (std::size_t i = 0; i < gy.rows; ++i)
                        for (std::size_t o = 0; o < width; ++o) gb.data[o] += gy(i, o);
                }
                return;
            }
            case Op::concat_cols: {
                const std::size_t ca = nodes_[node.a].value.cols;
                if (wants(node.a)) {
                    Mat<T>& ga = accum(node.a);
                    for (std::size_t i = 0; i < gy.rows; ++i)
                        for (std::size_t j = 0; j < ca; ++j) ga(i, j) += gy(i, j);
                }
                if (wants(node.b)) {
                    Mat<T>& gb = accum(node.b);
                    for (std::size_t i = 0; i < gy.rows; ++i)
                        for (std::size_t j = 0; j < gb.cols; ++j) gb(i, j) += gy(i, ca + j);
                }
                return;
            }
            case Op::add: {
                for (int src : {node.a, node.b}) {
                    if (!wants(src)) continue;
                    Mat<T>& gs = accum(src);
                    for (std::size_t i = 0; i < gy.size(); ++i) gs.data[i] += gy.data[i];
                }
                return;
            }
            case Op::relu: {
                if (!wants(node.a)) return;
                const Mat<T>& x = nodes_[node.a].value;
                Mat<T>& gx = accum(node.a);
                for (std::size_t i = 0; i < gy.size(); ++i)
                    if (x.data[i] > T(0)) gx.data[i] += gy.data[i];
                return;
            }
            case Op::sigmoid: {
                if (!wants(node.a)) return;
                Mat<T>& gx = accum(node.a);
                const Mat<T>& y = node.value;
                for (std::size_t i = 0; i < gy.size(); ++i)
                    gx.data[i] += gy.data[i] * y.data[i] * (T(1) - y.data[i]);
                return;
            }
            case Op::softmax_rows: {
                if (!wants(node.a)) return;
                Mat<T>& gx = accum(node.a);
                const Mat<T>& y = node.value;
                for (std::size_t i = 0; i < y.rows; ++i) {
                    T dot = T(0);
                    for (std::size_t j = 0; j < y.cols; ++j) dot += gy(i, j) * y(i, j);
                    for (std::size_t j = 0; j < y.cols; ++j)
                        gx(i, j) += y(i, j) * (gy(i, j) - dot);
                }
                return;
            }
            case Op::batchnorm: {
                const Mat<T>& normalized = node.aux;
                const Mat<T>& invstd = node.aux2;
                const Mat<T>& gamma = nodes_[node.b].value;
                const std::size_t n = gy.rows, c = gy.cols;
                if (wants(node.b)) {
                    Mat<T>& gg = accum(node.b);
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < c; ++j)
                            gg.data[j] += gy(i, j) * normalized(i, j);
                }
                if (wants(node.c)) {
                    Mat<T>& gb = accum(node.c);
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < c; ++j) gb.data[j] += gy(i, j);
                }
                if (wants(node.a)) {
                    Mat<T>& gx = accum(node.a);
                    const T inv_n = T(1) / static_cast<T>(n);
                    for (std::size_t j = 0; j < c; ++j) {
                        T sum_g = T(0), sum_gx = T(0);
                        for (std::size_t i = 0; i < n; ++i) {
                            const T dxhat = gy(i, j) * gamma.data[j];
                            sum_g += dxhat;
                            sum_gx += dxhat * normalized(i, j);
                        }
                        const T mean_g = sum_g * inv_n;
                        const T mean_gx = sum_gx * inv_n;
                        for (std::size_t i = 0; i < n; ++i) {
                            const T dxhat = gy(i, j) * gamma.data[j];
                            gx(i, j) += invstd.data[j] *
                                        (dxhat - mean_g - normalized(i, j) * mean_gx);
                        }
                    }
                }
                return;
            }
            case Op::dropout: {
                if (!wants(node.a)) return;
                Mat<T>& gx = accum(node.a);
                if (node.aux.empty()) { // rate 0, identity
                    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i];
                } else {
                    for (std::size_t i = 0; i < gy.size(); ++i)
                        gx.data[i] += gy.data[i] * node.aux.data[i];
                }
                return;
            }
            case Op::neighbor_mean: {
                if (!wants(node.a)) return;
                const Graph& g = need_graph();
                Mat<T>& gx = accum(node.a);
                for (std::uint32_t i = 0; i < g.num_nodes(); ++i) {
                    const auto nb = g.neighbors(i);
                    if (nb.empty()) continue;
                    const T inv = T(1) / static_cast<T>(nb.size());
                    const T* gy_row = &gy.data[static_cast<std::size_t>(i) * gy.cols];
                    for (std::uint32_t j : nb) {
                        T* gx_row = &gx.data[static_cast<std::size_t>(j) * gx.cols];
                        for (std::size_t cidx = 0; cidx < gy.cols; ++cidx)
                            gx_row[cidx] += gy_row[cidx] * inv;
                    }
                }
                return;
            }
            case Op::neighbor_max: {
                if (!wants(node.a)) return;
                Mat<T>& gx = accum(node.a);
                for (std::size_t e = 0; e < node.idx.size(); ++e) {
                    const std::int32_t j = node.idx[e];
                    if (j < 0) continue;
                    const std::size_t cidx = e % gy.cols;
                    gx.data[static_cast<std::size_t>(j) * gx.cols + cidx] += gy.data[e];
                }
                return;
            }
            case Op::gcn_norm: {
                if (!wants(node.a)) return;
                Mat<T> gin = apply_gcn(gy); // operator is symmetric
                Mat<T>& gx = accum(node.a);
                for (std::size_t i = 0; i < gin.size(); ++i) gx.data[i] += gin.data[i];
                return;
            }
            case Op::maxcut_loss: {
                if (!wants(node.a)) return;
                const Graph& g = need_graph();
                const Mat<T>& p = nodes_[node.a].value;
                Mat<T>& gp = accum(node.a);
                const T gl = gy.data[0];
                for (const auto& [u, v] : g.edges()) {
                    gp.data[u] += gl * (T(2) * p.data[v] - T(1));
                    gp.data[v] += gl * (T(2) * p.data[u] - T(1));
                }
                return;
            }
            case Op::coloring_loss: {
                if (!wants(node.a)) return;
                const Graph& g = need_graph();
                const Mat<T>& p = nodes_[node.a].value;
                Mat<T>& gp = accum(node.a);
                const T gl = gy.data[0];
                for (const auto& [u, v] : g.edges()) {
                    const std::size_t ru = static_cast<std::size_t>(u) * p.cols;
                    const std::size_t rv = static_cast<std::size_t>(v) * p.cols;
                    for (std::size_t c = 0; c < p.cols; ++c) {
                        gp.data[ru + c] += gl * p.data[rv + c];
                        gp.data[rv + c] += gl * p.data[ru + c];
                    }
                }
                return;
            }
            case Op::mis_loss: {
                if (!wants(node.a)) return;
                const Graph& g = need_graph();
                const Mat<T>& p = nodes_[node.a].value;
                Mat<T>& gp = accum(node.a);
                const T gl = gy.data[0];
                for (std::size_t i = 0; i < p.rows; ++i) gp.data[i] -= gl;
                for (const auto& [u, v] : g.edges()) {
                    gp.data[u] += gl * node.scalar * p.data[v];
                    gp.data[v] += gl * node.scalar * p.data[u];
                }
                return;
            }
            case Op::sum_all: {
                if (!wants(node.a)) return;
                Mat<T>& gx = accum(node.a);
                const T gl = gy.data[0];
                for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += gl;
                return;
            }
        }
    }

    using Buffer = std::vector<T, uninit_allocator<T>>;

    // Buffers are recycled across reset() calls, smallest sufficient first.
    Mat<T> make(std::size_t rows, std::size_t cols) {
        Mat<T> m;
        m.rows = rows;
        m.cols = cols;
        const std::size_t need = rows * cols;
        auto it = std::lower_bound(pool_.begin(), pool_.end(), need,
                                   [](const Buffer& b, std::size_t n) { return b.capacity() < n; });
        if (it != pool_.end()) {
            m.data = std::move(*it);
            pool_.erase(it);
            m.data.resize(need);
        } else {
            m.data.resize(need);
        }
        return m;
    }

    Mat<T> make_zero(std::size_t rows, std::size_t cols) {
        Mat<T> m = make(rows, cols);
        std::fill(m.data.begin(), m.data.end(), T(0));
        return m;
    }

    Mat<T> copy_in(const Mat<T>& src) {
        Mat<T> m = make(src.rows, src.cols);
        std::copy(src.data.begin(), src.data.end(), m.data.begin());
        return m;
    }

    std::vector<std::int32_t> make_idx(std::size_t n) {
        std::vector<std::int32_t> v;
        if (!idx_pool_.empty()) {
            v = std::move(idx_pool_.back());
            idx_pool_.pop_back();
        }
        v.assign(n, -1);
        return v;
    }

    void reclaim(Mat<T>& m) {
        if (m.data.capacity() == 0) return;
        auto it = std::lower_bound(pool_.begin(), pool_.end(), m.data.capacity(),
                                   [](const Buffer& b, std::size_t n) { return b.capacity() < n; });
        pool_.insert(it, std::move(m.data));
        m = Mat<T>();
    }

    void reclaim_idx(std::vector<std::int32_t>& v) {
        if (v.capacity() == 0) return;
        idx_pool_.push_back(std::move(v));
        v.clear();
    }

    const Graph* graph_;
    bool check_finite_;
    bool consumed_ = false;
    std::vector<Node> nodes_;
    std::vector<Buffer> pool_;
    std::vector<std::vector<std::int32_t>> idx_pool_;
    mutable std::vector<double> gcn_scale_;
};

// Central finite differences per scalar parameter. `forward_fn` must be a
// deterministic function of the parameter vectors (dropout seeded identically
// or disabled). Returns the worst relative error with denominator
// max(|analytic|, |numeric|, 1e-8).
inline double finite_diff_check(
    const std::function<double()>& forward_fn,
    std::vector<Mat<double>*> params,
    const std::vector<const Mat<double>*>& analytic_grads,
    double step = 1e-3) {
    if (params.size() != analytic_grads.size())
        throw std::invalid_argument("finite_diff_check: params/grads size mismatch");
    double worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Mat<double>& param = *params[pi];
        const Mat<double>* ga = analytic_grads[pi];
        for (std::size_t e = 0; e < param.size(); ++e) {
            const double saved = param.data[e];
            param.data[e] = saved + step;
            const double up = forward_fn();
            param.data[e] = saved - step;
            const double down = forward_fn();
            param.data[e] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = (ga && !ga->empty()) ? ga->data[e] : 0.0;
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(analytic - numeric) / denom);
        }
    }
    return worst;
}

} // namespace qgnn::ad
