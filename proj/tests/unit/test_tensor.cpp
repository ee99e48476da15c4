#include <doctest.h>

#include "qubognn/qubo.hpp"
#include "qubognn/tensor.hpp"

#include <cmath>
#include <functional>

using namespace qgnn;
using ad::Mat;
using ad::Tape;

namespace {

Mat<double> random_mat(std::size_t r, std::size_t c, rng::Xoshiro256ss& rng,
                       double lo = -1.0, double hi = 1.0) {
    Mat<double> m(r, c);
    for (auto& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

Graph house_graph() {
    // 5 nodes, mixed degrees, one isolated node added as node 5
    return Graph::from_edges(6, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4}});
}

// Runs `build` twice: once to get analytic gradients, then through central
// differences on every listed parameter matrix.
double fd_error(const Graph* graph, std::vector<Mat<double>>& params,
                const std::function<int(Tape<double>&, const std::vector<int>&)>& build,
                double step = 1e-5) {
    auto run = [&](bool want_grads, std::vector<Mat<double>>* grads) {
        Tape<double> tape(graph);
        std::vector<int> ids;
        ids.reserve(params.size());
        for (auto& p : params) ids.push_back(tape.param(p));
        const int loss = build(tape, ids);
        const double value = tape.value(loss)(0, 0);
        if (want_grads) {
            tape.backward(loss);
            grads->clear();
            for (int id : ids) grads->push_back(tape.grad_or_zeros(id));
        }
        return value;
    };

    std::vector<Mat<double>> analytic;
    run(true, &analytic);

    std::vector<Mat<double>*> param_ptrs;
    std::vector<const Mat<double>*> grad_ptrs;
    for (std::size_t i = 0; i < params.size(); ++i) {
        param_ptrs.push_back(&params[i]);
        grad_ptrs.push_back(&analytic[i]);
    }
    return ad::finite_diff_check([&] { return run(false, nullptr); }, param_ptrs, grad_ptrs,
                                 step);
}

} // namespace

TEST_CASE("forward values of simple ops") {
    const Graph p2 = Graph::from_edges(2, {{0, 1}});
    Tape<double> tape(&p2);

    SUBCASE("neighbor_mean swaps rows on a single edge") {
        Mat<double> h(2, 1);
        h(0, 0) = 1.0;
        h(1, 0) = 3.0;
        const int out = tape.neighbor_mean(tape.input(h));
        CHECK(tape.value(out)(0, 0) == doctest::Approx(3.0));
        CHECK(tape.value(out)(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("neighbor_mean of constants is constant; isolated rows are zero") {
        const Graph g = house_graph();
        Tape<double> t2(&g);
        const int out = t2.neighbor_mean(t2.input(Mat<double>(6, 3, 2.5)));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(t2.value(out)(i, j) == doctest::Approx(2.5));
        for (std::size_t j = 0; j < 3; ++j) CHECK(t2.value(out)(5, j) == 0.0);
    }
    SUBCASE("neighbor_pool with identity pre-transform") {
        Mat<double> h(2, 1);
        h(0, 0) = 1.0;
        h(1, 0) = 3.0;
        Mat<double> identity(1, 1, 1.0);
        Mat<double> zero(1, 1, 0.0);
        const int out =
            tape.neighbor_pool(tape.input(h), tape.param(identity), tape.param(zero));
        CHECK(tape.value(out)(0, 0) == doctest::Approx(3.0));
        CHECK(tape.value(out)(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("softmax of a zero row is uniform") {
        Tape<double> t2;
        const int out = t2.softmax_rows(t2.input(Mat<double>(1, 4, 0.0)));
        for (std::size_t j = 0; j < 4; ++j) CHECK(t2.value(out)(0, j) == doctest::Approx(0.25));
    }
    SUBCASE("sigmoid range") {
        Tape<double> t2;
        Mat<double> h(1, 3);
        h(0, 0) = -40.0;
        h(0, 1) = 0.0;
        h(0, 2) = 40.0;
        const int out = t2.sigmoid(t2.input(h));
        CHECK(t2.value(out)(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(t2.value(out)(0, 1) == doctest::Approx(0.5));
        CHECK(t2.value(out)(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("batchnorm normalizes each column") {
    auto rng = rng::make_stream(11, rng::Stream::init);
    Mat<double> h = random_mat(50, 4, rng, -3.0, 5.0);
    Tape<double> tape;
    const int x = tape.input(h);
    const int gamma = tape.param(Mat<double>(1, 4, 1.0));
    const int beta = tape.param(Mat<double>(1, 4, 0.0));
    const int out = tape.batchnorm(x, gamma, beta, 1e-5);

    for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < 50; ++i) mean += tape.value(out)(i, j);
        mean /= 50.0;
        for (std::size_t i = 0; i < 50; ++i) {
            const double d = tape.value(out)(i, j) - mean;
            var += d * d;
        }
        var /= 50.0;
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4)); // eps shifts it slightly
    }
}

TEST_CASE("dropout") {
    auto rng = rng::make_stream(5, rng::Stream::dropout);
    Mat<double> h(20, 10, 1.0);
    SUBCASE("rate zero is the identity") {
        Tape<double> tape;
        const int out = tape.dropout(tape.input(h), 0.0, rng);
        for (double v : tape.value(out).data) CHECK(v == 1.0);
    }
    SUBCASE("inverted scaling keeps the expectation") {
        const double rate = 0.4;
        double total = 0.0;
        const int samples = 500; // 500 * 200 entries = 1e5 draws
        for (int s = 0; s < samples; ++s) {
            Tape<double> tape;
            const int out = tape.dropout(tape.input(h), rate, rng);
            for (double v : tape.value(out).data) total += v;
        }
        const double mean = total / (samples * 200.0);
        CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("invalid rate") {
        Tape<double> tape;
        CHECK_THROWS_AS(tape.dropout(tape.input(h), 1.0, rng), std::invalid_argument);
    }
}

TEST_CASE("backward consumes a record exactly once") {
    Tape<double> tape;
    const int w = tape.param(Mat<double>(2, 2, 1.0));
    const int loss = tape.sum_all(w);
    tape.backward(loss);
    CHECK_THROWS_AS(tape.backward(loss), std::logic_error);
}

TEST_CASE("gradient of sum is all-ones") {
    Tape<double> tape;
    const int w = tape.param(Mat<double>(3, 4, 2.0));
    const int loss = tape.sum_all(w);
    tape.backward(loss);
    for (double v : tape.grad(w).data) CHECK(v == 1.0);
}

TEST_CASE("finite differences validate every primitive") {
    auto rng = rng::make_stream(2024, rng::Stream::init);
    const Graph g = house_graph();

    SUBCASE("affine") {
        std::vector<Mat<double>> params = {random_mat(5, 3, rng), random_mat(3, 4, rng),
                                           random_mat(1, 4, rng)};
        const double err = fd_error(nullptr, params, [](Tape<double>& t, const std::vector<int>& p) {
            return t.sum_all(t.affine(p[0], p[1], p[2]));
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("relu (inputs away from the kink)") {
        std::vector<Mat<double>> params = {random_mat(4, 4, rng, 0.2, 1.0)};
        params[0].data[3] = -0.7;
        params[0].data[9] = -0.4;
        const double err = fd_error(nullptr, params, [](Tape<double>& t, const std::vector<int>& p) {
            return t.sum_all(t.relu(p[0]));
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("sigmoid") {
        std::vector<Mat<double>> params = {random_mat(4, 3, rng, -2.0, 2.0)};
        const double err = fd_error(nullptr, params, [](Tape<double>& t, const std::vector<int>& p) {
            // square the output so the gradient is non-trivial per entry
            auto s = t.sigmoid(p[0]);
            return t.sum_all(t.add(s, s));
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("softmax_rows through coloring loss") {
        std::vector<Mat<double>> params = {random_mat(6, 3, rng, -1.5, 1.5)};
        const double err = fd_error(&g, params, [](Tape<double>& t, const std::vector<int>& p) {
            return t.coloring_loss(t.softmax_rows(p[0]));
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("batchnorm") {
        std::vector<Mat<double>> params = {random_mat(6, 3, rng, -2.0, 2.0),
                                           random_mat(1, 3, rng, 0.5, 1.5),
                                           random_mat(1, 3, rng, -0.5, 0.5)};
        const double err = fd_error(nullptr, params, [](Tape<double>& t, const std::vector<int>& p) {
            auto bn = t.batchnorm(p[0], p[1], p[2], 1e-5);
            return t.sum_all(t.sigmoid(bn));
        });
        CHECK(err < 1e-5);
    }
    SUBCASE("neighbor_mean") {
        std::vector<Mat<double>> params = {random_mat(6, 3, rng)};
        const double err = fd_error(&g, params, [](Tape<double>& t, const std::vector<int>& p) {
            auto m = t.neighbor_mean(p[0]);
            return t.sum_all(t.sigmoid(m));
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("neighbor_pool with pre-transform, as specified") {
        std::vector<Mat<double>> params = {random_mat(6, 3, rng), random_mat(3, 3, rng),
                                           random_mat(1, 3, rng, 0.3, 0.9)};
        const double err = fd_error(
            &g, params,
            [](Tape<double>& t, const std::vector<int>& p) {
                auto pool = t.neighbor_pool(p[0], p[1], p[2]);
                return t.sum_all(t.sigmoid(pool));
            },
            1e-3); // spec-level check: central differences at step 1e-3
        CHECK(err < 1e-4);
    }
    SUBCASE("gcn_norm") {
        std::vector<Mat<double>> params = {random_mat(6, 3, rng)};
        const double err = fd_error(&g, params, [](Tape<double>& t, const std::vector<int>& p) {
            auto agg = t.gcn_norm(p[0]);
            return t.sum_all(t.sigmoid(agg));
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("concat and add") {
        std::vector<Mat<double>> params = {random_mat(4, 2, rng), random_mat(4, 3, rng),
                                           random_mat(4, 5, rng)};
        const double err = fd_error(nullptr, params, [](Tape<double>& t, const std::vector<int>& p) {
            auto cc = t.concat_cols(p[0], p[1]);
            return t.sum_all(t.sigmoid(t.add(cc, p[2])));
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("maxcut loss") {
        std::vector<Mat<double>> params = {random_mat(6, 1, rng, -2.0, 2.0)};
        const double err = fd_error(&g, params, [](Tape<double>& t, const std::vector<int>& p) {
            return t.maxcut_loss(t.sigmoid(p[0]));
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("mis loss") {
        std::vector<Mat<double>> params = {random_mat(6, 1, rng, -2.0, 2.0)};
        const double err = fd_error(&g, params, [](Tape<double>& t, const std::vector<int>& p) {
            return t.mis_loss(t.sigmoid(p[0]), 1.37);
        });
        CHECK(err < 1e-6);
    }
    SUBCASE("dropout with a frozen mask") {
        std::vector<Mat<double>> params = {random_mat(6, 3, rng)};
        // same seed on every re-run so the mask is identical across fd probes
        const double err = fd_error(&g, params, [](Tape<double>& t, const std::vector<int>& p) {
            auto local = rng::make_stream(99, rng::Stream::dropout);
            auto d = t.dropout(p[0], 0.5, local);
            return t.sum_all(t.sigmoid(d));
        });
        CHECK(err < 1e-6);
    }
}

TEST_CASE("loss ops agree with the reference relaxation") {
    auto rng = rng::make_stream(31, rng::Stream::init);
    const Graph g = gen_erdos_renyi_m(15, 40, 3);

    Mat<double> logits = random_mat(15, 1, rng, -2.0, 2.0);
    Tape<double> tape(&g);
    const int prob = tape.sigmoid(tape.input(logits));
    const std::vector<double> p(tape.value(prob).data.begin(), tape.value(prob).data.end());

    CHECK(tape.value(tape.maxcut_loss(prob))(0, 0) ==
          doctest::Approx(relaxed_loss(ProblemKind::maxcut, g, p)).epsilon(1e-12));
    CHECK(tape.value(tape.mis_loss(prob, 0.8))(0, 0) ==
          doctest::Approx(relaxed_loss(ProblemKind::mis, g, p, 1, 0.8)).epsilon(1e-12));

    Mat<double> logits_k = random_mat(15, 4, rng, -2.0, 2.0);
    Tape<double> tape_k(&g);
    const int prob_k = tape_k.softmax_rows(tape_k.input(logits_k));
    const std::vector<double> pk(tape_k.value(prob_k).data.begin(),
                                 tape_k.value(prob_k).data.end());
    CHECK(tape_k.value(tape_k.coloring_loss(prob_k))(0, 0) ==
          doctest::Approx(relaxed_loss(ProblemKind::coloring, g, pk, 4)).epsilon(1e-12));
}

TEST_CASE("aggregation is invariant to node relabeling") {
    // relabeled graph + relabeled rows must give relabeled outputs
    auto rng = rng::make_stream(17, rng::Stream::init);
    const Graph g = gen_erdos_renyi_m(8, 14, 21);
    std::vector<std::uint32_t> perm = {3, 1, 7, 0, 5, 2, 6, 4};
    std::vector<Graph::Edge> relabeled_edges;
    for (auto [u, v] : g.edges()) {
        std::uint32_t a = perm[u], b = perm[v];
        if (a > b) std::swap(a, b);
        relabeled_edges.emplace_back(a, b);
    }
    const Graph h = Graph::from_edges(8, relabeled_edges);

    const Mat<double> features = random_mat(8, 3, rng);
    Mat<double> permuted(8, 3);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 3; ++j) permuted(perm[i], j) = features(i, j);

    for (const bool use_max : {false, true}) {
        Tape<double> tg(&g);
        Tape<double> th(&h);
        const int og = use_max ? tg.neighbor_max(tg.input(features))
                               : tg.neighbor_mean(tg.input(features));
        const int oh = use_max ? th.neighbor_max(th.input(permuted))
                               : th.neighbor_mean(th.input(permuted));
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(tg.value(og)(i, j) ==
                      doctest::Approx(th.value(oh)(perm[i], j)).epsilon(1e-12));
    }
}

TEST_CASE("gradient is linear across a sum of branches") {
    auto rng = rng::make_stream(23, rng::Stream::init);
    Mat<double> w = random_mat(3, 3, rng);

    auto grad_of = [&](bool first, bool second) {
        Tape<double> tape;
        const int p = tape.param(w);
        int loss;
        if (first && second) {
            loss = tape.sum_all(tape.add(p, p));
        } else {
            loss = tape.sum_all(p);
        }
        tape.backward(loss);
        return tape.grad_or_zeros(p);
    };

    const Mat<double> g1 = grad_of(true, false);
    const Mat<double> g12 = grad_of(true, true);
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(g12.data[i] == doctest::Approx(2.0 * g1.data[i]).epsilon(1e-15));
}

TEST_CASE("quadratic sanity check of the fd harness") {
    // f(w) = sum(w^2) via add+affine composition: f'(w) = 2w
    Mat<double> w(1, 1, 3.0);
    std::vector<Mat<double>> params = {w};
    const double err = fd_error(nullptr, params, [](Tape<double>& t, const std::vector<int>& p) {
        // w * w through affine: x(1x1) * w(1x1) + 0
        Mat<double> zero(1, 1, 0.0);
        const int b = t.input(zero);
        return t.sum_all(t.affine(p[0], p[0], b));
    });
    CHECK(err < 1e-6);
}
