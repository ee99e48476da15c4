#include <doctest.h>

#include "qubognn/rng.hpp"

#include <set>

using namespace qgnn;

TEST_CASE("streams derived from one seed are independent and reproducible") {
    auto a1 = rng::make_stream(42, rng::Stream::features);
    auto a2 = rng::make_stream(42, rng::Stream::features);
    auto b = rng::make_stream(42, rng::Stream::init);

    CHECK(a1.next() == a2.next());
    CHECK(a1.next() == a2.next());

    auto c1 = rng::make_stream(42, rng::Stream::features);
    auto c2 = rng::make_stream(42, rng::Stream::init);
    CHECK(c1.next() != c2.next());
    (void)b;
}

TEST_CASE("uniform stays in [0, 1)") {
    auto rng = rng::make_stream(7, rng::Stream::features);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("below(n) covers [0, n) without escaping") {
    auto rng = rng::make_stream(3, rng::Stream::heuristic);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = rng.below(5);
        CHECK(v < 5);
        seen.insert(v);
    }
    CHECK(seen.size() == 5);
}
