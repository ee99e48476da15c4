#include "qubognn/heuristics.hpp"
#include "qubognn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qgnn::heuristics {

void EoConfig::validate() const {
    if (tau <= 1.0) throw std::invalid_argument("tau must be > 1");
    if (update_budget < 1) throw std::invalid_argument("update budget must be >= 1");
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
}

namespace {

// Inverse-CDF sampler over rank weights r^(-tau), r = 1..n.
struct RankSampler {
    std::vector<double> cdf;

    RankSampler(std::size_t n, double tau) : cdf(n) {
        double total = 0.0;
        for (std::size_t r = 1; r <= n; ++r) {
            total += std::pow(static_cast<double>(r), -tau);
            cdf[r - 1] = total;
        }
        for (double& v : cdf) v /= total;
    }

    std::size_t draw(rng::Xoshiro256ss& rng) const {
        const double u = rng.uniform();
        return static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    }
};

} // namespace

EoResult tau_eo_maxcut(const Graph& g, const EoConfig& config) {
    config.validate();
    const std::size_t n = g.num_nodes();
    if (n == 0) throw std::invalid_argument("tau_eo_maxcut on empty graph");

    auto rng = rng::make_stream(config.seed, rng::Stream::heuristic);
    const RankSampler sampler(n, config.tau);

    EoResult result;
    result.assignment.kind = ProblemKind::maxcut;
    result.assignment.x.assign(n, 0);
    std::uint64_t updates_done = 0;
    bool has_best = false;

    std::vector<std::uint8_t> x(n);
    std::vector<std::uint32_t> cut_deg(n);
    std::vector<std::uint32_t> order(n);

    auto offer = [&](std::size_t cut) {
        if (has_best && cut <= result.best_cut) return;
        has_best = true;
        result.best_cut = cut;
        result.assignment.x = x;
        result.best_trace.emplace_back(updates_done, cut);
    };

    for (std::size_t restart = 0; restart < config.restarts; ++restart) {
        for (auto& xi : x) xi = static_cast<std::uint8_t>(rng.next() & 1);
        std::size_t cut = 0;
        std::fill(cut_deg.begin(), cut_deg.end(), 0);
        for (const auto& [u, v] : g.edges()) {
            if (x[u] != x[v]) {
                ++cut;
                ++cut_deg[u];
                ++cut_deg[v];
            }
        }

        auto fitness = [&](std::uint32_t v) {
            const std::size_t deg = g.degree(v);
            return deg == 0 ? 1.0
                            : static_cast<double>(cut_deg[v]) / static_cast<double>(deg);
        };
        auto less_fit = [&](std::uint32_t a, std::uint32_t b) {
            const double fa = fitness(a), fb = fitness(b);
            return fa < fb || (fa == fb && a < b);
        };

        offer(cut);

        for (std::uint64_t step = 0; step < config.update_budget; ++step) {
            const std::size_t rank = sampler.draw(rng);
            std::iota(order.begin(), order.end(), 0u);
            std::nth_element(order.begin(), order.begin() + rank, order.end(), less_fit);
            const std::uint32_t v = order[rank];

            // flip v and patch the incremental cut state
            cut += g.degree(v);
            cut -= 2 * static_cast<std::size_t>(cut_deg[v]);
            for (std::uint32_t w : g.neighbors(v)) {
                if (x[w] == x[v]) {
                    ++cut_deg[w]; // edge becomes cut by the flip
                } else {
                    --cut_deg[w];
                }
            }
            cut_deg[v] = static_cast<std::uint32_t>(g.degree(v)) - cut_deg[v];
            x[v] ^= 1;
            ++updates_done;

            offer(cut);
        }
    }
    return result;
}

Assignment greedy_mis(const Graph& g) {
    const std::size_t n = g.num_nodes();
    Assignment a;
    a.kind = ProblemKind::mis;
    a.x.assign(n, 0);

    std::vector<bool> alive(n, true);
    std::vector<std::size_t> deg(n);
    for (std::size_t v = 0; v < n; ++v) deg[v] = g.degree(v);
    std::size_t remaining = n;

    while (remaining > 0) {
        std::size_t pick = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (!alive[v]) continue;
            if (pick == n || deg[v] < deg[pick]) pick = v; // ties keep the smaller index
        }
        a.x[pick] = 1;
        alive[pick] = false;
        --remaining;
        for (std::uint32_t w : g.neighbors(static_cast<std::uint32_t>(pick))) {
            if (!alive[w]) continue;
            alive[w] = false;
            --remaining;
            for (std::uint32_t w2 : g.neighbors(w))
                if (alive[w2]) --deg[w2];
        }
    }
    return a;
}

std::size_t brute_force_maxcut(const Graph& g) {
    const std::size_t n = g.num_nodes();
    if (n > 24) throw std::invalid_argument("brute_force_maxcut is capped at n <= 24");
    if (n == 0) return 0;
    // complement symmetry: fix the last node in part 0
    const std::uint32_t limit_bits = static_cast<std::uint32_t>(n - 1);
    const std::uint64_t limit = 1ull << limit_bits;
    std::size_t best = 0;
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
        std::size_t cut = 0;
        for (const auto& [u, v] : g.edges())
            cut += ((mask >> u) ^ (mask >> v)) & 1ull;
        best = std::max(best, cut);
    }
    return best;
}

namespace {

struct MisSolver {
    const std::vector<std::uint64_t>& adj;
    std::size_t best = 0;

    static int lowest_bit(std::uint64_t m) { return __builtin_ctzll(m); }

    void solve(std::uint64_t candidates, std::size_t size) {
        if (size + static_cast<std::size_t>(__builtin_popcountll(candidates)) <= best) return;
        if (candidates == 0) {
            best = std::max(best, size);
            return;
        }
        // greedy reductions: isolated and degree-1 vertices always join the set
        std::uint64_t rest = candidates;
        while (rest != 0) {
            const int v = lowest_bit(rest);
            rest &= rest - 1;
            const std::uint64_t nb = adj[v] & candidates;
            const int degree = __builtin_popcountll(nb);
            if (degree == 0) {
                candidates &= ~(1ull << v);
                ++size;
            } else if (degree == 1) {
                // v and its single alive neighbor: taking v is never worse
                candidates &= ~((1ull << v) | nb);
                ++size;
                rest &= candidates;
            }
        }
        if (candidates == 0) {
            best = std::max(best, size);
            return;
        }
        if (size + static_cast<std::size_t>(__builtin_popcountll(candidates)) <= best) return;

        // branch on a maximum-degree vertex
        int pivot = -1, pivot_deg = -1;
        std::uint64_t scan = candidates;
        while (scan != 0) {
            const int v = lowest_bit(scan);
            scan &= scan - 1;
            const int degree = __builtin_popcountll(adj[v] & candidates);
            if (degree > pivot_deg) {
                pivot_deg = degree;
                pivot = v;
            }
        }
        solve(candidates & ~((1ull << pivot) | adj[pivot]), size + 1); // include
        solve(candidates & ~(1ull << pivot), size);                    // exclude
    }
};

} // namespace

std::size_t brute_force_mis(const Graph& g) {
    const std::size_t n = g.num_nodes();
    if (n > 64) throw std::invalid_argument("brute_force_mis is capped at n <= 64");
    if (n == 0) return 0;
    std::vector<std::uint64_t> adj(n, 0);
    for (const auto& [u, v] : g.edges()) {
        adj[u] |= 1ull << v;
        adj[v] |= 1ull << u;
    }
    MisSolver solver{adj};
    const std::uint64_t all = n == 64 ? ~0ull : (1ull << n) - 1;
    solver.solve(all, 0);
    return solver.best;
}

namespace {

bool k_colorable(const Graph& g, std::size_t k, std::vector<std::uint32_t>& colors,
                 std::size_t v, std::uint32_t used) {
    if (v == g.num_nodes()) return true;
    // only allow one fresh color beyond those already used (symmetry break)
    const std::uint32_t tryable = std::min<std::uint32_t>(used + 1, static_cast<std::uint32_t>(k));
    for (std::uint32_t c = 0; c < tryable; ++c) {
        bool ok = true;
        for (std::uint32_t w : g.neighbors(static_cast<std::uint32_t>(v))) {
            if (w < v && colors[w] == c) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        colors[v] = c;
        if (k_colorable(g, k, colors, v + 1, std::max(used, c + 1))) return true;
    }
    return false;
}

} // namespace

std::size_t brute_force_chromatic(const Graph& g, std::size_t k_max) {
    const std::size_t n = g.num_nodes();
    if (n > 20) throw std::invalid_argument("brute_force_chromatic is capped at n <= 20");
    if (n == 0) return 0;
    if (g.num_edges() == 0) return 1;
    std::vector<std::uint32_t> colors(n, 0);
    for (std::size_t k = 2; k <= k_max; ++k)
        if (k_colorable(g, k, colors, 0, 0)) return k;
    throw std::runtime_error("chromatic number exceeds k_max = " + std::to_string(k_max));
}

} // namespace qgnn::heuristics
