#pragma once

#include "qubognn/graph.hpp"
#include "qubognn/qubo.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace qgnn::heuristics {

struct EoConfig {
    double tau = 1.3;
    std::uint64_t update_budget = 10'000'000;
    std::size_t restarts = 20;
    std::uint64_t seed = 1;

    void validate() const;
};

struct EoResult {
    Assignment assignment;
    std::size_t best_cut = 0;
    // (update index, best cut) recorded at every improvement; nondecreasing
    std::vector<std::pair<std::uint64_t, std::size_t>> best_trace;
};

// Extremal optimization for max-cut. Node fitness is the fraction of incident
// edges cut (isolated nodes count as fully fit); each update flips the node
// at fitness rank r drawn with probability proportional to r^(-tau), rank 1
// being the least fit. Best cut ever seen wins, across all restarts.
EoResult tau_eo_maxcut(const Graph& g, const EoConfig& config);

// Repeatedly takes the minimum-degree node of the residual graph (ties to the
// smallest index), adds it to the set and deletes its closed neighborhood.
Assignment greedy_mis(const Graph& g);

// Exact small-instance solvers used as test oracles. Sizes above the cap are
// refused.
std::size_t brute_force_maxcut(const Graph& g);                      // n <= 24
std::size_t brute_force_mis(const Graph& g);                         // n <= 64
std::size_t brute_force_chromatic(const Graph& g, std::size_t k_max); // n <= 20

} // namespace qgnn::heuristics
