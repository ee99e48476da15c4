#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qgnn {

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t line_number)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
          line(line_number) {}
    std::size_t line;
};

// Immutable undirected simple graph in compressed adjacency form.
// Node indices are 0-based and dense in [0, num_nodes). Neighbor lists are
// sorted. Edges are stored once, canonically as (u, v) with u < v.
class Graph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;

    Graph() = default;

    // Validates and builds the CSR structure. Rejects self-loops, duplicate
    // undirected edges and out-of-range endpoints. Edges may arrive in either
    // orientation; they are canonicalized. `weights`, when given, must be
    // parallel to `edges` (default weight is 1.0).
    static Graph from_edges(std::size_t n_nodes, std::vector<Edge> edges,
                            std::vector<double> weights = {});

    std::size_t num_nodes() const { return n_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }

    std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    std::size_t degree(std::uint32_t v) const { return offsets_[v + 1] - offsets_[v]; }
    std::size_t max_degree() const;

    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<double>& edge_weights() const { return weights_; }

    bool has_edge(std::uint32_t u, std::uint32_t v) const;
    std::size_t component_count() const;

private:
    std::size_t n_nodes_ = 0;
    std::vector<std::uint32_t> offsets_;   // size n_nodes + 1
    std::vector<std::uint32_t> adjacency_; // size 2 * num_edges
    std::vector<Edge> edges_;
    std::vector<double> weights_;
};

enum class EdgeListFormat { gset, plain };

// Gset format: header "n m", then m lines "u v [w]" with 1-based indices.
// Plain format: lines "u v" with 0-based indices, node count inferred.
Graph load_edge_list(std::string_view text, EdgeListFormat format);

// DIMACS .col: "c" comments, one "p edge n m" line, "e u v" lines (1-based).
// Edges listed in both directions are deduplicated; a post-dedup edge count
// that differs from the header is reported through `warning`, not an error.
Graph load_dimacs_col(std::string_view text, std::string* warning = nullptr);

// Loads a graph file, dispatching on extension: ".col"/".clq"/".mis" are
// DIMACS, everything else is sniffed (gset header vs plain pairs).
Graph load_graph_file(const std::string& path);

std::string to_gset(const Graph& g);
std::string to_plain(const Graph& g);

// Simple d-regular graph via the pairing (configuration) model with full
// restart on self-loop or multi-edge clashes, capped at 1000 restarts.
Graph gen_random_regular(std::size_t n, std::size_t d, std::uint64_t seed);

Graph gen_erdos_renyi_p(std::size_t n, double p, std::uint64_t seed);
Graph gen_erdos_renyi_m(std::size_t n, std::size_t m, std::uint64_t seed);

// Power iteration on the undirected random walk. Degree-0 nodes receive
// teleport mass only; dangling mass is spread uniformly so the vector keeps
// summing to 1.
std::vector<double> pagerank(const Graph& g, double damping = 0.85,
                             double tol = 1e-8, std::size_t max_iter = 200);

// k node-disjoint copies; copy c owns indices [c*n, (c+1)*n).
Graph disjoint_union(const Graph& g, std::size_t k);

} // namespace qgnn
