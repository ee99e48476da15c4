#include "qubognn/graph.hpp"
#include "qubognn/rng.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace qgnn {

namespace {

std::uint64_t edge_key(std::uint32_t u, std::uint32_t v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

struct LineScanner {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line_number = 0;

    bool next(std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++line_number;
        return true;
    }
};

bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t") == std::string_view::npos;
}

// Splits on whitespace into at most `max_tokens` tokens.
std::vector<std::string_view> split_tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_real(std::string_view token, double& out) {
    // from_chars for double is missing in some libstdc++ versions; strtod is fine here
    std::string tmp(token);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size();
}

} // namespace

Graph Graph::from_edges(std::size_t n_nodes, std::vector<Edge> edges,
                        std::vector<double> weights) {
    if (!weights.empty() && weights.size() != edges.size())
        throw std::invalid_argument("weights must be parallel to edges");

    Graph g;
    g.n_nodes_ = n_nodes;
    g.weights_ = weights.empty() ? std::vector<double>(edges.size(), 1.0)
                                 : std::move(weights);

    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges.size() * 2);
    for (auto& [u, v] : edges) {
        if (u >= n_nodes || v >= n_nodes)
            throw std::out_of_range("edge endpoint " + std::to_string(std::max(u, v)) +
                                    " out of range for " + std::to_string(n_nodes) + " nodes");
        if (u == v)
            throw std::invalid_argument("self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
        if (!seen.insert(edge_key(u, v)).second)
            throw std::invalid_argument("duplicate edge (" + std::to_string(u) + ", " +
                                        std::to_string(v) + ")");
    }
    g.edges_ = std::move(edges);

    g.offsets_.assign(n_nodes + 1, 0);
    for (const auto& [u, v] : g.edges_) {
        ++g.offsets_[u + 1];
        ++g.offsets_[v + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.adjacency_.resize(2 * g.edges_.size());
    std::vector<std::uint32_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [u, v] : g.edges_) {
        g.adjacency_[cursor[u]++] = v;
        g.adjacency_[cursor[v]++] = u;
    }
    for (std::size_t v = 0; v < n_nodes; ++v) {
        std::sort(g.adjacency_.begin() + g.offsets_[v],
                  g.adjacency_.begin() + g.offsets_[v + 1]);
    }
    return g;
}

std::size_t Graph::max_degree() const {
    std::size_t best = 0;
    for (std::size_t v = 0; v < n_nodes_; ++v) best = std::max(best, degree(v));
    return best;
}

bool Graph::has_edge(std::uint32_t u, std::uint32_t v) const {
    if (u >= n_nodes_ || v >= n_nodes_ || u == v) return false;
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::size_t Graph::component_count() const {
    std::vector<std::uint32_t> stack;
    std::vector<bool> visited(n_nodes_, false);
    std::size_t count = 0;
    for (std::uint32_t s = 0; s < n_nodes_; ++s) {
        if (visited[s]) continue;
        ++count;
        visited[s] = true;
        stack.push_back(s);
        while (!stack.empty()) {
            std::uint32_t v = stack.back();
            stack.pop_back();
            for (std::uint32_t w : neighbors(v)) {
                if (!visited[w]) {
                    visited[w] = true;
                    stack.push_back(w);
                }
            }
        }
    }
    return count;
}

Graph load_edge_list(std::string_view text, EdgeListFormat format) {
    LineScanner scanner{text};
    std::string_view line;
    std::vector<Graph::Edge> edges;
    std::vector<double> weights;

    if (format == EdgeListFormat::gset) {
        std::size_t n = 0, m = 0;
        bool have_header = false;
        while (scanner.next(line)) {
            if (is_blank(line)) continue;
            auto tokens = split_tokens(line);
            if (!have_header) {
                if (tokens.size() < 2 || !parse_number(tokens[0], n) || !parse_number(tokens[1], m))
                    throw ParseError("expected header \"n m\"", scanner.line_number);
                have_header = true;
                edges.reserve(m);
                weights.reserve(m);
                continue;
            }
            std::uint32_t u = 0, v = 0;
            double w = 1.0;
            if (tokens.size() < 2 || !parse_number(tokens[0], u) || !parse_number(tokens[1], v))
                throw ParseError("expected edge \"u v [w]\"", scanner.line_number);
            if (tokens.size() >= 3 && !parse_real(tokens[2], w))
                throw ParseError("bad edge weight", scanner.line_number);
            if (u < 1 || v < 1 || u > n || v > n)
                throw ParseError("node index out of range [1, " + std::to_string(n) + "]",
                                 scanner.line_number);
            if (u == v) throw ParseError("self-loop", scanner.line_number);
            edges.emplace_back(u - 1, v - 1);
            weights.push_back(w);
        }
        if (!have_header) throw ParseError("empty input", 1);
        if (edges.size() != m)
            throw ParseError("header declares " + std::to_string(m) + " edges, found " +
                                 std::to_string(edges.size()),
                             scanner.line_number);
        return Graph::from_edges(n, std::move(edges), std::move(weights));
    }

    // plain: 0-based "u v" pairs, node count inferred from the max index
    std::uint32_t max_index = 0;
    bool any = false;
    while (scanner.next(line)) {
        if (is_blank(line) || line[0] == '#') continue;
        auto tokens = split_tokens(line);
        std::uint32_t u = 0, v = 0;
        if (tokens.size() < 2 || !parse_number(tokens[0], u) || !parse_number(tokens[1], v))
            throw ParseError("expected edge \"u v\"", scanner.line_number);
        if (u == v) throw ParseError("self-loop", scanner.line_number);
        edges.emplace_back(u, v);
        max_index = std::max({max_index, u, v});
        any = true;
    }
    return Graph::from_edges(any ? max_index + 1 : 0, std::move(edges));
}

Graph load_dimacs_col(std::string_view text, std::string* warning) {
    LineScanner scanner{text};
    std::string_view line;
    std::size_t n = 0, m = 0;
    bool have_problem = false;
    std::vector<Graph::Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    std::size_t duplicates = 0;

    while (scanner.next(line)) {
        if (is_blank(line)) continue;
        auto tokens = split_tokens(line);
        if (tokens[0] == "c") continue;
        if (tokens[0] == "p") {
            if (tokens.size() < 4 || !parse_number(tokens[2], n) || !parse_number(tokens[3], m))
                throw ParseError("expected \"p edge n m\"", scanner.line_number);
            have_problem = true;
            edges.reserve(m);
            continue;
        }
        if (tokens[0] == "e") {
            if (!have_problem)
                throw ParseError("edge before \"p\" line", scanner.line_number);
            std::uint32_t u = 0, v = 0;
            if (tokens.size() < 3 || !parse_number(tokens[1], u) || !parse_number(tokens[2], v))
                throw ParseError("expected \"e u v\"", scanner.line_number);
            if (u < 1 || v < 1 || u > n || v > n)
                throw ParseError("node index out of range", scanner.line_number);
            if (u == v) throw ParseError("self-loop", scanner.line_number);
            std::uint32_t a = std::min(u, v) - 1, b = std::max(u, v) - 1;
            if (!seen.insert(edge_key(a, b)).second) {
                ++duplicates; // COLOR files sometimes list both directions
                continue;
            }
            edges.emplace_back(a, b);
            continue;
        }
        // unknown directives are ignored, as common DIMACS readers do
    }
    if (!have_problem) throw ParseError("missing \"p edge\" line", scanner.line_number + 1);
    if (warning) {
        warning->clear();
        if (edges.size() != m) {
            std::ostringstream os;
            os << "header declares " << m << " edges, " << edges.size()
               << " distinct after dedup (" << duplicates << " duplicates)";
            *warning = os.str();
        }
    }
    return Graph::from_edges(n, std::move(edges));
}

Graph load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() &&
               path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".col") || ends_with(".clq") || ends_with(".mis"))
        return load_dimacs_col(text);
    // sniff: DIMACS bodies start with c/p lines
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
        if (ch == 'c' || ch == 'p') return load_dimacs_col(text);
        break;
    }
    return load_edge_list(text, EdgeListFormat::gset);
}

std::string to_gset(const Graph& g) {
    std::ostringstream os;
    os << g.num_nodes() << ' ' << g.num_edges() << '\n';
    const auto& weights = g.edge_weights();
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto& [u, v] = g.edges()[e];
        os << (u + 1) << ' ' << (v + 1) << ' ' << weights[e] << '\n';
    }
    return os.str();
}

std::string to_plain(const Graph& g) {
    std::ostringstream os;
    for (const auto& [u, v] : g.edges()) os << u << ' ' << v << '\n';
    return os.str();
}

Graph gen_random_regular(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (d >= n) throw std::invalid_argument("random regular graph requires d < n");
    if ((n * d) % 2 != 0) throw std::invalid_argument("random regular graph requires n*d even");
    if (d == 0) return Graph::from_edges(n, {});

    auto rng = rng::make_stream(seed, rng::Stream::graph_gen);
    constexpr std::size_t max_restarts = 1000;

    // Pairing model, d half-edge stubs per node. Clashing pairs (self-loop or
    // repeated edge) are thrown back and re-paired on the next pass instead of
    // restarting outright: a full restart on any clash has acceptance
    // exp(-(d-1)/2 - (d-1)^2/4), hopeless already at moderate d. A whole
    // restart happens only when a pass stalls.
    std::vector<std::uint32_t> stubs;
    stubs.reserve(n * d);

    for (std::size_t attempt = 0; attempt < max_restarts; ++attempt) {
        stubs.clear();
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < d; ++i) stubs.push_back(static_cast<std::uint32_t>(v));

        std::vector<Graph::Edge> edges;
        edges.reserve(stubs.size() / 2);
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(stubs.size());
        std::vector<std::uint32_t> leftover;
        bool stalled = false;

        while (!stubs.empty()) {
            for (std::size_t i = stubs.size() - 1; i > 0; --i)
                std::swap(stubs[i], stubs[rng.below(i + 1)]);
            leftover.clear();
            std::size_t added = 0;
            for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
                std::uint32_t u = stubs[i], v = stubs[i + 1];
                if (u > v) std::swap(u, v);
                if (u == v || seen.count(edge_key(u, v))) {
                    leftover.push_back(stubs[i]);
                    leftover.push_back(stubs[i + 1]);
                    continue;
                }
                seen.insert(edge_key(u, v));
                edges.emplace_back(u, v);
                ++added;
            }
            if (added == 0) {
                stalled = true;
                break;
            }
            stubs.swap(leftover);
        }
        if (!stalled) return Graph::from_edges(n, std::move(edges));
    }
    throw std::runtime_error("random regular generation failed after " +
                             std::to_string(max_restarts) + " restarts (n=" +
                             std::to_string(n) + ", d=" + std::to_string(d) + ")");
}

Graph gen_erdos_renyi_p(std::size_t n, double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("edge probability must be in [0, 1]");
    auto rng = rng::make_stream(seed, rng::Stream::graph_gen);
    std::vector<Graph::Edge> edges;
    for (std::uint32_t u = 0; u + 1 < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v)
            if (rng.uniform() < p) edges.emplace_back(u, v);
    return Graph::from_edges(n, std::move(edges));
}

Graph gen_erdos_renyi_m(std::size_t n, std::size_t m, std::uint64_t seed) {
    const std::size_t max_m = n * (n - 1) / 2;
    if (m > max_m) throw std::invalid_argument("edge count exceeds n(n-1)/2");
    auto rng = rng::make_stream(seed, rng::Stream::graph_gen);
    // partial Fisher-Yates over all possible pairs
    std::vector<std::uint64_t> pairs;
    pairs.reserve(max_m);
    for (std::uint32_t u = 0; u + 1 < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v) pairs.push_back(edge_key(u, v));
    std::vector<Graph::Edge> edges;
    edges.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + rng.below(pairs.size() - i);
        std::swap(pairs[i], pairs[j]);
        edges.emplace_back(static_cast<std::uint32_t>(pairs[i] >> 32),
                           static_cast<std::uint32_t>(pairs[i] & 0xffffffffu));
    }
    return Graph::from_edges(n, std::move(edges));
}

std::vector<double> pagerank(const Graph& g, double damping, double tol,
                             std::size_t max_iter) {
    if (g.num_nodes() == 0) throw std::invalid_argument("pagerank on empty graph");
    if (damping <= 0.0 || damping >= 1.0)
        throw std::invalid_argument("damping must be in (0, 1)");

    const std::size_t n = g.num_nodes();
    std::vector<double> pr(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (g.degree(v) == 0) dangling += pr[v];

        const double base = (1.0 - damping) / static_cast<double>(n) +
                            damping * dangling / static_cast<double>(n);
        std::fill(next.begin(), next.end(), base);
        for (std::uint32_t v = 0; v < n; ++v) {
            if (g.degree(v) == 0) continue;
            const double share = damping * pr[v] / static_cast<double>(g.degree(v));
            for (std::uint32_t w : g.neighbors(v)) next[w] += share;
        }

        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - pr[v]);
        pr.swap(next);
        if (change < tol) break;
    }
    return pr;
}

Graph disjoint_union(const Graph& g, std::size_t k) {
    if (k == 0) throw std::invalid_argument("disjoint_union requires k >= 1");
    const std::size_t n = g.num_nodes();
    std::vector<Graph::Edge> edges;
    std::vector<double> weights;
    edges.reserve(g.num_edges() * k);
    weights.reserve(g.num_edges() * k);
    for (std::size_t c = 0; c < k; ++c) {
        const auto shift = static_cast<std::uint32_t>(c * n);
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
            const auto& [u, v] = g.edges()[e];
            edges.emplace_back(u + shift, v + shift);
            weights.push_back(g.edge_weights()[e]);
        }
    }
    return Graph::from_edges(n * k, std::move(edges), std::move(weights));
}

} // namespace qgnn
