#include "qubognn/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgnn {

std::string_view to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::maxcut: return "maxcut";
        case ProblemKind::coloring: return "coloring";
        case ProblemKind::mis: return "mis";
    }
    return "?";
}

ProblemKind problem_kind_from_string(std::string_view name) {
    if (name == "maxcut") return ProblemKind::maxcut;
    if (name == "coloring" || name == "color") return ProblemKind::coloring;
    if (name == "mis") return ProblemKind::mis;
    throw std::invalid_argument("unknown problem kind: " + std::string(name));
}

QuboInstance build_maxcut(const Graph& g) {
    QuboInstance q;
    q.kind = ProblemKind::maxcut;
    q.n_vars = g.num_nodes();
    q.linear_terms.assign(q.n_vars, 0.0);
    q.quad_terms.reserve(g.num_edges());
    for (const auto& [u, v] : g.edges()) {
        q.quad_terms.push_back({u, v, 2.0});
        q.linear_terms[u] -= 1.0;
        q.linear_terms[v] -= 1.0;
    }
    return q;
}

QuboInstance build_coloring(const Graph& g, std::size_t k) {
    if (k < 1) throw std::invalid_argument("coloring requires k >= 1");
    const std::size_t n = g.num_nodes();
    QuboInstance q;
    q.kind = ProblemKind::coloring;
    q.coloring_k = k;
    q.n_vars = n * k;
    q.linear_terms.assign(q.n_vars, 0.0);

    // one-hot penalty per node: (1 - sum_c x_ic)^2
    //   = 1 - sum_c x_ic + 2 * sum_{c<c'} x_ic x_ic'   (binary x)
    q.constant = static_cast<double>(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto base = static_cast<std::uint32_t>(i * k);
        for (std::uint32_t c = 0; c < k; ++c) {
            q.linear_terms[base + c] -= 1.0;
            for (std::uint32_t c2 = c + 1; c2 < k; ++c2)
                q.quad_terms.push_back({base + c, base + c2, 2.0});
        }
    }
    // adjacency conflict term: same color on both endpoints of an edge
    for (const auto& [u, v] : g.edges())
        for (std::uint32_t c = 0; c < k; ++c)
            q.quad_terms.push_back({u * static_cast<std::uint32_t>(k) + c,
                                    v * static_cast<std::uint32_t>(k) + c, 1.0});
    return q;
}

QuboInstance build_mis(const Graph& g, double penalty) {
    if (penalty <= 0.0) throw std::invalid_argument("MIS penalty must be > 0");
    QuboInstance q;
    q.kind = ProblemKind::mis;
    q.n_vars = g.num_nodes();
    q.linear_terms.assign(q.n_vars, -1.0);
    q.quad_terms.reserve(g.num_edges());
    for (const auto& [u, v] : g.edges()) q.quad_terms.push_back({u, v, penalty});
    return q;
}

double objective(const QuboInstance& instance, std::span<const std::uint8_t> x) {
    if (x.size() != instance.n_vars)
        throw std::invalid_argument("assignment length does not match n_vars");
    double value = instance.constant;
    for (const auto& term : instance.quad_terms)
        if (x[term.i] && x[term.j]) value += term.coeff;
    for (std::size_t i = 0; i < instance.n_vars; ++i)
        if (x[i]) value += instance.linear_terms[i];
    return value;
}

double relaxed_loss(ProblemKind kind, const Graph& g, std::span<const double> p,
                    std::size_t k, double penalty) {
    const std::size_t n = g.num_nodes();
    if (kind != ProblemKind::coloring) k = 1;
    if (p.size() != n * k)
        throw std::invalid_argument("probability vector has wrong length");
    for (double value : p)
        if (!(value >= 0.0 && value <= 1.0))
            throw std::domain_error("probability outside [0, 1]");

    switch (kind) {
        case ProblemKind::maxcut: {
            double loss = 0.0;
            for (const auto& [u, v] : g.edges())
                loss += 2.0 * p[u] * p[v] - p[u] - p[v];
            return loss;
        }
        case ProblemKind::coloring: {
            if (k < 1) throw std::invalid_argument("coloring requires k >= 1");
            for (std::size_t i = 0; i < n; ++i) {
                double row = 0.0;
                for (std::size_t c = 0; c < k; ++c) row += p[i * k + c];
                if (std::abs(row - 1.0) > 1e-6)
                    throw std::domain_error("coloring probability row does not sum to 1");
            }
            double loss = 0.0;
            for (const auto& [u, v] : g.edges())
                for (std::size_t c = 0; c < k; ++c)
                    loss += p[u * k + c] * p[v * k + c];
            return loss;
        }
        case ProblemKind::mis: {
            if (penalty <= 0.0) throw std::invalid_argument("MIS penalty must be > 0");
            double loss = 0.0;
            for (std::size_t i = 0; i < n; ++i) loss -= p[i];
            for (const auto& [u, v] : g.edges()) loss += penalty * p[u] * p[v];
            return loss;
        }
    }
    throw std::logic_error("unreachable");
}

Assignment discretize(ProblemKind kind, std::span<const double> p, std::size_t k,
                      double threshold) {
    Assignment a;
    a.kind = kind;
    if (kind == ProblemKind::coloring) {
        if (k < 1) throw std::invalid_argument("coloring requires k >= 1");
        const std::size_t n = p.size() / k;
        a.num_colors = k;
        a.colors.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_value = p[i * k];
            for (std::size_t c = 1; c < k; ++c) {
                if (p[i * k + c] > best_value) { // strict: ties keep the smallest index
                    best_value = p[i * k + c];
                    best = c;
                }
            }
            a.colors[i] = static_cast<std::uint32_t>(best);
        }
    } else {
        a.x.resize(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            a.x[i] = p[i] > threshold ? 1 : 0;
    }
    return a;
}

Metrics evaluate(const Assignment& assignment, const Graph& g) {
    if (assignment.size() != g.num_nodes())
        throw std::invalid_argument("assignment does not match graph size");
    Metrics m;
    switch (assignment.kind) {
        case ProblemKind::maxcut: {
            for (const auto& [u, v] : g.edges())
                if (assignment.x[u] != assignment.x[v]) ++m.cut_size;
            m.objective = -static_cast<double>(m.cut_size);
            m.feasible = true;
            break;
        }
        case ProblemKind::coloring: {
            for (const auto& [u, v] : g.edges())
                if (assignment.colors[u] == assignment.colors[v]) ++m.violations;
            m.objective = static_cast<double>(m.violations);
            m.feasible = m.violations == 0;
            break;
        }
        case ProblemKind::mis: {
            for (std::uint8_t xi : assignment.x) m.set_size += xi;
            for (const auto& [u, v] : g.edges())
                if (assignment.x[u] && assignment.x[v]) ++m.violations;
            m.feasible = m.violations == 0;
            m.objective = -static_cast<double>(m.set_size);
            break;
        }
    }
    return m;
}

double p_value(double cut_size, std::size_t n, std::size_t d) {
    if (n < 1 || d < 1) throw std::invalid_argument("p_value requires n >= 1, d >= 1");
    const double dn = static_cast<double>(d);
    return std::sqrt(4.0 / dn) * (cut_size / static_cast<double>(n) - dn / 4.0);
}

double mis_penalty_at(std::size_t t, std::size_t n_total) {
    constexpr double lo = 0.01;
    constexpr double hi = 2.0;
    if (n_total < 2) return hi;
    if (t >= n_total) t = n_total - 1;
    return lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(n_total - 1);
}

Assignment repair_mis(const Graph& g, Assignment assignment, std::span<const double> p) {
    if (assignment.kind != ProblemKind::mis)
        throw std::invalid_argument("repair_mis expects a MIS assignment");
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [u, v] : g.edges()) {
            if (assignment.x[u] && assignment.x[v]) {
                std::uint32_t drop = v;
                if (p[u] < p[v] || (p[u] == p[v] && u > v)) drop = u;
                assignment.x[drop] = 0;
                changed = true;
            }
        }
    }
    return assignment;
}

} // namespace qgnn
