#pragma once

#include "qubognn/graph.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace qgnn {

enum class ProblemKind { maxcut, coloring, mis };

std::string_view to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(std::string_view name);

// One quadratic pseudo-Boolean instance: F(x) = sum quad + sum linear + constant.
// Quadratic terms are strictly off-diagonal with i < j; diagonal contributions
// are folded into the linear part (x_i^2 = x_i). The constant absorbs the
// expansion of the coloring one-hot penalty so that F matches the unexpanded
// objective value.
struct QuboInstance {
    struct QuadTerm {
        std::uint32_t i, j;
        double coeff;
    };

    std::size_t n_vars = 0;
    std::vector<QuadTerm> quad_terms;
    std::vector<double> linear_terms;
    double constant = 0.0;
    ProblemKind kind = ProblemKind::maxcut;
    std::size_t coloring_k = 0; // only for kind == coloring
};

// Discrete solution: binary vector for maxcut/mis, one color index per node
// for coloring.
struct Assignment {
    ProblemKind kind = ProblemKind::maxcut;
    std::vector<std::uint8_t> x;        // maxcut, mis
    std::vector<std::uint32_t> colors;  // coloring
    std::size_t num_colors = 0;

    std::size_t size() const {
        return kind == ProblemKind::coloring ? colors.size() : x.size();
    }
};

struct Metrics {
    double objective = 0.0;
    std::size_t cut_size = 0;    // maxcut
    std::size_t violations = 0;  // coloring, mis
    std::size_t set_size = 0;    // mis
    bool feasible = true;
    std::optional<double> p_value; // regular-graph max-cut quality, filled by callers
};

// Cut maximization as minimization: F(x) = sum_{(i,j) in E} (2 x_i x_j - x_i - x_j).
QuboInstance build_maxcut(const Graph& g);

// k-coloring: one-hot penalty per node plus same-color conflict per edge.
// Variables x_{i,c} are flattened node-major: var(i, c) = i*k + c.
QuboInstance build_coloring(const Graph& g, std::size_t k);

// Independent set: F(x) = -sum x_i + penalty * sum_{(i,j) in E} x_i x_j.
QuboInstance build_mis(const Graph& g, double penalty);

// Exact discrete objective; x must be binary of length n_vars.
double objective(const QuboInstance& instance, std::span<const std::uint8_t> x);

// Differentiable relaxation evaluated at probabilities p (row-major n x k,
// k = 1 for maxcut/mis). Coloring uses only the conflict term; its rows must
// sum to 1 within 1e-6. Gradients are provided by the compute engine, this is
// the reference value.
double relaxed_loss(ProblemKind kind, const Graph& g, std::span<const double> p,
                    std::size_t k = 1, double penalty = 0.0);

// Threshold rounding: x_i = 1 iff p_i > threshold (strict); coloring takes the
// row argmax with ties to the smallest color index.
Assignment discretize(ProblemKind kind, std::span<const double> p, std::size_t k = 1,
                      double threshold = 0.5);

Metrics evaluate(const Assignment& assignment, const Graph& g);

// Normalized cut quality for random d-regular graphs: sqrt(4/d) * (z/n - d/4).
double p_value(double cut_size, std::size_t n, std::size_t d);

// Linear penalty ramp for MIS training, from 0.01 at t=0 to 2.0 at t=n_total-1.
double mis_penalty_at(std::size_t t, std::size_t n_total);

// Conservative repair: for every violated edge drop the endpoint with the
// smaller probability (ties drop the larger index); repeats until independent.
// Only ever shrinks the set.
Assignment repair_mis(const Graph& g, Assignment assignment, std::span<const double> p);

} // namespace qgnn
