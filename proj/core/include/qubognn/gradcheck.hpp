#pragma once

#include "qubognn/model.hpp"
#include "qubognn/qubo.hpp"

#include <string>
#include <vector>

namespace qgnn::gradcheck {

struct CaseResult {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t parameter_count = 0;
    std::vector<std::pair<std::string, double>> layer_errors; // worst per parameter matrix
};

// Central-difference check of the full forward + relaxed loss against the
// recorded gradients, in double precision, dropout driven by a fixed seed so
// the perturbed evaluations see the identical mask.
CaseResult check_full_model(ProblemKind kind, const Graph& graph,
                            const model::ModelConfig& config, std::uint64_t seed,
                            double step = 1e-4);

// Every problem kind x convolution type x parallel-layer ablation on a small
// fixed graph. `hidden` is kept small so the sweep stays fast. `seed` fixes
// the audit point; a point can sit so close to a rectifier kink that central
// differences disagree with the (correct) subgradient at every ladder step,
// so callers pin a seed they have verified clean.
std::vector<CaseResult> full_suite(std::uint64_t seed = 7, std::size_t hidden = 8,
                                   double step = 1e-3);

} // namespace qgnn::gradcheck
