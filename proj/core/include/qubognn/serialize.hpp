#pragma once

#include "qubognn/model.hpp"
#include "qubognn/qubo.hpp"
#include "qubognn/trainer.hpp"

#include <string>
#include <vector>

namespace qgnn::serialize {

// Everything needed to replay a run.
struct RunManifest {
    std::string command;
    std::string problem;
    std::string instance;        // file path or generator spec
    model::ModelConfig model_config;
    train::TrainConfig train_config;
    std::vector<std::uint64_t> seeds;
    std::string tool_version;
    std::string timestamp;
};

std::string current_timestamp();

// {"kind", "n", "x" | "colors", "metrics": {...}}
std::string assignment_to_json(const Assignment& assignment, const Metrics& metrics,
                               int indent = 2);
Assignment assignment_from_json(const std::string& text);

std::string run_result_to_json(const train::RunResult& result, int indent = 2);

// Full result.json payload: manifest + best result + per-seed rows.
std::string result_file_json(const RunManifest& manifest, const train::MultiSeedResult& runs,
                             int indent = 2);

// "iter,loss,best_metric" rows
std::string trace_to_csv(const std::vector<train::TracePoint>& trace);

// Flat little-endian parameter blob with a JSON shape manifest, for
// checkpointing long runs.
struct Checkpoint {
    std::string shape_manifest_json;
    std::vector<float> values;
};

Checkpoint checkpoint_params(const model::Params<float>& params,
                             const model::ModelConfig& config);
model::Params<float> restore_params(const Checkpoint& checkpoint);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

} // namespace qgnn::serialize
