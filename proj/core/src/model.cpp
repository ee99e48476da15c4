#include "qubognn/model.hpp"

namespace qgnn::model {

std::string_view to_string(ConvType v) {
    return v == ConvType::sage ? "sage" : "gcn";
}

std::string_view to_string(RecurrentMode v) {
    switch (v) {
        case RecurrentMode::raw: return "raw";
        case RecurrentMode::prob: return "prob";
        case RecurrentMode::both: return "both";
    }
    return "?";
}

std::string_view to_string(ParallelLayers v) {
    switch (v) {
        case ParallelLayers::both: return "both";
        case ParallelLayers::mean_only: return "mean";
        case ParallelLayers::pool_only: return "pool";
    }
    return "?";
}

ConvType conv_type_from_string(std::string_view s) {
    if (s == "sage") return ConvType::sage;
    if (s == "gcn") return ConvType::gcn;
    throw std::invalid_argument("unknown convolution type: " + std::string(s));
}

RecurrentMode recurrent_mode_from_string(std::string_view s) {
    if (s == "raw") return RecurrentMode::raw;
    if (s == "prob") return RecurrentMode::prob;
    if (s == "both") return RecurrentMode::both;
    throw std::invalid_argument("unknown recurrent mode: " + std::string(s));
}

ParallelLayers parallel_layers_from_string(std::string_view s) {
    if (s == "both") return ParallelLayers::both;
    if (s == "mean" || s == "mean_only") return ParallelLayers::mean_only;
    if (s == "pool" || s == "pool_only") return ParallelLayers::pool_only;
    throw std::invalid_argument("unknown parallel-layers mode: " + std::string(s));
}

ModelConfig default_model_config(ProblemKind kind, std::size_t k) {
    ModelConfig config;
    if (kind == ProblemKind::coloring) {
        if (k < 1) throw std::invalid_argument("coloring config requires k >= 1");
        config.hidden_size = 140;
        config.out_dim = k;
    } else {
        config.hidden_size = 50;
        config.out_dim = 1;
    }
    return config;
}

} // namespace qgnn::model
