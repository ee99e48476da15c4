#include "qubognn/serialize.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

using nlohmann::json;

namespace qgnn::serialize {

std::string current_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

json metrics_to_json(const Metrics& m, ProblemKind kind) {
    json out;
    out["objective"] = m.objective;
    out["feasible"] = m.feasible;
    switch (kind) {
        case ProblemKind::maxcut: out["cut_size"] = m.cut_size; break;
        case ProblemKind::coloring: out["violations"] = m.violations; break;
        case ProblemKind::mis:
            out["set_size"] = m.set_size;
            out["violations"] = m.violations;
            break;
    }
    if (m.p_value) out["p_value"] = *m.p_value;
    return out;
}

json assignment_to_json_obj(const Assignment& a, const Metrics& m) {
    json out;
    out["kind"] = std::string(to_string(a.kind));
    out["n"] = a.size();
    if (a.kind == ProblemKind::coloring) {
        out["k"] = a.num_colors;
        out["colors"] = a.colors;
    } else {
        out["x"] = a.x;
    }
    out["metrics"] = metrics_to_json(m, a.kind);
    return out;
}

json model_config_to_json(const model::ModelConfig& c) {
    return json{{"conv", std::string(model::to_string(c.conv_type))},
                {"hidden", c.hidden_size},
                {"out_dim", c.out_dim},
                {"recurrent_mode", std::string(model::to_string(c.recurrent_mode))},
                {"layers", std::string(model::to_string(c.parallel_layers))},
                {"dropout", c.dropout_rate},
                {"random_dim", c.random_dim},
                {"use_shared", c.use_shared},
                {"use_pagerank", c.use_pagerank},
                {"use_recurrent", c.use_recurrent}};
}

json train_config_to_json(const train::TrainConfig& c) {
    return json{{"lr", c.learning_rate},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps},
                {"grad_clip", c.grad_clip_norm},
                {"max_iters", c.max_iters},
                {"loss_window", c.loss_window},
                {"loss_delta", c.loss_delta},
                {"coloring_abs_stop", c.coloring_abs_stop},
                {"precision",
                 c.precision == train::Precision::single ? "single" : "double"},
                {"deterministic", c.deterministic},
                {"composite_copies", c.composite_copies},
                {"best_stall_iters", c.best_stall_iters}};
}

json run_result_to_json_obj(const train::RunResult& r) {
    json out;
    out["seed"] = r.seed;
    out["best_iteration"] = r.best_iteration;
    out["iterations_run"] = r.iterations_run;
    out["stop_reason"] = std::string(train::to_string(r.stop_reason));
    out["wall_time_s"] = r.wall_time_seconds;
    out["final_loss"] = r.final_loss;
    out["max_post_clip_norm"] = r.max_post_clip_norm;
    if (r.mis_repair_applied) out["mis_repair_applied"] = true;
    out["best"] = assignment_to_json_obj(r.best_assignment, r.best_metrics);
    return out;
}

} // namespace

std::string assignment_to_json(const Assignment& assignment, const Metrics& metrics,
                               int indent) {
    return assignment_to_json_obj(assignment, metrics).dump(indent);
}

Assignment assignment_from_json(const std::string& text) {
    const json in = json::parse(text);
    Assignment a;
    a.kind = problem_kind_from_string(in.at("kind").get<std::string>());
    if (a.kind == ProblemKind::coloring) {
        a.num_colors = in.at("k").get<std::size_t>();
        a.colors = in.at("colors").get<std::vector<std::uint32_t>>();
    } else {
        a.x = in.at("x").get<std::vector<std::uint8_t>>();
    }
    if (a.size() != in.at("n").get<std::size_t>())
        throw std::runtime_error("assignment length does not match declared n");
    return a;
}

std::string run_result_to_json(const train::RunResult& result, int indent) {
    return run_result_to_json_obj(result).dump(indent);
}

std::string result_file_json(const RunManifest& manifest, const train::MultiSeedResult& runs,
                             int indent) {
    json out;
    out["schema_version"] = 1;
    out["manifest"] = json{{"command", manifest.command},
                           {"problem", manifest.problem},
                           {"instance", manifest.instance},
                           {"model_config", model_config_to_json(manifest.model_config)},
                           {"train_config", train_config_to_json(manifest.train_config)},
                           {"seeds", manifest.seeds},
                           {"tool_version", manifest.tool_version},
                           {"timestamp", manifest.timestamp}};
    out["result"] = run_result_to_json_obj(runs.best);
    json per_seed = json::array();
    for (const auto& r : runs.per_seed) per_seed.push_back(run_result_to_json_obj(r));
    out["per_seed"] = std::move(per_seed);
    out["summary"] = json{{"best", runs.summary.best},
                          {"median", runs.summary.median},
                          {"min", runs.summary.worst}};
    return out.dump(indent);
}

std::string trace_to_csv(const std::vector<train::TracePoint>& trace) {
    std::ostringstream os;
    os << "iter,loss,best_metric\n";
    for (const auto& p : trace)
        os << p.iteration << ',' << p.loss << ',' << p.best_metric << '\n';
    return os.str();
}

Checkpoint checkpoint_params(const model::Params<float>& params,
                             const model::ModelConfig& config) {
    Checkpoint cp;
    json shapes = json::array();
    params.visit([&](const ad::Mat<float>& m) {
        shapes.push_back(json{{"rows", m.rows}, {"cols", m.cols}});
        cp.values.insert(cp.values.end(), m.data.begin(), m.data.end());
    });
    json manifest;
    manifest["model_config"] = model_config_to_json(config);
    manifest["shapes"] = std::move(shapes);
    manifest["scalar_count"] = cp.values.size();
    cp.shape_manifest_json = manifest.dump(2);
    return cp;
}

model::Params<float> restore_params(const Checkpoint& checkpoint) {
    const json manifest = json::parse(checkpoint.shape_manifest_json);
    const json& mc = manifest.at("model_config");
    model::ModelConfig config;
    config.conv_type = model::conv_type_from_string(mc.at("conv").get<std::string>());
    config.hidden_size = mc.at("hidden").get<std::size_t>();
    config.out_dim = mc.at("out_dim").get<std::size_t>();
    config.recurrent_mode =
        model::recurrent_mode_from_string(mc.at("recurrent_mode").get<std::string>());
    config.parallel_layers =
        model::parallel_layers_from_string(mc.at("layers").get<std::string>());
    config.dropout_rate = mc.at("dropout").get<double>();
    config.random_dim = mc.at("random_dim").get<std::size_t>();
    config.use_shared = mc.at("use_shared").get<bool>();
    config.use_pagerank = mc.at("use_pagerank").get<bool>();
    config.use_recurrent = mc.at("use_recurrent").get<bool>();

    rng::Xoshiro256ss dummy(0);
    model::Params<float> params = model::init_model<float>(config, dummy);
    if (params.scalar_count() != checkpoint.values.size())
        throw std::runtime_error("checkpoint scalar count does not match manifest shapes");
    std::size_t offset = 0;
    params.visit([&](ad::Mat<float>& m) {
        std::copy(checkpoint.values.begin() + offset,
                  checkpoint.values.begin() + offset + m.size(), m.data.begin());
        offset += m.size();
    });
    return params;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << contents;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace qgnn::serialize
