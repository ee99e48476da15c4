#include <doctest.h>

#include "qubognn/serialize.hpp"

#include <json.hpp>

using namespace qgnn;
using nlohmann::json;

TEST_CASE("assignment json round trip") {
    Assignment a{ProblemKind::maxcut, {1, 0, 1, 1}, {}, 0};
    const Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    const Metrics m = evaluate(a, g);

    const std::string text = serialize::assignment_to_json(a, m);
    const json parsed = json::parse(text);
    CHECK(parsed.at("kind") == "maxcut");
    CHECK(parsed.at("n") == 4);
    CHECK(parsed.at("metrics").at("cut_size") == m.cut_size);

    const Assignment back = serialize::assignment_from_json(text);
    CHECK(back.kind == a.kind);
    CHECK(back.x == a.x);
}

TEST_CASE("coloring assignment json") {
    Assignment a{ProblemKind::coloring, {}, {0, 1, 2}, 3};
    const Graph k3 = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    const std::string text = serialize::assignment_to_json(a, evaluate(a, k3));
    const Assignment back = serialize::assignment_from_json(text);
    CHECK(back.colors == a.colors);
    CHECK(back.num_colors == 3);
}

TEST_CASE("result file carries manifest, per-seed rows and summary") {
    const Graph toy = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    train::TrainConfig config;
    config.max_iters = 300;
    config.loss_window = 100;
    const auto seeds = train::derive_seeds(5, 2);
    const auto runs = train::multi_seed(ProblemKind::maxcut, toy,
                                        model::default_model_config(ProblemKind::maxcut),
                                        config, seeds, 1);

    serialize::RunManifest manifest;
    manifest.command = "solve";
    manifest.problem = "maxcut";
    manifest.instance = "gen:test";
    manifest.model_config = model::default_model_config(ProblemKind::maxcut);
    manifest.train_config = config;
    manifest.seeds = seeds;
    manifest.tool_version = "test";
    manifest.timestamp = serialize::current_timestamp();

    const json parsed = json::parse(serialize::result_file_json(manifest, runs));
    CHECK(parsed.at("schema_version") == 1);
    CHECK(parsed.at("manifest").at("problem") == "maxcut");
    CHECK(parsed.at("manifest").at("train_config").at("max_iters") == 300);
    CHECK(parsed.at("per_seed").size() == 2);
    CHECK(parsed.at("result").at("best").at("n") == 4);
    CHECK(parsed.at("summary").contains("median"));
}

TEST_CASE("trace csv format") {
    std::vector<train::TracePoint> trace = {{0, -1.5, 3}, {10, -2.0, 4}};
    const std::string csv = serialize::trace_to_csv(trace);
    CHECK(csv == "iter,loss,best_metric\n0,-1.5,3\n10,-2,4\n");
}

TEST_CASE("parameter checkpoint round trip") {
    const model::ModelConfig config = model::default_model_config(ProblemKind::maxcut);
    auto rng = rng::make_stream(12, rng::Stream::init);
    const auto params = model::init_model<float>(config, rng);

    const auto checkpoint = serialize::checkpoint_params(params, config);
    CHECK(checkpoint.values.size() == params.scalar_count());

    const auto restored = serialize::restore_params(checkpoint);
    CHECK(restored.w_mean.data == params.w_mean.data);
    CHECK(restored.w_out.data == params.w_out.data);
    CHECK(restored.bn1_gamma.data == params.bn1_gamma.data);
}
