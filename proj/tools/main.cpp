// qubognn: unsupervised GNN solver for QUBO-formulated graph problems
// (max-cut, graph coloring, maximum independent set) with classical
// baselines and a benchmark harness.

#include <CLI11.hpp>
#include <json.hpp>

#include "qubognn/gradcheck.hpp"
#include "qubognn/graph.hpp"
#include "qubognn/heuristics.hpp"
#include "qubognn/model.hpp"
#include "qubognn/qubo.hpp"
#include "qubognn/serialize.hpp"
#include "qubognn/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qgnn;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// --- generator spec mini-language: kind:key=value,... ------------------------
// kinds: dreg (n, d, seed), er (n or n=a..b, p or m, seed),
//        union (k, base=<kind>, plus the base kind's keys)

struct SpecKv {
    std::string kind;
    std::map<std::string, std::string> kv;
};

SpecKv parse_spec(const std::string& spec) {
    SpecKv out;
    const auto colon = spec.find(':');
    out.kind = spec.substr(0, colon);
    if (colon == std::string::npos) return out;
    std::string rest = spec.substr(colon + 1);
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad generator spec item: " + item);
        out.kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

std::uint64_t kv_u64(const SpecKv& s, const std::string& key, std::optional<std::uint64_t> fallback = {}) {
    auto it = s.kv.find(key);
    if (it == s.kv.end()) {
        if (fallback) return *fallback;
        throw std::invalid_argument("generator spec missing key: " + key);
    }
    return std::stoull(it->second);
}

Graph generate_from_spec(const std::string& spec) {
    const SpecKv s = parse_spec(spec);
    if (s.kind == "dreg") {
        return gen_random_regular(kv_u64(s, "n"), kv_u64(s, "d"), kv_u64(s, "seed", 1));
    }
    if (s.kind == "er") {
        const std::uint64_t seed = kv_u64(s, "seed", 1);
        std::uint64_t n;
        const std::string n_text = s.kv.count("n") ? s.kv.at("n") : "";
        if (n_text.empty()) throw std::invalid_argument("er spec requires n");
        const auto dots = n_text.find("..");
        if (dots != std::string::npos) {
            const std::uint64_t lo = std::stoull(n_text.substr(0, dots));
            const std::uint64_t hi = std::stoull(n_text.substr(dots + 2));
            if (hi < lo) throw std::invalid_argument("bad n range in er spec");
            auto rng = rng::make_stream(seed, rng::Stream::graph_gen);
            n = lo + rng.below(hi - lo + 1);
        } else {
            n = std::stoull(n_text);
        }
        if (s.kv.count("m")) return gen_erdos_renyi_m(n, kv_u64(s, "m"), seed);
        // density defaults to the common ER benchmark setting when omitted
        const double p = s.kv.count("p") ? std::stod(s.kv.at("p")) : 0.15;
        return gen_erdos_renyi_p(n, p, seed);
    }
    if (s.kind == "union") {
        const std::uint64_t k = kv_u64(s, "k");
        auto base_it = s.kv.find("base");
        if (base_it == s.kv.end()) throw std::invalid_argument("union spec requires base=");
        SpecKv base;
        base.kind = base_it->second;
        base.kv = s.kv;
        base.kv.erase("k");
        base.kv.erase("base");
        std::string base_spec = base.kind + ":";
        bool first = true;
        for (const auto& [key, value] : base.kv) {
            if (!first) base_spec += ',';
            base_spec += key + "=" + value;
            first = false;
        }
        return disjoint_union(generate_from_spec(base_spec), k);
    }
    throw std::invalid_argument("unknown generator kind: " + s.kind);
}

Graph load_instance(const std::string& graph_path, const std::string& gen_spec,
                    std::string* instance_name) {
    if (!graph_path.empty() && !gen_spec.empty())
        throw std::invalid_argument("--graph and --gen are mutually exclusive");
    if (!graph_path.empty()) {
        *instance_name = graph_path;
        return load_graph_file(graph_path);
    }
    if (!gen_spec.empty()) {
        *instance_name = gen_spec;
        return generate_from_spec(gen_spec);
    }
    throw std::invalid_argument("one of --graph or --gen is required");
}

// --- solve -------------------------------------------------------------------

struct SolveOptions {
    std::string problem;
    std::string graph_path;
    std::string gen_spec;
    std::size_t k = 0;
    std::size_t seeds = 1;
    std::uint64_t base_seed = 1;
    std::size_t max_iters = 100000;
    std::size_t loss_window = 500;
    std::size_t hidden = 0; // 0 = kind default
    bool no_recurrent = false;
    std::string conv = "sage";
    std::string layers = "both";
    std::string recurrent_mode = "both";
    std::size_t union_copies = 1;
    std::size_t trace_every = 0;
    std::size_t best_stall = 0;
    std::size_t checkpoint_every = 0;
    bool double_precision = false;
    std::size_t threads = 0;
    std::string out_dir = ".";
};

int run_solve(const SolveOptions& opt) {
    const ProblemKind kind = problem_kind_from_string(opt.problem);
    if (kind == ProblemKind::coloring && opt.k == 0)
        throw std::invalid_argument("coloring requires --k");

    std::string instance;
    const Graph graph = load_instance(opt.graph_path, opt.gen_spec, &instance);

    model::ModelConfig model_config = model::default_model_config(kind, opt.k);
    if (opt.hidden > 0) model_config.hidden_size = opt.hidden;
    model_config.conv_type = model::conv_type_from_string(opt.conv);
    model_config.parallel_layers = model::parallel_layers_from_string(opt.layers);
    model_config.recurrent_mode = model::recurrent_mode_from_string(opt.recurrent_mode);
    model_config.use_recurrent = !opt.no_recurrent;

    train::TrainConfig train_config;
    train_config.max_iters = opt.max_iters;
    // short runs shrink the convergence window to keep it meaningful
    train_config.loss_window = std::min(opt.loss_window, std::max<std::size_t>(1, opt.max_iters / 2));
    train_config.trace_every = opt.trace_every;
    train_config.best_stall_iters = opt.best_stall;
    train_config.composite_copies = opt.union_copies;
    if (opt.double_precision) train_config.precision = train::Precision::double_;
    if (opt.checkpoint_every > 0) {
        fs::create_directories(opt.out_dir);
        const std::string dir = opt.out_dir;
        const model::ModelConfig snapshot_config = model_config;
        train_config.checkpoint_every = opt.checkpoint_every;
        // one checkpoint pair per seed, overwritten at each cadence
        train_config.checkpoint_sink = [dir, snapshot_config](std::uint64_t seed, std::size_t,
                                                              const model::Params<float>& p) {
            const auto cp = serialize::checkpoint_params(p, snapshot_config);
            const std::string stem =
                (fs::path(dir) / ("checkpoint-" + std::to_string(seed))).string();
            serialize::write_file(stem + ".manifest.json", cp.shape_manifest_json);
            std::string blob(reinterpret_cast<const char*>(cp.values.data()),
                             cp.values.size() * sizeof(float));
            serialize::write_file(stem + ".bin", blob);
        };
    }

    const auto seeds = train::derive_seeds(opt.base_seed, opt.seeds);
    const auto runs =
        train::multi_seed(kind, graph, model_config, train_config, seeds, opt.threads);

    serialize::RunManifest manifest;
    manifest.command = "solve";
    manifest.problem = std::string(to_string(kind));
    manifest.instance = instance;
    manifest.model_config = model_config;
    manifest.train_config = train_config;
    manifest.seeds = seeds;
    manifest.tool_version = kToolVersion;
    manifest.timestamp = serialize::current_timestamp();

    fs::create_directories(opt.out_dir);
    serialize::write_file((fs::path(opt.out_dir) / "result.json").string(),
                          serialize::result_file_json(manifest, runs));
    serialize::write_file(
        (fs::path(opt.out_dir) / "assignment.json").string(),
        serialize::assignment_to_json(runs.best.best_assignment, runs.best.best_metrics));
    if (opt.trace_every > 0)
        serialize::write_file((fs::path(opt.out_dir) / "trace.csv").string(),
                              serialize::trace_to_csv(runs.best.loss_trace));

    const Metrics& m = runs.best.best_metrics;
    switch (kind) {
        case ProblemKind::maxcut:
            std::cout << "best cut " << m.cut_size << " (seed " << runs.best.seed << ", "
                      << runs.best.iterations_run << " iters, "
                      << train::to_string(runs.best.stop_reason) << ")\n";
            break;
        case ProblemKind::coloring:
            std::cout << "violations " << m.violations << " with k=" << opt.k << " (seed "
                      << runs.best.seed << ")\n";
            break;
        case ProblemKind::mis:
            std::cout << "independent set size " << m.set_size
                      << (runs.best.mis_repair_applied ? " (repaired)" : "") << " (seed "
                      << runs.best.seed << ")\n";
            break;
    }
    if (kind == ProblemKind::mis && runs.best.mis_repair_applied) return 2;
    return 0;
}

// --- baseline ----------------------------------------------------------------

struct BaselineOptions {
    std::string algo;
    std::string graph_path;
    std::string gen_spec;
    std::uint64_t budget = 10'000'000;
    std::size_t restarts = 20;
    double tau = 1.3;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

int run_baseline(const BaselineOptions& opt) {
    std::string instance;
    const Graph graph = load_instance(opt.graph_path, opt.gen_spec, &instance);
    fs::create_directories(opt.out_dir);

    if (opt.algo == "eo") {
        heuristics::EoConfig config;
        config.tau = opt.tau;
        config.update_budget = opt.budget;
        config.restarts = opt.restarts;
        config.seed = opt.seed;
        const auto result = heuristics::tau_eo_maxcut(graph, config);
        const Metrics m = evaluate(result.assignment, graph);
        serialize::write_file((fs::path(opt.out_dir) / "assignment.json").string(),
                              serialize::assignment_to_json(result.assignment, m));
        std::ostringstream trace;
        trace << "update,best_cut\n";
        for (const auto& [update, cut] : result.best_trace)
            trace << update << ',' << cut << '\n';
        serialize::write_file((fs::path(opt.out_dir) / "trace.csv").string(), trace.str());
        std::cout << "eo best cut " << result.best_cut << " after " << opt.budget
                  << " updates x " << opt.restarts << " restarts\n";
        return 0;
    }
    if (opt.algo == "greedy") {
        const Assignment assignment = heuristics::greedy_mis(graph);
        const Metrics m = evaluate(assignment, graph);
        serialize::write_file((fs::path(opt.out_dir) / "assignment.json").string(),
                              serialize::assignment_to_json(assignment, m));
        std::cout << "greedy independent set size " << m.set_size << "\n";
        return 0;
    }
    throw std::invalid_argument("unknown baseline: " + opt.algo);
}

// --- gradcheck ---------------------------------------------------------------

int run_gradcheck(double step, double tolerance) {
    const auto results = gradcheck::full_suite(7, 8, step);
    double worst = 0.0;
    std::map<std::string, double> per_layer;
    for (const auto& r : results) {
        std::cout << r.name << ": max rel error " << r.max_rel_error << " over "
                  << r.parameter_count << " parameters\n";
        for (const auto& [layer, err] : r.layer_errors)
            per_layer[layer] = std::max(per_layer[layer], err);
        worst = std::max(worst, r.max_rel_error);
    }
    std::cout << "worst per layer across configs:\n";
    for (const auto& [layer, err] : per_layer)
        std::cout << "  " << layer << ": " << err << "\n";
    std::cout << "worst: " << worst << (worst < tolerance ? " OK" : " FAIL") << "\n";
    return worst < tolerance ? 0 : 1;
}

// --- bench -------------------------------------------------------------------

struct BenchOptions {
    std::string suite;
    std::string data_dir = "data";
    std::string only;
    std::string out_file;
    std::size_t seeds = 5;
    std::uint64_t base_seed = 1;
    std::size_t graphs = 20;
    std::size_t d = 5;
    std::size_t n = 500;
    std::size_t max_iters = 0; // 0 = suite default
    std::size_t start_k = 2;
    std::size_t max_k = 20;
    std::size_t threads = 0;
};

struct BenchRow {
    std::string instance;
    std::string status = "ok";
    json values;
};

void emit_bench(const BenchOptions& opt, const std::vector<BenchRow>& rows) {
    // flat CSV on stdout: union of value keys across rows, stable order
    std::vector<std::string> columns;
    for (const auto& row : rows)
        for (const auto& [key, value] : row.values.items())
            if (std::find(columns.begin(), columns.end(), key) == columns.end())
                columns.push_back(key);

    std::cout << "instance,status";
    for (const auto& c : columns) std::cout << ',' << c;
    std::cout << "\n";
    json out = json::array();
    for (const auto& row : rows) {
        std::cout << row.instance << ',' << row.status;
        for (const auto& c : columns) {
            std::cout << ',';
            if (row.values.contains(c)) {
                const json& v = row.values.at(c);
                std::cout << (v.is_string() ? v.get<std::string>() : v.dump());
            }
        }
        std::cout << "\n";
        json r;
        r["instance"] = row.instance;
        r["status"] = row.status;
        r["values"] = row.values;
        out.push_back(r);
    }
    if (!opt.out_file.empty()) serialize::write_file(opt.out_file, out.dump(2));
}

int run_bench(const BenchOptions& opt) {
    std::vector<BenchRow> rows;
    bool any_error = false;

    auto multi = [&](ProblemKind kind, const Graph& g, model::ModelConfig mc,
                     train::TrainConfig tc, std::uint64_t seed_base) {
        tc.loss_window = std::min(tc.loss_window, std::max<std::size_t>(1, tc.max_iters / 2));
        const auto seeds = train::derive_seeds(seed_base, opt.seeds);
        return train::multi_seed(kind, g, mc, tc, seeds, opt.threads);
    };

    if (opt.suite == "toy") {
        std::vector<Graph::Edge> edges;
        for (std::uint32_t i = 0; i < 10; ++i) {
            std::uint32_t a = i, b = (i + 1) % 10;
            if (a > b) std::swap(a, b);
            edges.emplace_back(a, b);
        }
        edges.emplace_back(0, 5);
        edges.emplace_back(2, 7);
        const Graph toy = Graph::from_edges(10, edges);

        train::TrainConfig tc;
        tc.max_iters = opt.max_iters ? opt.max_iters : 2000;
        const auto runs = multi(ProblemKind::maxcut, toy,
                                model::default_model_config(ProblemKind::maxcut), tc,
                                opt.base_seed);
        double sum_best_iteration = 0.0;
        for (const auto& r : runs.per_seed) sum_best_iteration += static_cast<double>(r.best_iteration);
        BenchRow row;
        row.instance = "toy-bipartite-10-12";
        row.values = {{"best_cut", runs.best.best_metrics.cut_size},
                      {"median_cut", runs.summary.median},
                      {"min_cut", runs.summary.worst},
                      {"mean_best_iteration", sum_best_iteration / runs.per_seed.size()}};
        rows.push_back(row);
    } else if (opt.suite == "dreg-pvalue") {
        train::TrainConfig tc;
        tc.max_iters = opt.max_iters ? opt.max_iters : 50000;
        double sum_p = 0.0;
        for (std::size_t gi = 0; gi < opt.graphs; ++gi) {
            const Graph g = gen_random_regular(opt.n, opt.d, opt.base_seed + gi);
            const auto runs = multi(ProblemKind::maxcut, g,
                                    model::default_model_config(ProblemKind::maxcut), tc,
                                    opt.base_seed * 1000 + gi);
            const double p =
                p_value(static_cast<double>(runs.best.best_metrics.cut_size), opt.n, opt.d);
            sum_p += p;
            BenchRow row;
            row.instance = "dreg-n" + std::to_string(opt.n) + "-d" + std::to_string(opt.d) +
                           "-g" + std::to_string(gi);
            row.values = {{"best_cut", runs.best.best_metrics.cut_size},
                          {"p_value", p},
                          {"median_cut", runs.summary.median},
                          {"min_cut", runs.summary.worst}};
            rows.push_back(row);
        }
        BenchRow mean_row;
        mean_row.instance = "mean";
        mean_row.values = {{"mean_best_p_value", sum_p / static_cast<double>(opt.graphs)}};
        rows.push_back(mean_row);
    } else if (opt.suite == "gset") {
        train::TrainConfig tc;
        tc.max_iters = opt.max_iters ? opt.max_iters : 100000;
        const fs::path dir = fs::path(opt.data_dir) / "gset";
        std::vector<fs::path> files;
        if (fs::is_directory(dir))
            for (const auto& entry : fs::directory_iterator(dir))
                if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            rows.push_back({"(none)", "error: no instances under " + dir.string(), json::object()});
            any_error = true;
        }
        for (const auto& file : files) {
            if (!opt.only.empty() && file.stem() != opt.only) continue;
            BenchRow row;
            row.instance = file.stem();
            try {
                const Graph g = load_graph_file(file.string());
                const auto runs = multi(ProblemKind::maxcut, g,
                                        model::default_model_config(ProblemKind::maxcut), tc,
                                        opt.base_seed);
                row.values = {{"best_cut", runs.best.best_metrics.cut_size},
                              {"median_cut", runs.summary.median},
                              {"min_cut", runs.summary.worst},
                              {"wall_time_s", runs.best.wall_time_seconds}};
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
                any_error = true;
            }
            rows.push_back(row);
        }
    } else if (opt.suite == "color-chromatic") {
        train::TrainConfig tc;
        tc.max_iters = opt.max_iters ? opt.max_iters : 100000;
        const fs::path dir = fs::path(opt.data_dir) / "color";
        std::vector<fs::path> files;
        if (fs::is_directory(dir))
            for (const auto& entry : fs::directory_iterator(dir))
                if (entry.path().extension() == ".col") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            rows.push_back({"(none)", "error: no instances under " + dir.string(), json::object()});
            any_error = true;
        }
        for (const auto& file : files) {
            if (!opt.only.empty() && file.stem() != opt.only) continue;
            BenchRow row;
            row.instance = file.stem();
            try {
                const Graph g = load_graph_file(file.string());
                const auto result = train::chromatic_search(g, opt.start_k, opt.max_k, 10, tc,
                                                            opt.base_seed, opt.threads);
                if (result.found) {
                    row.values = {{"colors", result.k}, {"violations", 0}};
                } else {
                    row.status = "failed";
                    row.values = {{"best_k", result.best_k},
                                  {"best_violations", result.best_violations}};
                    any_error = true;
                }
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
                any_error = true;
            }
            rows.push_back(row);
        }
    } else if (opt.suite == "mis-rb") {
        train::TrainConfig tc;
        tc.max_iters = opt.max_iters ? opt.max_iters : 100000;
        const fs::path dir = fs::path(opt.data_dir) / "rb";
        std::vector<fs::path> files;
        if (fs::is_directory(dir))
            for (const auto& entry : fs::directory_iterator(dir))
                if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            rows.push_back({"(none)", "error: no instances under " + dir.string(), json::object()});
            any_error = true;
        }
        for (const auto& file : files) {
            if (!opt.only.empty() && file.stem() != opt.only) continue;
            BenchRow row;
            row.instance = file.stem();
            try {
                const Graph g = load_graph_file(file.string());
                const auto runs = multi(ProblemKind::mis, g,
                                        model::default_model_config(ProblemKind::mis), tc,
                                        opt.base_seed);
                const Assignment greedy = heuristics::greedy_mis(g);
                row.values = {{"best_set", runs.best.best_metrics.set_size},
                              {"median_set", runs.summary.median},
                              {"min_set", runs.summary.worst},
                              {"greedy_set", evaluate(greedy, g).set_size}};
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
                any_error = true;
            }
            rows.push_back(row);
        }
    } else {
        throw std::invalid_argument("unknown bench suite: " + opt.suite);
    }

    emit_bench(opt, rows);
    return any_error ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised GNN solver for QUBO-formulated graph problems"};
    app.set_config("--config", "", "Key-value config file; flags override file values");
    app.require_subcommand(1);

    // solve
    SolveOptions solve_opt;
    auto* solve = app.add_subcommand("solve", "Train the solver on one instance");
    solve->add_option("problem", solve_opt.problem, "maxcut|color|mis")->required();
    solve->add_option("--graph", solve_opt.graph_path, "Instance file (gset/plain/DIMACS)");
    solve->add_option("--gen", solve_opt.gen_spec, "Generator spec, e.g. dreg:n=500,d=5,seed=1");
    solve->add_option("--k", solve_opt.k, "Number of colors (coloring only)");
    solve->add_option("--seeds", solve_opt.seeds, "Number of independent runs");
    solve->add_option("--seed", solve_opt.base_seed, "Base seed");
    solve->add_option("--max-iters", solve_opt.max_iters, "Iteration budget per run");
    solve->add_option("--loss-window", solve_opt.loss_window,
                      "Convergence window length (shrinks for short runs)");
    solve->add_option("--hidden", solve_opt.hidden, "Hidden width (default 50, coloring 140)");
    solve->add_flag("--no-recurrent", solve_opt.no_recurrent, "Disable the recurrent feature");
    solve->add_option("--conv", solve_opt.conv, "sage|gcn");
    solve->add_option("--layers", solve_opt.layers, "both|mean|pool");
    solve->add_option("--recurrent-mode", solve_opt.recurrent_mode, "raw|prob|both");
    solve->add_option("--union", solve_opt.union_copies, "Train on k disjoint copies");
    solve->add_option("--trace", solve_opt.trace_every, "Write trace.csv every N iterations");
    solve->add_option("--best-stall", solve_opt.best_stall,
                      "Stop after N iterations without a best-solution update");
    solve->add_option("--checkpoint-every", solve_opt.checkpoint_every,
                      "Write a weight checkpoint every N iterations");
    solve->add_flag("--double", solve_opt.double_precision, "Train in double precision");
    solve->add_option("--threads", solve_opt.threads, "Worker threads (or QUBOSOLVE_THREADS)");
    solve->add_option("--out", solve_opt.out_dir, "Output directory");

    // bench
    BenchOptions bench_opt;
    auto* bench = app.add_subcommand("bench", "Benchmark suites");
    bench->add_option("suite", bench_opt.suite, "toy|dreg-pvalue|gset|color-chromatic|mis-rb")
        ->required();
    bench->add_option("--data", bench_opt.data_dir, "Instance data directory");
    bench->add_option("--only", bench_opt.only, "Run a single instance by stem name");
    bench->add_option("--out", bench_opt.out_file, "Write the summary as JSON");
    bench->add_option("--seeds", bench_opt.seeds, "Seeds per instance");
    bench->add_option("--seed", bench_opt.base_seed, "Base seed");
    bench->add_option("--graphs", bench_opt.graphs, "Generated graphs (dreg-pvalue)");
    bench->add_option("--d", bench_opt.d, "Degree (dreg-pvalue)");
    bench->add_option("--n", bench_opt.n, "Nodes (dreg-pvalue)");
    bench->add_option("--max-iters", bench_opt.max_iters, "Override the iteration budget");
    bench->add_option("--start-k", bench_opt.start_k, "First color count (color-chromatic)");
    bench->add_option("--max-k", bench_opt.max_k, "Last color count (color-chromatic)");
    bench->add_option("--threads", bench_opt.threads, "Worker threads");

    // gradcheck
    double gradcheck_step = 1e-3;
    double gradcheck_tolerance = 1e-4;
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient audit");
    gradcheck_cmd->add_option("--step", gradcheck_step, "Central-difference step");
    gradcheck_cmd->add_option("--tolerance", gradcheck_tolerance, "Max relative error");

    // generate
    std::string generate_spec;
    std::string generate_out;
    std::string generate_format = "gset";
    auto* generate = app.add_subcommand("generate", "Write a generated instance to a file");
    generate->add_option("spec", generate_spec, "Generator spec")->required();
    generate->add_option("out", generate_out, "Output path")->required();
    generate->add_option("--format", generate_format, "gset|plain");

    // baseline
    BaselineOptions baseline_opt;
    auto* baseline = app.add_subcommand("baseline", "Classical heuristics");
    baseline->add_option("algo", baseline_opt.algo, "eo|greedy")->required();
    baseline->add_option("--graph", baseline_opt.graph_path, "Instance file");
    baseline->add_option("--gen", baseline_opt.gen_spec, "Generator spec");
    baseline->add_option("--budget", baseline_opt.budget, "Single-flip updates (eo)");
    baseline->add_option("--restarts", baseline_opt.restarts, "Independent restarts (eo)");
    baseline->add_option("--tau", baseline_opt.tau, "Rank-sampling exponent (eo)");
    baseline->add_option("--seed", baseline_opt.seed, "Seed");
    baseline->add_option("--out", baseline_opt.out_dir, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return run_solve(solve_opt);
        if (*bench) return run_bench(bench_opt);
        if (*gradcheck_cmd) return run_gradcheck(gradcheck_step, gradcheck_tolerance);
        if (*generate) {
            const Graph g = generate_from_spec(generate_spec);
            serialize::write_file(generate_out,
                                  generate_format == "plain" ? to_plain(g) : to_gset(g));
            std::cout << "wrote " << generate_out << " (" << g.num_nodes() << " nodes, "
                      << g.num_edges() << " edges)\n";
            return 0;
        }
        if (*baseline) return run_baseline(baseline_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
