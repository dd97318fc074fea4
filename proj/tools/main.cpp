// equiflow command line: dataset generation, training, prediction,
// evaluation and plot-data export.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "equiflow/common.hpp"
#include "equiflow/io.hpp"
#include "equiflow/kernels.hpp"
#include "equiflow/scenarios.hpp"
#include "equiflow/training.hpp"

namespace fs = std::filesystem;
using namespace equiflow;

namespace {

// Flat JSON object as a CLI11 config source, so `--config file.json` supplies
// defaults that explicit flags override.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            input >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::FileError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            CLI::ConfigItem item;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(v.dump());
            } else if (value.is_string()) {
                item.inputs.push_back(value.get<std::string>());
            } else {
                item.inputs.push_back(value.dump());
            }
            items.push_back(std::move(item));
        }
        return items;
    }
};

struct GenerateArgs {
    std::string layout = "LE";
    std::string oracle = "easy-we";
    int agents = 30;
    int size = 6;
    int time_steps = 1;
    double epoch_duration = 180.0;
    std::uint64_t seed = 0;
    int n_train = 9, n_val = 5, n_test = 6;
    int threads = 1;
    std::string out = "dataset";
};

struct TrainArgs {
    std::string dataset;
    std::string pipeline = "cl";
    std::string out = "checkpoint.json";
    std::string log;
    std::string optimizer = "adam";
    double lr = 1e-3;
    int batch_size = 1;
    int max_epochs = 50;
    double max_wall_clock = 1800.0;
    int patience = 0;
    int samples = 16;
    double epsilon = 1.0;
    bool no_antithetic = false;
    int inference_samples = -1;
    int copies = 1;
    double we_tol = 1e-4;
    int we_max_iter = 5000;
    std::uint64_t seed = 0;
    int threads = 1;
    bool zscore = false;
};

struct PredictArgs {
    std::string checkpoint;
    std::string dataset;
    int instance = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = "prediction.csv";
};

struct EvaluateArgs {
    std::string checkpoint;
    std::string dataset;
    std::string split = "test";
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = "metrics.json";
};

struct ExportArgs {
    std::string checkpoint;
    std::string dataset;
    std::string kind = "scatter";
    int instance = -1;  // default: first test instance
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = "plots";
};

int run_generate(const GenerateArgs& a) {
    ScenarioSpec spec;
    spec.layout = parse_layout(a.layout);
    spec.oracle = parse_oracle(a.oracle);
    spec.agents = a.agents;
    spec.size = a.size;
    spec.time_steps = a.time_steps;
    spec.epoch_duration = a.epoch_duration;
    spec.seed = a.seed;
    spec.n_train = a.n_train;
    spec.n_val = a.n_val;
    spec.n_test = a.n_test;
    if (spec.time_steps < 1) throw UsageError("--time-steps must be at least 1");
    build_dataset(spec, a.out, a.threads);
    std::cout << (fs::path(a.out) / "manifest.json").string() << "\n";
    return 0;
}

int run_train(const TrainArgs& a) {
    if (a.dataset.empty()) throw UsageError("--dataset is required");
    if (a.max_epochs < 1) throw UsageError("--max-epochs must be at least 1");
    Dataset ds = load_dataset(a.dataset);
    TrainConfig cfg;
    cfg.pipeline = parse_pipeline(a.pipeline);
    cfg.optimizer = a.optimizer;
    cfg.lr = a.lr;
    cfg.batch_size = a.batch_size;
    cfg.max_epochs = a.max_epochs;
    cfg.max_wall_clock_s = a.max_wall_clock;
    cfg.patience = a.patience;
    cfg.perturb.samples = a.samples;
    cfg.perturb.epsilon = a.epsilon;
    cfg.perturb.antithetic = !a.no_antithetic;
    cfg.inference_samples = a.inference_samples;
    cfg.copies = a.copies;
    cfg.we_tol = a.we_tol;
    cfg.we_max_iter = a.we_max_iter;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    cfg.zscore = a.zscore;

    TrainResult res = train(ds, cfg);
    save_checkpoint(res.bundle, a.out);
    if (!a.log.empty()) save_train_log(res.log, a.log);
    std::cout << "checkpoint: " << a.out << "\nbest validation MAE: " << res.bundle.best_val_mae
              << "\nskipped steps: " << res.skipped_steps << "\n";
    return 0;
}

int run_predict(const PredictArgs& a) {
    ModelBundle bundle = load_checkpoint(a.checkpoint);
    Dataset ds = load_dataset(a.dataset);
    if (a.instance < 0 || a.instance >= static_cast<int>(ds.instances.size()))
        throw DataError("--instance out of range");
    const Instance& inst = ds.instances[a.instance];
    PredictResult pr = predict(bundle, inst, a.seed, a.threads);
    io::save_flow_csv(pr.report, inst.net.num_arcs(), inst.time_steps, a.out);
    std::cout << a.out << "\n";
    return 0;
}

const std::vector<int>& pick_split(const Dataset& ds, const std::string& name) {
    if (name == "train") return ds.train_idx;
    if (name == "val" || name == "validation") return ds.val_idx;
    if (name == "test") return ds.test_idx;
    throw UsageError("--split must be train, val or test");
}

int run_evaluate(const EvaluateArgs& a) {
    ModelBundle bundle = load_checkpoint(a.checkpoint);
    Dataset ds = load_dataset(a.dataset);
    const std::vector<int>& idx = pick_split(ds, a.split);
    const std::vector<EvalRecord> recs = evaluate_split(bundle, ds, idx, a.seed, a.threads);

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["split"] = a.split;
    j["pipeline"] = to_string(bundle.pipeline);
    double mean = 0.0, wall = 0.0;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const EvalRecord& r : recs) {
        per.push_back({{"index", r.index},
                       {"mae", r.mae},
                       {"conservation_residual", r.conservation_residual},
                       {"capacity_excess", r.capacity_excess},
                       {"wall_clock_s", r.wall_clock_s}});
        mean += r.mae;
        wall += r.wall_clock_s;
    }
    j["per_instance"] = std::move(per);
    j["mean_mae"] = mean / static_cast<double>(recs.size());
    j["total_wall_clock_s"] = wall;
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw DataError("cannot write " + a.out);
    out << j.dump(2) << "\n";
    std::cout << a.out << "\nmean MAE (" << a.split << "): " << j["mean_mae"].dump() << "\n";
    return 0;
}

int run_export(const ExportArgs& a) {
    ModelBundle bundle = load_checkpoint(a.checkpoint);
    Dataset ds = load_dataset(a.dataset);
    const int index = a.instance >= 0 ? a.instance
                                      : (ds.test_idx.empty() ? 0 : ds.test_idx.front());
    if (index < 0 || index >= static_cast<int>(ds.instances.size()))
        throw DataError("--instance out of range");
    const Instance& inst = ds.instances[index];
    const std::vector<double>& target = ds.targets[index];
    PredictResult pr = predict(bundle, inst, a.seed, a.threads);
    fs::create_directories(a.out);

    const int T = inst.time_steps;
    const int na = inst.net.num_arcs();
    if (a.kind == "scatter") {
        std::ofstream out(fs::path(a.out) / "scatter.csv");
        out << "target,predicted\n";
        for (std::size_t i = 0; i < target.size(); ++i)
            out << target[i] << ',' << pr.report[i] << '\n';
        std::cout << (fs::path(a.out) / "scatter.csv").string() << "\n";
    } else if (a.kind == "flow-map") {
        // per base arc, aggregated over epochs for time-variant data
        std::vector<double> pred_arc(na, 0.0), tgt_arc(na, 0.0);
        for (int arc = 0; arc < na; ++arc)
            for (int t = 0; t < T; ++t) {
                pred_arc[arc] += pr.report[static_cast<std::size_t>(arc) * T + t];
                tgt_arc[arc] += target[static_cast<std::size_t>(arc) * T + t];
            }
        std::ofstream out(fs::path(a.out) / "flow_map.csv");
        out << "arc_id,x_tail,y_tail,x_head,y_head,predicted,target\n";
        for (const Arc& arc : inst.net.arcs) {
            const Vertex& u = inst.net.vertices[arc.tail];
            const Vertex& v = inst.net.vertices[arc.head];
            out << arc.id << ',' << u.x << ',' << u.y << ',' << v.x << ',' << v.y << ','
                << pred_arc[arc.id] << ',' << tgt_arc[arc.id] << '\n';
        }
        std::cout << (fs::path(a.out) / "flow_map.csv").string() << "\n";
    } else if (a.kind == "time-matrix") {
        if (T <= 1) throw DataError("time-matrix export needs a time-variant dataset");
        std::ofstream out(fs::path(a.out) / "time_matrix.csv");
        out << "arc_id,epoch,flow\n";
        for (int arc = 0; arc < na; ++arc)
            for (int t = 0; t < T; ++t)
                out << arc << ',' << t << ',' << pr.report[static_cast<std::size_t>(arc) * T + t]
                    << '\n';
        std::cout << (fs::path(a.out) / "time_matrix.csv").string() << "\n";
    } else {
        throw UsageError("--kind must be flow-map, scatter or time-matrix");
    }
    return 0;
}

void add_common(CLI::App* cmd, std::uint64_t& seed, int& threads) {
    cmd->add_option("--seed", seed, "master random seed");
    cmd->add_option("--threads", threads, "worker threads (1 = bit-reproducible)");
    cmd->config_formatter(std::make_shared<JsonConfig>());
    cmd->set_config("--config", "", "JSON config file; explicit flags win");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"traffic equilibrium flow prediction with learned latency functions"};
    app.require_subcommand(1);

    GenerateArgs g;
    CLI::App* gen = app.add_subcommand("generate", "generate a scenario dataset with oracle targets");
    gen->add_option("--layout", g.layout, "HE, LE, LEU, HEU or SW");
    gen->add_option("--oracle", g.oracle, "easy-mcfp, easy-we, random-mcfp or random-we");
    gen->add_option("--agents", g.agents, "planned trips (morning+evening), even");
    gen->add_option("--size", g.size, "grid side length");
    gen->add_option("--time-steps", g.time_steps, "epochs T (1 = static)");
    gen->add_option("--epoch-duration", g.epoch_duration, "epoch length in seconds");
    gen->add_option("--n-train", g.n_train);
    gen->add_option("--n-val", g.n_val);
    gen->add_option("--n-test", g.n_test);
    gen->add_option("--out", g.out, "output directory");
    add_common(gen, g.seed, g.threads);

    TrainArgs t;
    CLI::App* tr = app.add_subcommand("train", "train a pipeline or the FNN baseline");
    tr->add_option("--dataset", t.dataset, "dataset directory")->required();
    tr->add_option("--pipeline", t.pipeline, "fnn-baseline, cl, pl or er");
    tr->add_option("--out", t.out, "checkpoint path");
    tr->add_option("--log", t.log, "training log CSV path");
    tr->add_option("--optimizer", t.optimizer, "adam or sgd");
    tr->add_option("--lr", t.lr, "learning rate");
    tr->add_option("--batch-size", t.batch_size, "instances per optimizer step");
    tr->add_option("--max-epochs", t.max_epochs);
    tr->add_option("--max-wall-clock", t.max_wall_clock, "seconds");
    tr->add_option("--patience", t.patience, "early-stopping patience (0 = off)");
    tr->add_option("--samples", t.samples, "perturbation samples M (0 = unperturbed)");
    tr->add_option("--epsilon", t.epsilon, "perturbation amplitude");
    tr->add_flag("--no-antithetic", t.no_antithetic, "disable antithetic sampling");
    tr->add_option("--inference-samples", t.inference_samples, "M at prediction time (-1 = training M)");
    tr->add_option("--copies", t.copies, "extended-network parallel copies (CL)");
    tr->add_option("--we-tol", t.we_tol, "relative WE gap for PL solves");
    tr->add_option("--we-max-iter", t.we_max_iter);
    tr->add_flag("--zscore", t.zscore, "z-score feature standardization");
    add_common(tr, t.seed, t.threads);

    PredictArgs p;
    CLI::App* pr = app.add_subcommand("predict", "predict flows for one instance");
    pr->add_option("--checkpoint", p.checkpoint)->required();
    pr->add_option("--dataset", p.dataset)->required();
    pr->add_option("--instance", p.instance, "instance index");
    pr->add_option("--out", p.out, "flow CSV path");
    add_common(pr, p.seed, p.threads);

    EvaluateArgs e;
    CLI::App* ev = app.add_subcommand("evaluate", "MAE and checks over a split");
    ev->add_option("--checkpoint", e.checkpoint)->required();
    ev->add_option("--dataset", e.dataset)->required();
    ev->add_option("--split", e.split, "train, val or test");
    ev->add_option("--out", e.out, "metrics JSON path");
    add_common(ev, e.seed, e.threads);

    ExportArgs x;
    CLI::App* ex = app.add_subcommand("export-plot", "CSV exports for external plotting");
    ex->add_option("--checkpoint", x.checkpoint)->required();
    ex->add_option("--dataset", x.dataset)->required();
    ex->add_option("--kind", x.kind, "flow-map, scatter or time-matrix");
    ex->add_option("--instance", x.instance, "instance index (default: first test instance)");
    ex->add_option("--out", x.out, "output directory");
    add_common(ex, x.seed, x.threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return run_generate(g);
        if (tr->parsed()) return run_train(t);
        if (pr->parsed()) return run_predict(p);
        if (ev->parsed()) return run_evaluate(e);
        if (ex->parsed()) return run_export(x);
        return 2;
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return 2;
    } catch (const SolverError& err) {
        std::cerr << "solver error: " << err.what() << "\n";
        return 4;
    } catch (const DataError& err) {
        std::cerr << "data error: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    }
}
