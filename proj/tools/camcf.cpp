// camcf command line: select, eval, synth.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "camcf/camcf.hpp"

namespace fs = std::filesystem;
using namespace camcf;

namespace {

struct SelectArgs {
    std::string data;
    std::string labels;
    std::string label_prefix;
    std::string out;
    CamcfConfig config;
    std::size_t bins = 5;
    std::size_t max_cond = 0;
    bool adaptive = false;
    bool no_timings = false;
};

struct EvalArgs {
    std::optional<double> split;
    std::optional<std::size_t> cv;
    std::size_t knn = 10;
    double smoothing = 1.0;
    bool grid = false;
};

struct SynthArgs {
    std::size_t features = 12;
    std::size_t label_nodes = 3;
    double edge_prob = 0.2;
    std::size_t samples = 5000;
    std::uint64_t seed = 0;
    Code arity = 2;
    bool strong = false;
    double strength = 0.9;
    std::string out_dir;
};

void add_select_options(CLI::App* cmd, SelectArgs& a)
{
    cmd->add_option("--data", a.data, "dataset path (.csv or .arff)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--labels", a.labels, "label columns: a count (last N columns) or comma-separated names");
    cmd->add_option("--label-prefix", a.label_prefix, "label columns are those whose name starts with this");
    cmd->add_option("--out", a.out, "report path")->required();
    cmd->add_option("--delta1", a.config.delta1, "feature-to-category threshold");
    cmd->add_option("--delta2", a.config.delta2, "category-to-category threshold");
    cmd->add_option("--k1", a.config.k1_fraction, "PC candidate fraction of M");
    cmd->add_option("--k2", a.config.k2_fraction, "final CMB fraction of M");
    cmd->add_option("--gamma", a.config.gamma, "cross-label redundancy factor");
    cmd->add_option("--bins", a.bins, "equal-frequency bins for continuous features");
    cmd->add_option("--threads", a.config.threads, "worker threads over target categories");
    cmd->add_option("--seed", a.config.seed, "random seed");
    cmd->add_option("--min-support", a.config.min_category_support, "minimum rows for a target category");
    cmd->add_option("--max-cond", a.max_cond, "cap on conditioning-set size (0 = none)");
    cmd->add_flag("--adaptive-thresholds", a.adaptive, "per-category quantile threshold for delta1");
    cmd->add_flag("--dedup-binary", a.config.dedup_binary, "process only category 1 of binary labels");
    cmd->add_flag("--no-timings", a.no_timings, "write zero timings so reports compare byte for byte");
}

io::Ingested ingest(const SelectArgs& a)
{
    io::LabelSelection sel;
    if (!a.labels.empty()) sel = io::LabelSelection::parse(a.labels);
    if (!a.label_prefix.empty()) {
        if (!sel.empty()) throw CLI::ValidationError("--labels and --label-prefix are mutually exclusive");
        sel.prefix = a.label_prefix;
    }
    io::IngestOptions opts;
    opts.bins = a.bins;
    return io::load_dataset(a.data, sel, opts);
}

CamcfConfig finish_config(const SelectArgs& a)
{
    CamcfConfig c = a.config;
    if (a.adaptive) c.threshold_mode = ThresholdMode::quantile_adaptive;
    if (a.max_cond > 0) c.max_conditioning_size = a.max_cond;
    c.validate();
    return c;
}

report::RunReport base_report(const std::string& command, const SelectArgs& a, const io::Ingested& in,
                              const CamcfConfig& c)
{
    report::RunReport r;
    r.command = command;
    const auto& ds = in.dataset;
    r.dataset.path = a.data;
    r.dataset.fingerprint = report::fingerprint(ds);
    r.dataset.n_samples = ds.n_samples();
    r.dataset.n_features = ds.n_features();
    r.dataset.n_labels = ds.n_labels();
    r.dataset.feature_names = ds.feature_names();
    r.dataset.label_names = ds.label_names();
    r.dataset.discretized_features = in.discretized_features;
    r.config = report::echo(c, a.bins);
    return r;
}

void write_report(const std::string& path, const report::RunReport& r)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open report for writing: " + path);
    os << report::dump(r);
    if (!os) throw Error("failed writing report: " + path);
}

double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int run_select(const SelectArgs& a)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto in = ingest(a);
    const auto config = finish_config(a);
    const auto sel = run_camcf(in.dataset, config);
    auto r = base_report("select", a, in, config);
    report::fill_selection(r, in.dataset, sel, !a.no_timings);
    if (!a.no_timings) r.timings.total_ms = ms_since(t0);
    write_report(a.out, r);
    std::cout << "selected " << r.selected.size() << " of " << in.dataset.n_features() << " features\n";
    return 0;
}

int run_eval(const SelectArgs& a, const EvalArgs& e)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto in = ingest(a);
    auto config = finish_config(a);

    eval::EvalOptions opts;
    opts.knn = e.knn;
    opts.smoothing = e.smoothing;
    opts.seed = config.seed;
    if (e.cv) opts.folds = *e.cv;
    if (e.split) opts.train_fraction = *e.split;

    std::vector<eval::FoldOutcome> folds;
    std::size_t grid_points = 0;
    if (e.grid) {
        auto g = eval::grid_search(in.dataset, config, eval::Grid{}, opts);
        config = g.best;
        folds = std::move(g.best_folds);
        grid_points = g.evaluated;
    } else {
        folds = eval::evaluate_selection(in.dataset, config, opts);
    }

    // The reported selection is the one made on the full data with the final configuration.
    const auto sel = run_camcf(in.dataset, config);
    auto r = base_report("eval", a, in, config);
    report::fill_selection(r, in.dataset, sel, !a.no_timings);

    report::Evaluation ev;
    ev.protocol = opts.folds > 0 ? "cv" : "split";
    ev.train_fraction = opts.folds > 0 ? 0.0 : opts.train_fraction;
    ev.folds = opts.folds > 0 ? opts.folds : 1;
    ev.knn = opts.knn;
    ev.smoothing = opts.smoothing;
    ev.seed = opts.seed;
    ev.grid_points = grid_points;
    for (const auto& f : folds) ev.per_fold.push_back({f.fold, f.n_train, f.n_test, f.selected, f.report});
    ev.mean = eval::mean_of(folds);
    r.evaluation = ev;
    if (!a.no_timings) r.timings.total_ms = ms_since(t0);
    write_report(a.out, r);
    std::cout << "hamming_loss " << ev.mean.hamming_loss << " macro_f1 " << ev.mean.macro_f1 << " selected "
              << r.selected.size() << "\n";
    return 0;
}

int run_synth(const SynthArgs& s)
{
    synth::DagOptions opts;
    opts.mode = s.strong ? synth::CptMode::strong_edge : synth::CptMode::dirichlet;
    opts.strength = s.strength;
    const auto bn = synth::generate_dag(s.features, s.label_nodes, s.edge_prob, s.arity, s.seed, opts);
    const auto ds = synth::forward_sample(bn, s.samples, s.seed + 1);

    fs::create_directories(s.out_dir);
    const auto dir = fs::path(s.out_dir);
    {
        std::ofstream os(dir / "bn.txt");
        if (!os) throw Error("cannot write " + (dir / "bn.txt").string());
        synth::write_bn(os, bn);
    }
    io::save_csv((dir / "data.csv").string(), ds);

    nlohmann::json mb = nlohmann::json::object();
    for (auto v : bn.nodes_of_kind(synth::NodeKind::label)) {
        const auto cols = synth::true_markov_blanket(bn, v);
        std::vector<std::string> names;
        for (auto c : cols) names.push_back(ds.feature_names()[c]);
        mb[bn.nodes[v].name] = {{"features", cols}, {"names", names}};
    }
    std::ofstream os(dir / "markov_blankets.json");
    if (!os) throw Error("cannot write " + (dir / "markov_blankets.json").string());
    os << mb.dump(2) << "\n";
    std::cout << "wrote " << bn.size() << "-node network and " << ds.n_samples() << " samples to " << s.out_dir
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"category-level causal feature selection for multi-label data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", report::kToolVersion);

    SelectArgs sel_args;
    auto* sel = app.add_subcommand("select", "run feature selection and write a report");
    add_select_options(sel, sel_args);

    SelectArgs ev_args;
    EvalArgs ev;
    auto* evc = app.add_subcommand("eval", "select on training rows, score ML-kNN on test rows");
    add_select_options(evc, ev_args);
    auto* split_opt = evc->add_option("--split", ev.split, "hold-out training fraction (default 0.7)");
    auto* cv_opt = evc->add_option("--cv", ev.cv, "number of cross-validation folds");
    split_opt->excludes(cv_opt);
    evc->add_option("--knn", ev.knn, "neighbours for ML-kNN");
    evc->add_option("--smoothing", ev.smoothing, "Laplace smoothing for ML-kNN");
    evc->add_flag("--grid", ev.grid, "grid-search delta1, delta2, k1, k2 before reporting");

    SynthArgs sy;
    auto* syc = app.add_subcommand("synth", "generate a random network, a sample and its Markov blankets");
    syc->add_option("--features", sy.features, "feature nodes")->capture_default_str();
    syc->add_option("--label-nodes", sy.label_nodes, "label nodes")->capture_default_str();
    syc->add_option("--edge-prob", sy.edge_prob, "probability of each forward edge")->capture_default_str();
    syc->add_option("--samples", sy.samples, "rows to sample")->capture_default_str();
    syc->add_option("--seed", sy.seed, "seed for structure, CPTs and sampling")->capture_default_str();
    syc->add_option("--arity", sy.arity, "values per feature node")->capture_default_str();
    syc->add_flag("--strong", sy.strong, "strong-edge CPTs instead of Dirichlet(1) rows");
    syc->add_option("--strength", sy.strength, "mass on the preferred value in strong-edge mode")->capture_default_str();
    syc->add_option("--out-dir", sy.out_dir, "writes bn.txt, data.csv, markov_blankets.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sel) return run_select(sel_args);
        if (*evc) return run_eval(ev_args, ev);
        if (*syc) return run_synth(sy);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
