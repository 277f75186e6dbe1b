#pragma once

// Run report: one self-describing JSON document per run. Parsing is strict:
// unknown or missing fields are rejected, so a report round-trips exactly.

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "camcf/dataset.hpp"
#include "camcf/error.hpp"
#include "camcf/metrics.hpp"
#include "camcf/pipeline.hpp"
#include "camcf/protocol.hpp"

namespace camcf::report {

using nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

struct SkeletonEntry {
    std::size_t label_index = 0;
    Code category_value = 0;
    double score = 0.0;
    friend bool operator==(const SkeletonEntry&, const SkeletonEntry&) = default;
};

struct CategoryReport {
    std::size_t label_index = 0;
    std::string label_name;
    Code category_value = 0;
    std::size_t support = 0;
    double delta1 = 0.0;
    std::vector<SkeletonEntry> skeleton;
    std::vector<SkeletonEntry> pruned_skeleton;
    std::vector<std::size_t> pc, sp, recovered, final_cmb;
    std::array<std::vector<std::size_t>, kPhaseCount> phase_sets;
    std::array<double, kPhaseCount> phase_ms{};
    std::array<std::size_t, kPhaseCount> ci_tests{};
    std::size_t capped_conditioning = 0;
    friend bool operator==(const CategoryReport&, const CategoryReport&) = default;
};

struct SkippedReport {
    std::size_t label_index = 0;
    Code category_value = 0;
    std::size_t support = 0;
    std::string reason;
    friend bool operator==(const SkippedReport&, const SkippedReport&) = default;
};

struct DatasetInfo {
    std::string path;
    std::string fingerprint;
    std::size_t n_samples = 0, n_features = 0, n_labels = 0;
    std::vector<std::string> feature_names, label_names;
    std::vector<std::size_t> discretized_features;
    friend bool operator==(const DatasetInfo&, const DatasetInfo&) = default;
};

struct ConfigEcho {
    double delta1 = 0, delta2 = 0, k1 = 0, k2 = 0, gamma = 0;
    std::string threshold_mode;
    double adaptive_quantile = 0;
    std::size_t min_category_support = 0;
    bool dedup_binary = false;
    std::uint64_t seed = 0;
    std::optional<std::size_t> max_conditioning_size;
    std::size_t threads = 1;
    std::size_t bins = 0;
    friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

struct FoldReport {
    std::size_t fold = 0, n_train = 0, n_test = 0;
    std::vector<std::size_t> selected;
    eval::EvalReport metrics;
    friend bool operator==(const FoldReport& a, const FoldReport& b)
    {
        return a.fold == b.fold && a.n_train == b.n_train && a.n_test == b.n_test && a.selected == b.selected &&
               metrics_equal(a.metrics, b.metrics);
    }
    static bool metrics_equal(const eval::EvalReport& a, const eval::EvalReport& b)
    {
        return a.hamming_loss == b.hamming_loss && a.subset_accuracy == b.subset_accuracy &&
               a.average_precision == b.average_precision && a.coverage_raw == b.coverage_raw &&
               a.coverage_normalized == b.coverage_normalized && a.ranking_loss == b.ranking_loss &&
               a.macro_f1 == b.macro_f1 && a.micro_f1 == b.micro_f1 &&
               a.excluded_no_relevant == b.excluded_no_relevant &&
               a.excluded_ranking_loss == b.excluded_ranking_loss && a.degenerate_labels == b.degenerate_labels;
    }
};

struct Evaluation {
    std::string protocol;  // "split" or "cv"
    double train_fraction = 0;
    std::size_t folds = 0;
    std::size_t knn = 0;
    double smoothing = 0;
    std::uint64_t seed = 0;
    std::size_t grid_points = 0;  // 0 when no grid search ran
    std::vector<FoldReport> per_fold;
    eval::EvalReport mean;
    friend bool operator==(const Evaluation& a, const Evaluation& b)
    {
        return a.protocol == b.protocol && a.train_fraction == b.train_fraction && a.folds == b.folds &&
               a.knn == b.knn && a.smoothing == b.smoothing && a.seed == b.seed && a.grid_points == b.grid_points &&
               a.per_fold == b.per_fold && FoldReport::metrics_equal(a.mean, b.mean);
    }
};

struct Timings {
    double total_ms = 0;
    std::array<double, kPhaseCount> phase_ms{};
    friend bool operator==(const Timings&, const Timings&) = default;
};

struct RunReport {
    std::string tool = "camcf";
    std::string version = kToolVersion;
    int schema_version = kSchemaVersion;
    std::string command;
    DatasetInfo dataset;
    ConfigEcho config;
    std::vector<CategoryReport> categories;
    std::vector<SkippedReport> skipped;
    std::vector<std::size_t> selected;
    std::vector<std::string> selected_names;
    std::array<std::vector<std::size_t>, kPhaseCount> phase_snapshots;
    Timings timings;
    std::optional<Evaluation> evaluation;
    friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// 64-bit FNV-1a over shape, names and codes; hex encoded.
inline std::string fingerprint(const Dataset& ds)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_bytes = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    auto mix_u64 = [&](std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        mix_bytes(b, 8);
    };
    mix_u64(ds.n_samples());
    mix_u64(ds.n_features());
    mix_u64(ds.n_labels());
    auto mix_cols = [&](const std::vector<DiscreteColumn>& cols, const std::vector<std::string>& names) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            mix_u64(names[j].size());
            mix_bytes(names[j].data(), names[j].size());
            mix_u64(cols[j].arity);
            for (Code c : cols[j].codes) mix_u64(c);
        }
    };
    mix_cols(ds.features(), ds.feature_names());
    mix_cols(ds.labels(), ds.label_names());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline ConfigEcho echo(const CamcfConfig& c, std::size_t bins)
{
    ConfigEcho e;
    e.delta1 = c.delta1;
    e.delta2 = c.delta2;
    e.k1 = c.k1_fraction;
    e.k2 = c.k2_fraction;
    e.gamma = c.gamma;
    e.threshold_mode = c.threshold_mode == ThresholdMode::absolute ? "absolute" : "quantile-adaptive";
    e.adaptive_quantile = c.adaptive_quantile;
    e.min_category_support = c.min_category_support;
    e.dedup_binary = c.dedup_binary;
    e.seed = c.seed;
    e.max_conditioning_size = c.max_conditioning_size;
    e.threads = c.threads;
    e.bins = bins;
    return e;
}

inline std::vector<SkeletonEntry> skeleton_entries(const LabelSkeleton& s)
{
    std::vector<SkeletonEntry> out;
    for (const auto& m : s.members) out.push_back({m.key.label_index, m.key.category_value, m.score});
    return out;
}

/// Fills the selection part of a report. Timings are zeroed when `with_timings` is false.
inline void fill_selection(RunReport& r, const Dataset& ds, const SelectionResult& sel, bool with_timings)
{
    r.categories.clear();
    r.timings = {};
    for (const auto& [key, hood] : sel.per_category) {
        CategoryReport c;
        c.label_index = key.label_index;
        c.label_name = ds.label_names().at(key.label_index);
        c.category_value = key.category_value;
        c.support = hood.support;
        c.delta1 = hood.delta1;
        c.skeleton = skeleton_entries(hood.skeleton);
        c.pruned_skeleton = skeleton_entries(hood.pruned_skeleton);
        c.pc = hood.pc;
        c.sp = hood.sp;
        c.recovered = hood.recovered;
        c.final_cmb = hood.final_cmb;
        c.phase_sets = hood.trace.phase_sets;
        c.ci_tests = hood.trace.ci_tests;
        c.capped_conditioning = hood.trace.capped_conditioning;
        if (with_timings) {
            c.phase_ms = hood.trace.duration_ms;
            for (std::size_t p = 0; p < kPhaseCount; ++p) r.timings.phase_ms[p] += hood.trace.duration_ms[p];
        }
        r.categories.push_back(std::move(c));
    }
    r.skipped.clear();
    for (const auto& s : sel.skipped) {
        r.skipped.push_back({s.key.label_index, s.key.category_value, s.support, s.reason});
    }
    r.selected = sel.global_selected;
    r.selected_names.clear();
    for (auto f : sel.global_selected) r.selected_names.push_back(ds.feature_names().at(f));
    r.phase_snapshots = sel.per_phase_snapshots;
}

// --- JSON --------------------------------------------------------------------

inline json to_json(const eval::EvalReport& m)
{
    return json{{"hamming_loss", m.hamming_loss},
                {"subset_accuracy", m.subset_accuracy},
                {"average_precision", m.average_precision},
                {"coverage_raw", m.coverage_raw},
                {"coverage_normalized", m.coverage_normalized},
                {"ranking_loss", m.ranking_loss},
                {"macro_f1", m.macro_f1},
                {"micro_f1", m.micro_f1},
                {"excluded_no_relevant", m.excluded_no_relevant},
                {"excluded_ranking_loss", m.excluded_ranking_loss},
                {"degenerate_labels", m.degenerate_labels}};
}

inline json to_json(const std::vector<SkeletonEntry>& s)
{
    json a = json::array();
    for (const auto& e : s) {
        a.push_back({{"label_index", e.label_index}, {"category_value", e.category_value}, {"score", e.score}});
    }
    return a;
}

inline json to_json(const RunReport& r)
{
    json j;
    j["tool"] = r.tool;
    j["version"] = r.version;
    j["schema_version"] = r.schema_version;
    j["command"] = r.command;
    const auto& d = r.dataset;
    j["dataset"] = {{"path", d.path},
                    {"fingerprint", d.fingerprint},
                    {"n_samples", d.n_samples},
                    {"n_features", d.n_features},
                    {"n_labels", d.n_labels},
                    {"feature_names", d.feature_names},
                    {"label_names", d.label_names},
                    {"discretized_features", d.discretized_features}};
    const auto& c = r.config;
    j["config"] = {{"delta1", c.delta1},
                   {"delta2", c.delta2},
                   {"k1", c.k1},
                   {"k2", c.k2},
                   {"gamma", c.gamma},
                   {"threshold_mode", c.threshold_mode},
                   {"adaptive_quantile", c.adaptive_quantile},
                   {"min_category_support", c.min_category_support},
                   {"dedup_binary", c.dedup_binary},
                   {"seed", c.seed},
                   {"max_conditioning_size",
                    c.max_conditioning_size ? json(*c.max_conditioning_size) : json(nullptr)},
                   {"threads", c.threads},
                   {"bins", c.bins}};
    j["categories"] = json::array();
    for (const auto& cat : r.categories) {
        j["categories"].push_back({{"label_index", cat.label_index},
                                   {"label_name", cat.label_name},
                                   {"category_value", cat.category_value},
                                   {"support", cat.support},
                                   {"delta1", cat.delta1},
                                   {"skeleton", to_json(cat.skeleton)},
                                   {"pruned_skeleton", to_json(cat.pruned_skeleton)},
                                   {"pc", cat.pc},
                                   {"sp", cat.sp},
                                   {"recovered", cat.recovered},
                                   {"final_cmb", cat.final_cmb},
                                   {"phase_sets", cat.phase_sets},
                                   {"phase_ms", cat.phase_ms},
                                   {"ci_tests", cat.ci_tests},
                                   {"capped_conditioning", cat.capped_conditioning}});
    }
    j["skipped"] = json::array();
    for (const auto& s : r.skipped) {
        j["skipped"].push_back({{"label_index", s.label_index},
                                {"category_value", s.category_value},
                                {"support", s.support},
                                {"reason", s.reason}});
    }
    j["selected"] = r.selected;
    j["selected_names"] = r.selected_names;
    j["phase_snapshots"] = r.phase_snapshots;
    j["timings"] = {{"total_ms", r.timings.total_ms}, {"phase_ms", r.timings.phase_ms}};
    if (r.evaluation) {
        const auto& e = *r.evaluation;
        json folds = json::array();
        for (const auto& f : e.per_fold) {
            folds.push_back({{"fold", f.fold},
                             {"n_train", f.n_train},
                             {"n_test", f.n_test},
                             {"selected", f.selected},
                             {"metrics", to_json(f.metrics)}});
        }
        j["evaluation"] = {{"protocol", e.protocol},
                           {"train_fraction", e.train_fraction},
                           {"folds", e.folds},
                           {"knn", e.knn},
                           {"smoothing", e.smoothing},
                           {"seed", e.seed},
                           {"grid_points", e.grid_points},
                           {"per_fold", folds},
                           {"mean", to_json(e.mean)}};
    } else {
        j["evaluation"] = nullptr;
    }
    return j;
}

namespace detail {

inline void expect_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where)
{
    if (!j.is_object()) throw Error("report: '" + where + "' must be an object");
    std::set<std::string> want(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
        if (!want.count(k)) throw Error("report: unknown field '" + where + "." + k + "'");
    }
    for (const auto& k : want) {
        if (!j.contains(k)) throw Error("report: missing field '" + where + "." + k + "'");
    }
}

template <class T>
T get(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(std::string("report: bad field '") + key + "': " + e.what());
    }
}

inline eval::EvalReport metrics_from(const json& j)
{
    expect_keys(j,
                {"hamming_loss", "subset_accuracy", "average_precision", "coverage_raw", "coverage_normalized",
                 "ranking_loss", "macro_f1", "micro_f1", "excluded_no_relevant", "excluded_ranking_loss",
                 "degenerate_labels"},
                "metrics");
    eval::EvalReport m;
    m.hamming_loss = get<double>(j, "hamming_loss");
    m.subset_accuracy = get<double>(j, "subset_accuracy");
    m.average_precision = get<double>(j, "average_precision");
    m.coverage_raw = get<double>(j, "coverage_raw");
    m.coverage_normalized = get<double>(j, "coverage_normalized");
    m.ranking_loss = get<double>(j, "ranking_loss");
    m.macro_f1 = get<double>(j, "macro_f1");
    m.micro_f1 = get<double>(j, "micro_f1");
    m.excluded_no_relevant = get<std::size_t>(j, "excluded_no_relevant");
    m.excluded_ranking_loss = get<std::size_t>(j, "excluded_ranking_loss");
    m.degenerate_labels = get<std::size_t>(j, "degenerate_labels");
    return m;
}

inline std::vector<SkeletonEntry> skeleton_from(const json& j)
{
    if (!j.is_array()) throw Error("report: skeleton must be an array");
    std::vector<SkeletonEntry> out;
    for (const auto& e : j) {
        expect_keys(e, {"label_index", "category_value", "score"}, "skeleton");
        out.push_back({get<std::size_t>(e, "label_index"), get<Code>(e, "category_value"), get<double>(e, "score")});
    }
    return out;
}

} // namespace detail

inline RunReport from_json(const json& j)
{
    using detail::expect_keys;
    using detail::get;
    expect_keys(j,
                {"tool", "version", "schema_version", "command", "dataset", "config", "categories", "skipped",
                 "selected", "selected_names", "phase_snapshots", "timings", "evaluation"},
                "report");
    RunReport r;
    r.tool = get<std::string>(j, "tool");
    if (r.tool != "camcf") throw Error("report: not a camcf report (tool '" + r.tool + "')");
    r.version = get<std::string>(j, "version");
    r.schema_version = get<int>(j, "schema_version");
    if (r.schema_version != kSchemaVersion) {
        throw Error("report: unsupported schema version " + std::to_string(r.schema_version));
    }
    r.command = get<std::string>(j, "command");

    const auto& d = j.at("dataset");
    expect_keys(d,
                {"path", "fingerprint", "n_samples", "n_features", "n_labels", "feature_names", "label_names",
                 "discretized_features"},
                "dataset");
    r.dataset.path = get<std::string>(d, "path");
    r.dataset.fingerprint = get<std::string>(d, "fingerprint");
    r.dataset.n_samples = get<std::size_t>(d, "n_samples");
    r.dataset.n_features = get<std::size_t>(d, "n_features");
    r.dataset.n_labels = get<std::size_t>(d, "n_labels");
    r.dataset.feature_names = get<std::vector<std::string>>(d, "feature_names");
    r.dataset.label_names = get<std::vector<std::string>>(d, "label_names");
    r.dataset.discretized_features = get<std::vector<std::size_t>>(d, "discretized_features");

    const auto& c = j.at("config");
    expect_keys(c,
                {"delta1", "delta2", "k1", "k2", "gamma", "threshold_mode", "adaptive_quantile",
                 "min_category_support", "dedup_binary", "seed", "max_conditioning_size", "threads", "bins"},
                "config");
    r.config.delta1 = get<double>(c, "delta1");
    r.config.delta2 = get<double>(c, "delta2");
    r.config.k1 = get<double>(c, "k1");
    r.config.k2 = get<double>(c, "k2");
    r.config.gamma = get<double>(c, "gamma");
    r.config.threshold_mode = get<std::string>(c, "threshold_mode");
    r.config.adaptive_quantile = get<double>(c, "adaptive_quantile");
    r.config.min_category_support = get<std::size_t>(c, "min_category_support");
    r.config.dedup_binary = get<bool>(c, "dedup_binary");
    r.config.seed = get<std::uint64_t>(c, "seed");
    if (!c.at("max_conditioning_size").is_null()) {
        r.config.max_conditioning_size = get<std::size_t>(c, "max_conditioning_size");
    }
    r.config.threads = get<std::size_t>(c, "threads");
    r.config.bins = get<std::size_t>(c, "bins");

    for (const auto& cat : j.at("categories")) {
        expect_keys(cat,
                    {"label_index", "label_name", "category_value", "support", "delta1", "skeleton",
                     "pruned_skeleton", "pc", "sp", "recovered", "final_cmb", "phase_sets", "phase_ms", "ci_tests",
                     "capped_conditioning"},
                    "categories[]");
        CategoryReport cr;
        cr.label_index = get<std::size_t>(cat, "label_index");
        cr.label_name = get<std::string>(cat, "label_name");
        cr.category_value = get<Code>(cat, "category_value");
        cr.support = get<std::size_t>(cat, "support");
        cr.delta1 = get<double>(cat, "delta1");
        cr.skeleton = detail::skeleton_from(cat.at("skeleton"));
        cr.pruned_skeleton = detail::skeleton_from(cat.at("pruned_skeleton"));
        cr.pc = get<std::vector<std::size_t>>(cat, "pc");
        cr.sp = get<std::vector<std::size_t>>(cat, "sp");
        cr.recovered = get<std::vector<std::size_t>>(cat, "recovered");
        cr.final_cmb = get<std::vector<std::size_t>>(cat, "final_cmb");
        cr.phase_sets = get<std::array<std::vector<std::size_t>, kPhaseCount>>(cat, "phase_sets");
        cr.phase_ms = get<std::array<double, kPhaseCount>>(cat, "phase_ms");
        cr.ci_tests = get<std::array<std::size_t, kPhaseCount>>(cat, "ci_tests");
        cr.capped_conditioning = get<std::size_t>(cat, "capped_conditioning");
        r.categories.push_back(std::move(cr));
    }
    for (const auto& s : j.at("skipped")) {
        expect_keys(s, {"label_index", "category_value", "support", "reason"}, "skipped[]");
        r.skipped.push_back({get<std::size_t>(s, "label_index"), get<Code>(s, "category_value"),
                             get<std::size_t>(s, "support"), get<std::string>(s, "reason")});
    }
    r.selected = get<std::vector<std::size_t>>(j, "selected");
    r.selected_names = get<std::vector<std::string>>(j, "selected_names");
    r.phase_snapshots = get<std::array<std::vector<std::size_t>, kPhaseCount>>(j, "phase_snapshots");

    const auto& t = j.at("timings");
    expect_keys(t, {"total_ms", "phase_ms"}, "timings");
    r.timings.total_ms = get<double>(t, "total_ms");
    r.timings.phase_ms = get<std::array<double, kPhaseCount>>(t, "phase_ms");

    const auto& e = j.at("evaluation");
    if (!e.is_null()) {
        expect_keys(e, {"protocol", "train_fraction", "folds", "knn", "smoothing", "seed", "grid_points", "per_fold",
                        "mean"},
                    "evaluation");
        Evaluation ev;
        ev.protocol = get<std::string>(e, "protocol");
        ev.train_fraction = get<double>(e, "train_fraction");
        ev.folds = get<std::size_t>(e, "folds");
        ev.knn = get<std::size_t>(e, "knn");
        ev.smoothing = get<double>(e, "smoothing");
        ev.seed = get<std::uint64_t>(e, "seed");
        ev.grid_points = get<std::size_t>(e, "grid_points");
        for (const auto& f : e.at("per_fold")) {
            expect_keys(f, {"fold", "n_train", "n_test", "selected", "metrics"}, "per_fold[]");
            ev.per_fold.push_back({get<std::size_t>(f, "fold"), get<std::size_t>(f, "n_train"),
                                   get<std::size_t>(f, "n_test"), get<std::vector<std::size_t>>(f, "selected"),
                                   detail::metrics_from(f.at("metrics"))});
        }
        ev.mean = detail::metrics_from(e.at("mean"));
        r.evaluation = std::move(ev);
    }
    return r;
}

inline std::string dump(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

inline RunReport parse(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("report: invalid JSON: ") + e.what());
    }
    return from_json(j);
}

} // namespace camcf::report
