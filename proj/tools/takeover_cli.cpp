// Command-line front end: dataset ingestion and synthesis, model training,
// cross-validation, SHAP-guided selection, explanation exports, cumulative
// bin analysis, the linear baseline and single-instance prediction.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "takeover/booster.hpp"
#include "takeover/dataset.hpp"
#include "takeover/explain.hpp"
#include "takeover/pipeline.hpp"
#include "takeover/synthesize.hpp"

namespace {

using namespace takeover;
using nlohmann::json;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t a = std::stoull(text.substr(0, dots));
        const std::uint64_t b = std::stoull(text.substr(dots + 2));
        if (b < a) throw CLI::ValidationError("seeds", "range end before start");
        for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
        return seeds;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
    if (seeds.empty()) throw CLI::ValidationError("seeds", "empty seed list");
    return seeds;
}

std::vector<std::string> parse_name_list(const std::string& text) {
    std::vector<std::string> names;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) names.push_back(item);
    return names;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::string resolve_out(const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    const char* dir = std::getenv("TAKEOVER_OUT_DIR");
    if (!dir || !*dir) return path;
    return (std::filesystem::path(dir) / path).string();
}

std::uint64_t file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return 0;
    std::uint64_t h = 14695981039346656037ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

struct ManifestScope {
    std::string command;
    json config = json::object();
    std::string out_path;
    std::uint64_t data_fingerprint = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    ~ManifestScope() {
        if (out_path.empty()) return;
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json m = {{"command", command},
                  {"config", config},
                  {"dataset_fingerprint", data_fingerprint},
                  {"wall_time_seconds", wall}};
        try {
            write_json(out_path + ".manifest.json", m);
        } catch (...) {
        }
    }
};

struct HyperFlags {
    Hyperparams p;

    void attach(CLI::App* cmd) {
        cmd->add_option("--trees", p.n_estimators, "boosting rounds");
        cmd->add_option("--learning-rate", p.learning_rate, "shrinkage in (0,1]");
        cmd->add_option("--depth", p.max_depth, "maximum tree depth");
        cmd->add_option("--subsample", p.subsample, "row sampling rate per tree");
        cmd->add_option("--colsample", p.colsample_bytree, "feature sampling rate per tree");
        cmd->add_option("--reg-lambda", p.reg_lambda, "L2 leaf weight penalty");
        cmd->add_option("--reg-gamma", p.reg_gamma, "per-leaf split penalty");
        cmd->add_option("--min-child-weight", p.min_child_weight, "minimum child hessian sum");
        cmd->add_option("--model-seed", p.seed, "training PRNG seed");
    }

    json echo() const { return hyperparams_to_json(p); }
};

Dataset load_merged(const std::string& path, const std::string& schema_file) {
    if (!schema_file.empty()) return load_csv(path, schema_from_json(json::parse(std::ifstream(schema_file))));
    return load_csv(path, merged_study_schema());
}

std::vector<std::string> all_feature_names(const Dataset& d) {
    std::vector<std::string> names;
    for (const auto& v : d.schema) names.push_back(v.name);
    return names;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Takeover-time prediction: boosted trees with exact Shapley explanations"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap worker threads (0 = hardware default)");

    // Shared option storage; each subcommand wires the subset it uses.
    std::string data_path, model_path, out_path, schema_file, seeds_text = "0..99";
    std::string features_text, bounds_text = "2,3,4,5,6,7,8,9", values_text, dependence_feature;
    std::string save_data_path;
    int k = 10;
    std::size_t rows = 519;
    std::uint64_t seed = 0;
    double noise = 0.3, missing_rate = 0.05, outlier_threshold = 9.0;
    bool no_merge = false, do_global = false;
    int instance_index = -1;
    HyperFlags hp;

    auto* ingest = app.add_subcommand("ingest", "validate and preprocess a raw study CSV");
    ingest->add_option("--data", data_path, "raw CSV (18-variable schema)")->required();
    ingest->add_option("--out", out_path, "summary JSON path")->required();
    ingest->add_option("--save-data", save_data_path, "write the preprocessed CSV here");
    ingest->add_option("--outlier-threshold", outlier_threshold, "drop rows above this target");
    ingest->add_flag("--no-merge", no_merge, "keep TBTC and TBTB separate");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--rows", rows, "row count");
    synth->add_option("--seed", seed, "generator seed");
    synth->add_option("--noise", noise, "noise standard deviation in seconds");
    synth->add_option("--missing", missing_rate, "per-cell missingness rate");
    synth->add_option("--out", out_path, "CSV path")->required();

    auto* train_cmd = app.add_subcommand("train", "train a boosted ensemble");
    train_cmd->add_option("--data", data_path, "preprocessed CSV")->required();
    train_cmd->add_option("--schema", schema_file, "schema JSON (default: merged study schema)");
    train_cmd->add_option("--features", features_text, "comma-separated feature subset");
    train_cmd->add_option("--out", out_path, "model JSON path")->required();
    hp.attach(train_cmd);

    auto* predict_cmd = app.add_subcommand("predict", "predict takeover time");
    predict_cmd->add_option("--model", model_path, "model JSON")->required();
    predict_cmd->add_option("--data", data_path, "CSV to predict (target column required)");
    predict_cmd->add_option("--values", values_text,
                            "single instance, comma-separated, empty cell = missing");
    predict_cmd->add_option("--schema", schema_file, "schema JSON for --data");
    predict_cmd->add_option("--out", out_path, "output path")->required();

    auto* cv = app.add_subcommand("cv", "repeated k-fold cross-validation");
    cv->add_option("--data", data_path)->required();
    cv->add_option("--schema", schema_file);
    cv->add_option("--features", features_text);
    cv->add_option("--k", k, "fold count");
    cv->add_option("--seeds", seeds_text, "seed list: a..b or comma-separated");
    cv->add_option("--out", out_path)->required();
    hp.attach(cv);

    auto* grid = app.add_subcommand("grid", "hyperparameter grid search");
    grid->add_option("--data", data_path)->required();
    grid->add_option("--schema", schema_file);
    grid->add_option("--features", features_text);
    grid->add_option("--k", k);
    grid->add_option("--seeds", seeds_text);
    grid->add_option("--out", out_path)->required();
    hp.attach(grid);

    auto* select = app.add_subcommand("select", "SHAP-guided forward feature selection");
    select->add_option("--data", data_path)->required();
    select->add_option("--schema", schema_file);
    select->add_option("--k", k);
    select->add_option("--seeds", seeds_text);
    select->add_option("--out", out_path, "selection JSON; a .csv twin is written too")->required();
    hp.attach(select);

    auto* explain_cmd = app.add_subcommand("explain", "Shapley explanations");
    explain_cmd->add_option("--model", model_path)->required();
    explain_cmd->add_option("--data", data_path)->required();
    explain_cmd->add_option("--schema", schema_file);
    explain_cmd->add_flag("--global", do_global, "global importance over the dataset");
    explain_cmd->add_option("--instance", instance_index,
                            "explain one row: attribution, force data, interactions");
    explain_cmd->add_option("--dependence", dependence_feature,
                            "dependence/main-effect data for a feature");
    explain_cmd->add_option("--out", out_path)->required();

    auto* bins = app.add_subcommand("bins", "cumulative-time-bin evaluation");
    bins->add_option("--data", data_path)->required();
    bins->add_option("--schema", schema_file);
    bins->add_option("--features", features_text);
    bins->add_option("--bounds", bounds_text, "comma-separated upper bounds in seconds");
    bins->add_option("--k", k);
    bins->add_option("--seeds", seeds_text);
    bins->add_option("--out", out_path)->required();
    hp.attach(bins);

    auto* baseline = app.add_subcommand("baseline", "cross-validated linear-regression baseline");
    baseline->add_option("--data", data_path)->required();
    baseline->add_option("--schema", schema_file);
    baseline->add_option("--features", features_text);
    baseline->add_option("--k", k);
    baseline->add_option("--seeds", seeds_text);
    baseline->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        ManifestScope manifest;
        out_path = resolve_out(out_path);
        manifest.out_path = out_path;
        if (!data_path.empty()) manifest.data_fingerprint = file_fingerprint(data_path);

        if (*ingest) {
            manifest.command = "ingest";
            manifest.config = {{"data", data_path},
                               {"outlier_threshold", outlier_threshold},
                               {"merge_time_budgets", !no_merge}};
            Dataset raw = load_csv(data_path, study_schema());
            raw.provenance = "study";
            const Dataset d = preprocess(raw, {!no_merge, outlier_threshold});
            json out = {{"summary", to_json(summarize(d))},
                        {"schema", schema_to_json(d.schema)},
                        {"provenance", d.provenance}};
            write_json(out_path, out);
            if (!save_data_path.empty()) save_csv(d, resolve_out(save_data_path));
        } else if (*synth) {
            manifest.command = "synth";
            manifest.config = {{"rows", rows}, {"seed", seed}, {"noise", noise},
                               {"missing", missing_rate}};
            GeneratorSpec g = GeneratorSpec::takeover_like();
            g.rows = rows;
            g.noise_sd = noise;
            g.missing_rate = missing_rate;
            save_csv(synthesize(merged_study_schema(), g, seed), out_path);
        } else if (*train_cmd) {
            manifest.command = "train";
            manifest.config = {{"data", data_path}, {"params", hp.echo()}};
            Dataset d = load_merged(data_path, schema_file);
            if (!features_text.empty()) d = d.select_features(parse_name_list(features_text));
            save_model(train(d, hp.p), out_path);
        } else if (*predict_cmd) {
            manifest.command = "predict";
            manifest.config = {{"model", model_path}};
            const Ensemble m = load_model(model_path);
            if (!values_text.empty()) {
                std::vector<double> x;
                std::stringstream ss(values_text);
                std::string cell;
                while (std::getline(ss, cell, ','))
                    x.push_back(cell.empty() ? missing_value() : std::stod(cell));
                while (x.size() < m.n_features()) x.push_back(missing_value());
                const double y = m.predict(x);
                write_json(out_path, {{"prediction", y}});
                std::cout << format_double(y) << "\n";
            } else if (!data_path.empty()) {
                const Dataset d = load_merged(data_path, schema_file);
                std::string csv = "prediction\n";
                for (double y : m.predict_batch(d)) csv += format_double(y) + "\n";
                write_text(out_path, csv);
            } else {
                throw CLI::ValidationError("predict", "need --values or --data");
            }
        } else if (*cv) {
            manifest.command = "cv";
            manifest.config = {{"data", data_path}, {"k", k}, {"seeds", seeds_text},
                               {"params", hp.echo()}};
            const Dataset d = load_merged(data_path, schema_file);
            const auto features = features_text.empty() ? all_feature_names(d)
                                                        : parse_name_list(features_text);
            write_json(out_path,
                       to_json(cross_validate(d, hp.p, k, parse_seeds(seeds_text), features)));
        } else if (*grid) {
            manifest.command = "grid";
            manifest.config = {{"data", data_path}, {"k", k}, {"seeds", seeds_text}};
            const Dataset d = load_merged(data_path, schema_file);
            const auto features = features_text.empty() ? all_feature_names(d)
                                                        : parse_name_list(features_text);
            auto [best, report] =
                grid_search(d, HyperGrid{}, k, parse_seeds(seeds_text), features, hp.p);
            write_json(out_path,
                       {{"best_params", hyperparams_to_json(best)}, {"report", to_json(report)}});
        } else if (*select) {
            manifest.command = "select";
            manifest.config = {{"data", data_path}, {"k", k}, {"seeds", seeds_text},
                               {"params", hp.echo()}};
            const Dataset d = load_merged(data_path, schema_file);
            const SelectionReport r = forward_select(d, hp.p, k, parse_seeds(seeds_text));
            write_json(out_path, to_json(r));
            write_text(std::filesystem::path(out_path).replace_extension(".csv").string(),
                       selection_csv(r));
        } else if (*explain_cmd) {
            manifest.command = "explain";
            manifest.config = {{"model", model_path}, {"data", data_path}};
            const Ensemble m = load_model(model_path);
            const Dataset d = load_merged(data_path, schema_file);
            if (m.schema_fingerprint != schema_fingerprint(d.schema))
                throw std::runtime_error("explain: dataset schema does not match the model");
            if (do_global) {
                write_json(out_path, to_json(global_importance(m, d)));
            } else if (instance_index >= 0) {
                if (static_cast<std::size_t>(instance_index) >= d.rows.size())
                    throw std::runtime_error("explain: instance index out of range");
                const auto& x = d.rows[instance_index].values;
                write_json(out_path, {{"attribution", to_json(tree_shap(m, x))},
                                      {"force", to_json(force_data(m, d.schema, x))},
                                      {"interactions", to_json(interactions(m, x))}});
            } else if (!dependence_feature.empty()) {
                const int f = find_variable(d.schema, dependence_feature);
                if (f < 0) throw std::runtime_error("explain: unknown feature " + dependence_feature);
                const DependenceData dd = dependence_data(m, d, f);
                write_json(out_path, to_json(dd, d.schema));
                write_text(std::filesystem::path(out_path).replace_extension(".csv").string(),
                           dependence_csv(dd));
            } else {
                throw CLI::ValidationError("explain",
                                           "need one of --global, --instance, --dependence");
            }
        } else if (*bins) {
            manifest.command = "bins";
            manifest.config = {{"data", data_path}, {"k", k}, {"seeds", seeds_text},
                               {"bounds", bounds_text}, {"params", hp.echo()}};
            const Dataset d = load_merged(data_path, schema_file);
            const auto features = features_text.empty() ? all_feature_names(d)
                                                        : parse_name_list(features_text);
            const BinReport r = bin_analysis(d, hp.p, k, parse_seeds(seeds_text), features,
                                             parse_number_list(bounds_text));
            write_json(out_path, to_json(r));
            write_text(std::filesystem::path(out_path).replace_extension(".csv").string(),
                       bin_csv(r));
        } else if (*baseline) {
            manifest.command = "baseline";
            manifest.config = {{"data", data_path}, {"k", k}, {"seeds", seeds_text}};
            const Dataset d = load_merged(data_path, schema_file);
            const auto features = features_text.empty() ? all_feature_names(d)
                                                        : parse_name_list(features_text);
            auto [model, report] = fit_linear_baseline(d, features, k, parse_seeds(seeds_text));
            write_json(out_path, {{"model", to_json(model)}, {"report", to_json(report)}});
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
