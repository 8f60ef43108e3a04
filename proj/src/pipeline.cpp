#include "takeover/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

#include "takeover/explain.hpp"

namespace takeover {

namespace {

using FitFn = std::function<std::function<double(std::span<const double>)>(
    const Dataset& train_fold, std::uint64_t fold_seed)>;

/// Metrics over pooled out-of-fold predictions. Degenerate cases (constant
/// targets or constant predictions) zero out the variance-based metrics
/// instead of failing the whole run.
MetricsReport lenient_score(std::span<const double> y, std::span<const double> yhat,
                            std::size_t n_predictors) {
    MetricsReport r;
    r.n = y.size();
    r.m = n_predictors;
    r.rmse = rmse(y, yhat);
    r.mae = mae(y, yhat);
    try {
        r.adj_r2 = adj_r2(y, yhat, n_predictors);
        r.adj_r2_standard = adj_r2_standard(y, yhat, n_predictors);
    } catch (const std::invalid_argument&) {
    }
    try {
        r.corr = corr(y, yhat);
    } catch (const std::invalid_argument&) {
    }
    return r;
}

MetricsReport pooled_fold_score(const Dataset& d, int k, std::uint64_t seed,
                                std::size_t n_predictors, const FitFn& fit) {
    const std::size_t n = d.rows.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<double> pooled(n, 0.0);
    std::size_t start = 0;
    for (int fold = 0; fold < k; ++fold) {
        const std::size_t size = n / k + (static_cast<std::size_t>(fold) < n % k ? 1 : 0);
        const std::size_t end = start + size;

        Dataset train_fold;
        train_fold.schema = d.schema;
        train_fold.provenance = d.provenance;
        train_fold.rows.reserve(n - size);
        for (std::size_t i = 0; i < n; ++i)
            if (i < start || i >= end) train_fold.rows.push_back(d.rows[perm[i]]);

        const std::uint64_t fold_seed =
            seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(fold) + 1;
        auto predict = fit(train_fold, fold_seed);
        for (std::size_t i = start; i < end; ++i)
            pooled[perm[i]] = predict(d.rows[perm[i]].values);
        start = end;
    }

    return lenient_score(d.targets(), pooled, n_predictors);
}

CVReport run_cv(const Dataset& sub, int k, const std::vector<std::uint64_t>& seeds,
                const std::vector<std::string>& features, const Hyperparams& p,
                const FitFn& fit, Execution exec) {
    if (k < 2) throw std::invalid_argument("cross_validate: k must be >= 2");
    if (sub.rows.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("cross_validate: fold count exceeds row count");
    if (seeds.empty()) throw std::invalid_argument("cross_validate: empty seed list");

    CVReport report;
    report.feature_set = features;
    report.params = p;
    report.per_seed.resize(seeds.size());

    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(seeds.size()); ++i)
            report.per_seed[i] = {seeds[i],
                                  pooled_fold_score(sub, k, seeds[i], features.size(), fit)};
    } else {
        for (std::size_t i = 0; i < seeds.size(); ++i)
            report.per_seed[i] = {seeds[i],
                                  pooled_fold_score(sub, k, seeds[i], features.size(), fit)};
    }

    auto& m = report.mean;
    report.min_mae = report.per_seed.front().second.mae;
    report.max_mae = report.min_mae;
    for (const auto& [seed, r] : report.per_seed) {
        m.rmse += r.rmse;
        m.mae += r.mae;
        m.adj_r2 += r.adj_r2;
        m.adj_r2_standard += r.adj_r2_standard;
        m.corr += r.corr;
        report.min_mae = std::min(report.min_mae, r.mae);
        report.max_mae = std::max(report.max_mae, r.mae);
    }
    const double c = static_cast<double>(report.per_seed.size());
    m.rmse /= c;
    m.mae /= c;
    m.adj_r2 /= c;
    m.adj_r2_standard /= c;
    m.corr /= c;
    m.n = sub.rows.size();
    m.m = features.size();
    return report;
}

FitFn booster_fit(const Hyperparams& p) {
    return [p](const Dataset& train_fold, std::uint64_t fold_seed) {
        Hyperparams q = p;
        q.seed = p.seed ^ fold_seed;
        Ensemble model = train(train_fold, q);
        return [model = std::move(model)](std::span<const double> x) {
            return model.predict(x);
        };
    };
}

}  // namespace

CVReport cross_validate(const Dataset& d, const Hyperparams& p, int k,
                        const std::vector<std::uint64_t>& seeds,
                        const std::vector<std::string>& features, Execution exec) {
    if (features.empty()) throw std::invalid_argument("cross_validate: empty feature set");
    const Dataset sub = d.select_features(features);
    return run_cv(sub, k, seeds, features, p, booster_fit(p), exec);
}

std::pair<Hyperparams, CVReport> grid_search(const Dataset& d, const HyperGrid& grid,
                                             int k, const std::vector<std::uint64_t>& seeds,
                                             const std::vector<std::string>& features,
                                             const Hyperparams& base, Execution exec) {
    if (grid.n_estimators.empty() || grid.learning_rate.empty() || grid.max_depth.empty() ||
        grid.subsample.empty() || grid.colsample_bytree.empty())
        throw std::invalid_argument("grid_search: empty grid axis");

    bool have_best = false;
    Hyperparams best_params;
    CVReport best_report;
    for (int trees : grid.n_estimators)
        for (double lr : grid.learning_rate)
            for (int depth : grid.max_depth)
                for (double sub : grid.subsample)
                    for (double col : grid.colsample_bytree) {
                        Hyperparams p = base;
                        p.n_estimators = trees;
                        p.learning_rate = lr;
                        p.max_depth = depth;
                        p.subsample = sub;
                        p.colsample_bytree = col;
                        CVReport r = cross_validate(d, p, k, seeds, features, exec);
                        const bool better =
                            !have_best || r.mean.rmse < best_report.mean.rmse ||
                            (r.mean.rmse == best_report.mean.rmse &&
                             (trees < best_params.n_estimators ||
                              (trees == best_params.n_estimators &&
                               depth < best_params.max_depth)));
                        if (better) {
                            have_best = true;
                            best_params = p;
                            best_report = std::move(r);
                        }
                    }
    return {best_params, best_report};
}

SelectionReport forward_select(const Dataset& d, const Hyperparams& p, int k,
                               const std::vector<std::uint64_t>& seeds, Execution exec) {
    std::vector<std::string> all_features;
    for (const auto& v : d.schema) all_features.push_back(v.name);

    const Ensemble full_model = train(d, p, exec);
    const GlobalImportance gi = global_importance(full_model, d, exec);

    SelectionReport report;
    std::vector<std::string> prefix;
    double best_rmse = 0.0;
    for (const auto& [name, score] : gi.ranking) {
        prefix.push_back(name);
        CVReport cv = cross_validate(d, p, k, seeds, prefix, exec);
        const double rmse = cv.mean.rmse;
        report.steps.push_back({name, std::move(cv)});
        if (report.steps.size() > 1 && !(rmse < best_rmse)) break;
        best_rmse = rmse;
        report.chosen = prefix;
    }
    return report;
}

BinReport bin_analysis(const Dataset& d, const Hyperparams& p, int k,
                       const std::vector<std::uint64_t>& seeds,
                       const std::vector<std::string>& features,
                       const std::vector<double>& bounds, Execution exec) {
    for (std::size_t i = 1; i < bounds.size(); ++i)
        if (!(bounds[i] > bounds[i - 1]))
            throw std::invalid_argument("bin_analysis: bounds must be strictly increasing");

    BinReport report;
    for (double bound : bounds) {
        Dataset restricted;
        restricted.schema = d.schema;
        restricted.provenance = d.provenance;
        for (const auto& r : d.rows)
            if (r.target <= bound) restricted.rows.push_back(r);

        BinRow row;
        row.upper_bound = bound;
        row.sample_count = restricted.rows.size();
        if (restricted.rows.size() < static_cast<std::size_t>(k)) {
            row.skipped = true;
        } else {
            CVReport cv = cross_validate(restricted, p, k, seeds, features, exec);
            row.metrics = cv.mean;
            row.min_mae = cv.min_mae;
            row.max_mae = cv.max_mae;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::pair<LinearModel, CVReport> fit_linear_baseline(const Dataset& d,
                                                     const std::vector<std::string>& features,
                                                     int k,
                                                     const std::vector<std::uint64_t>& seeds) {
    // An empty feature set is allowed here: the fit degenerates to the
    // intercept-only model (fold-mean predictions).
    const Dataset sub = d.select_features(features);

    FitFn fit = [](const Dataset& train_fold, std::uint64_t) {
        LinearModel lm = fit_ols(train_fold);
        return [lm = std::move(lm)](std::span<const double> x) { return lm.predict(x); };
    };
    CVReport cv = run_cv(sub, k, seeds, features, Hyperparams{}, fit, Execution::Parallel);
    return {fit_ols(sub), std::move(cv)};
}

nlohmann::json hyperparams_to_json(const Hyperparams& p) {
    return {{"n_estimators", p.n_estimators},
            {"learning_rate", p.learning_rate},
            {"max_depth", p.max_depth},
            {"subsample", p.subsample},
            {"colsample_bytree", p.colsample_bytree},
            {"reg_lambda", p.reg_lambda},
            {"reg_gamma", p.reg_gamma},
            {"min_child_weight", p.min_child_weight},
            {"seed", p.seed}};
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
    Hyperparams p;
    p.n_estimators = j.value("n_estimators", p.n_estimators);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.max_depth = j.value("max_depth", p.max_depth);
    p.subsample = j.value("subsample", p.subsample);
    p.colsample_bytree = j.value("colsample_bytree", p.colsample_bytree);
    p.reg_lambda = j.value("reg_lambda", p.reg_lambda);
    p.reg_gamma = j.value("reg_gamma", p.reg_gamma);
    p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
    p.seed = j.value("seed", p.seed);
    p.validate();
    return p;
}

nlohmann::json to_json(const CVReport& r) {
    nlohmann::json per_seed = nlohmann::json::array();
    for (const auto& [seed, m] : r.per_seed)
        per_seed.push_back({{"seed", seed}, {"metrics", to_json(m)}});
    return {{"per_seed", per_seed},
            {"mean", to_json(r.mean)},
            {"min_mae", r.min_mae},
            {"max_mae", r.max_mae},
            {"feature_set", r.feature_set},
            {"params", hyperparams_to_json(r.params)}};
}

nlohmann::json to_json(const SelectionReport& r) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : r.steps)
        steps.push_back({{"feature_added", s.feature_added}, {"report", to_json(s.report)}});
    return {{"steps", steps}, {"chosen", r.chosen}};
}

nlohmann::json to_json(const BinReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& b : r.rows) {
        nlohmann::json row = {{"upper_bound", b.upper_bound},
                              {"sample_count", b.sample_count},
                              {"skipped", b.skipped}};
        if (!b.skipped) {
            row["metrics"] = to_json(b.metrics);
            row["min_mae"] = b.min_mae;
            row["max_mae"] = b.max_mae;
        }
        rows.push_back(std::move(row));
    }
    return {{"rows", rows}};
}

std::string selection_csv(const SelectionReport& r) {
    std::string out = "feature_set,rmse,mae,adj_r2,corr\n";
    std::vector<std::string> prefix;
    for (const auto& s : r.steps) {
        prefix.push_back(s.feature_added);
        std::string names;
        for (std::size_t i = 0; i < prefix.size(); ++i) {
            if (i) names += ' ';
            names += prefix[i];
        }
        out += names + ',' + format_double(s.report.mean.rmse) + ',' +
               format_double(s.report.mean.mae) + ',' + format_double(s.report.mean.adj_r2) +
               ',' + format_double(s.report.mean.corr) + '\n';
    }
    return out;
}

std::string bin_csv(const BinReport& r) {
    std::string out = "upper_bound,samples,rmse,adj_r2,mae,min_mae,max_mae,corr\n";
    for (const auto& b : r.rows) {
        out += format_double(b.upper_bound) + ',' + std::to_string(b.sample_count) + ',';
        if (b.skipped) {
            out += ",,,,,\n";
            continue;
        }
        out += format_double(b.metrics.rmse) + ',' + format_double(b.metrics.adj_r2) + ',' +
               format_double(b.metrics.mae) + ',' + format_double(b.min_mae) + ',' +
               format_double(b.max_mae) + ',' + format_double(b.metrics.corr) + '\n';
    }
    return out;
}

}  // namespace takeover
