#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "takeover/booster.hpp"
#include "takeover/linear.hpp"
#include "takeover/metrics.hpp"

#include "json.hpp"

namespace takeover {

struct CVReport {
    std::vector<std::pair<std::uint64_t, MetricsReport>> per_seed;
    MetricsReport mean;
    double min_mae = 0.0;
    double max_mae = 0.0;
    std::vector<std::string> feature_set;
    Hyperparams params;
};

struct SelectionStep {
    std::string feature_added;
    CVReport report;
};

struct SelectionReport {
    std::vector<SelectionStep> steps;
    std::vector<std::string> chosen;
};

struct BinRow {
    double upper_bound = 0.0;
    std::size_t sample_count = 0;
    bool skipped = false;  // too few rows for the fold count
    MetricsReport metrics;
    double min_mae = 0.0;
    double max_mae = 0.0;
};

struct BinReport {
    std::vector<BinRow> rows;
};

struct HyperGrid {
    std::vector<int> n_estimators{50, 100, 200};
    std::vector<double> learning_rate{0.05, 0.1, 0.3};
    std::vector<int> max_depth{2, 3, 4, 6};
    std::vector<double> subsample{0.8, 1.0};
    std::vector<double> colsample_bytree{0.8, 1.0};
};

/// Repeated k-fold CV: per seed, shuffle, split into k near-equal folds,
/// pool the out-of-fold predictions and score once. Seeds may run in
/// parallel; aggregation is order-independent.
CVReport cross_validate(const Dataset& d, const Hyperparams& p, int k,
                        const std::vector<std::uint64_t>& seeds,
                        const std::vector<std::string>& features,
                        Execution exec = Execution::Parallel);

/// Exhaustive search over the grid's Cartesian product, minimizing mean
/// RMSE; ties go to fewer trees, then shallower depth, then grid order.
std::pair<Hyperparams, CVReport> grid_search(const Dataset& d, const HyperGrid& grid,
                                             int k, const std::vector<std::uint64_t>& seeds,
                                             const std::vector<std::string>& features,
                                             const Hyperparams& base = Hyperparams{},
                                             Execution exec = Execution::Parallel);

/// SHAP-guided forward selection: rank features once on the full dataset,
/// then grow prefixes until mean RMSE stops strictly decreasing.
SelectionReport forward_select(const Dataset& d, const Hyperparams& p, int k,
                               const std::vector<std::uint64_t>& seeds,
                               Execution exec = Execution::Parallel);

/// Cumulative-bin evaluation: restrict to rows with target <= bound and
/// cross-validate each restriction. min/max MAE over seeds per bin.
BinReport bin_analysis(const Dataset& d, const Hyperparams& p, int k,
                       const std::vector<std::uint64_t>& seeds,
                       const std::vector<std::string>& features,
                       const std::vector<double>& bounds,
                       Execution exec = Execution::Parallel);

/// OLS baseline cross-validated like the booster; missing values imputed
/// by training-fold means. The returned model is fitted on the full data.
std::pair<LinearModel, CVReport> fit_linear_baseline(const Dataset& d,
                                                     const std::vector<std::string>& features,
                                                     int k,
                                                     const std::vector<std::uint64_t>& seeds);

nlohmann::json to_json(const CVReport& r);
nlohmann::json to_json(const SelectionReport& r);
nlohmann::json to_json(const BinReport& r);
std::string selection_csv(const SelectionReport& r);
std::string bin_csv(const BinReport& r);

nlohmann::json hyperparams_to_json(const Hyperparams& p);
Hyperparams hyperparams_from_json(const nlohmann::json& j);

}  // namespace takeover
