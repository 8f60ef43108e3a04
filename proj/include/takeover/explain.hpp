#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "takeover/booster.hpp"

#include "json.hpp"

namespace takeover {

/// Per-instance Shapley attribution in seconds. Local accuracy:
/// base_value + sum(phi) equals the model prediction.
struct Attribution {
    double base_value = 0.0;
    std::vector<double> phi;
    std::vector<double> instance;

    double output() const;
};

/// Symmetric pairwise interaction matrix; the diagonal holds main effects
/// and each row sums to the feature's Shapley value.
struct InteractionMatrix {
    std::size_t m = 0;
    std::vector<double> values;  // row-major m x m

    double& at(std::size_t i, std::size_t j) { return values[i * m + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * m + j]; }
    std::vector<double> row_sums() const;
};

struct GlobalImportance {
    std::vector<std::pair<std::string, double>> ranking;  // descending score
    std::vector<std::vector<double>> per_instance;        // rows x features, schema order
};

struct ForceRecord {
    struct Item {
        std::string variable;
        double value = 0.0;
        bool missing = false;
        double phi = 0.0;
    };
    double base_value = 0.0;
    double output = 0.0;
    std::vector<Item> contributions;  // sorted by |phi| descending
};

struct DependenceRecord {
    double feature_value = 0.0;
    bool feature_missing = false;
    double main_effect = 0.0;   // interaction diagonal
    double phi_total = 0.0;     // full Shapley value
    double color_value = 0.0;
    bool color_missing = false;
};

struct DependenceData {
    int feature = -1;
    int color_feature = -1;  // strongest interaction partner
    std::vector<DependenceRecord> records;
};

/// Path-dependent tree expectation v(S): inside S the instance routes the
/// tree (default direction when missing), outside S children are averaged
/// by cover. v(full set) = predict, v(empty set) = base value.
double conditional_expectation(const Ensemble& m, std::span<const double> x,
                               const std::vector<bool>& in_coalition);

/// Direct subset enumeration of the Shapley formula; oracle for tree_shap.
/// Guarded to at most 15 features.
Attribution brute_shap(const Ensemble& m, std::span<const double> x);

/// Exact polynomial-time Shapley values via the path recursion with cover
/// weights. Matches brute_shap wherever the enumeration is feasible.
Attribution tree_shap(const Ensemble& m, std::span<const double> x);

std::vector<Attribution> tree_shap_batch(const Ensemble& m, const Dataset& d,
                                         Execution exec = Execution::Parallel);

/// Pairwise Shapley interaction values; each pair's effect is stored half
/// in [i][j] and half in [j][i], the diagonal is the residual main effect.
InteractionMatrix interactions(const Ensemble& m, std::span<const double> x);

/// Subset-enumeration oracle for the interaction index. Guarded to M <= 12.
InteractionMatrix brute_interactions(const Ensemble& m, std::span<const double> x);

/// Ranking by summed |phi| over a reference dataset, ties by schema order.
GlobalImportance global_importance(const Ensemble& m, const Dataset& d,
                                   Execution exec = Execution::Parallel);

DependenceData dependence_data(const Ensemble& m, const Dataset& d, int feature);

ForceRecord force_data(const Ensemble& m, const Schema& schema,
                       std::span<const double> x);

nlohmann::json to_json(const Attribution& a);
nlohmann::json to_json(const InteractionMatrix& im);
nlohmann::json to_json(const GlobalImportance& gi);
nlohmann::json to_json(const ForceRecord& fr);
nlohmann::json to_json(const DependenceData& dd, const Schema& schema);
std::string dependence_csv(const DependenceData& dd);

}  // namespace takeover
