#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "takeover/dataset.hpp"

#include "json.hpp"

namespace takeover {

struct Hyperparams {
    int n_estimators = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    double subsample = 1.0;
    double colsample_bytree = 1.0;
    double reg_lambda = 1.0;
    double reg_gamma = 0.0;
    double min_child_weight = 1.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument on range violations
};

/// Flat tree node. feature < 0 marks a leaf; `value` holds the final leaf
/// contribution (learning rate already applied) and, on internal nodes,
/// the cover-weighted expectation of the subtree (used by explanations).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    double cover = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at index 0

    int max_depth() const;
    /// Fills internal-node values with cover-weighted child averages.
    void compute_expectations();
};

enum class Execution { Serial, Parallel };

struct Ensemble {
    double base_score = 0.0;
    std::vector<Tree> trees;
    std::uint64_t schema_fingerprint = 0;
    Hyperparams params;
    std::vector<std::string> feature_names;

    std::size_t n_features() const { return feature_names.size(); }

    double predict(std::span<const double> x) const;
    std::vector<double> predict_batch(const Dataset& d) const;
};

/// Closed-form leaf optimum of the second-order objective: -G / (H + lambda).
double leaf_weight(double grad_sum, double hess_sum, double reg_lambda);

/// Gain of splitting (GL,HL | GR,HR): half the structure-score improvement
/// minus the per-leaf penalty gamma. May be negative.
double split_gain(double gl, double hl, double gr, double hr,
                  double reg_lambda, double reg_gamma);

/// Gradient boosting with squared-error loss, exact greedy split search and
/// learned default directions for missing values. Deterministic for a fixed
/// seed regardless of execution policy or thread count.
Ensemble train(const Dataset& d, const Hyperparams& p,
               Execution exec = Execution::Parallel);

nlohmann::json ensemble_to_json(const Ensemble& m);
Ensemble ensemble_from_json(const nlohmann::json& j);

void save_model(const Ensemble& m, const std::string& path);
Ensemble load_model(const std::string& path);

}  // namespace takeover
