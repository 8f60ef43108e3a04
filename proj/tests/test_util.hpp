#pragma once

// Shared builders for hand-made trees, randomized ensembles and small
// schemas used across the unit and acceptance suites.

#include <random>
#include <string>
#include <vector>

#include "takeover/booster.hpp"
#include "takeover/dataset.hpp"

namespace test_util {

using namespace takeover;

inline Schema continuous_schema(std::size_t n) {
    Schema s;
    for (std::size_t i = 0; i < n; ++i)
        s.push_back({"x" + std::to_string(i), VarKind::Continuous, {}, ""});
    return s;
}

/// Single split on `feature` with explicit leaf values and covers.
inline Tree stump(int feature, double threshold, double left_value, double right_value,
                  double left_cover, double right_cover, bool default_left = true) {
    Tree t;
    t.nodes.resize(3);
    t.nodes[0].feature = feature;
    t.nodes[0].threshold = threshold;
    t.nodes[0].default_left = default_left;
    t.nodes[0].cover = left_cover + right_cover;
    t.nodes[0].left = 1;
    t.nodes[0].right = 2;
    t.nodes[1] = {.cover = left_cover, .value = left_value};
    t.nodes[2] = {.cover = right_cover, .value = right_value};
    t.compute_expectations();
    return t;
}

inline Ensemble single_tree_model(Tree t, std::size_t n_features, double base = 0.0) {
    Ensemble m;
    m.base_score = base;
    m.trees.push_back(std::move(t));
    for (std::size_t i = 0; i < n_features; ++i)
        m.feature_names.push_back("x" + std::to_string(i));
    return m;
}

/// Random tree over features in [0, n_features) with values in (0,1),
/// random covers and random default directions.
inline int random_subtree(Tree& t, std::mt19937_64& rng, std::size_t n_features, int depth,
                          int max_depth) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int index = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    if (depth >= max_depth || unit(rng) < 0.3) {
        t.nodes[index].value = -5.0 + 10.0 * unit(rng);
        t.nodes[index].cover = 1.0 + std::floor(50.0 * unit(rng));
        return index;
    }
    const int feature = static_cast<int>(unit(rng) * static_cast<double>(n_features)) %
                        static_cast<int>(n_features);
    const double threshold = unit(rng);
    const bool default_left = unit(rng) < 0.5;
    const int left = random_subtree(t, rng, n_features, depth + 1, max_depth);
    const int right = random_subtree(t, rng, n_features, depth + 1, max_depth);
    auto& n = t.nodes[index];
    n.feature = feature;
    n.threshold = threshold;
    n.default_left = default_left;
    n.left = left;
    n.right = right;
    n.cover = t.nodes[left].cover + t.nodes[right].cover;
    return index;
}

inline Ensemble random_ensemble(std::mt19937_64& rng, std::size_t n_features,
                                std::size_t n_trees, int max_depth) {
    Ensemble m;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    m.base_score = -1.0 + 2.0 * unit(rng);
    for (std::size_t i = 0; i < n_features; ++i)
        m.feature_names.push_back("x" + std::to_string(i));
    for (std::size_t t = 0; t < n_trees; ++t) {
        Tree tree;
        random_subtree(tree, rng, n_features, 0, max_depth);
        tree.compute_expectations();
        m.trees.push_back(std::move(tree));
    }
    return m;
}

inline std::vector<double> random_instance(std::mt19937_64& rng, std::size_t n_features,
                                           double missing_prob = 0.2) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(n_features);
    for (auto& v : x) v = unit(rng) < missing_prob ? missing_value() : unit(rng);
    return x;
}

}  // namespace test_util
