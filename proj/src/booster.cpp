#include "takeover/booster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace takeover {

void Hyperparams::validate() const {
    if (n_estimators < 0) throw std::invalid_argument("n_estimators must be >= 0");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
        throw std::invalid_argument("learning_rate must be in (0,1]");
    if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
    if (!(subsample > 0.0) || subsample > 1.0)
        throw std::invalid_argument("subsample must be in (0,1]");
    if (!(colsample_bytree > 0.0) || colsample_bytree > 1.0)
        throw std::invalid_argument("colsample_bytree must be in (0,1]");
    if (reg_lambda < 0.0) throw std::invalid_argument("reg_lambda must be >= 0");
    if (reg_gamma < 0.0) throw std::invalid_argument("reg_gamma must be >= 0");
    if (min_child_weight < 0.0) throw std::invalid_argument("min_child_weight must be >= 0");
}

double leaf_weight(double grad_sum, double hess_sum, double reg_lambda) {
    const double denom = hess_sum + reg_lambda;
    if (!(denom > 0.0)) throw std::invalid_argument("leaf_weight: H + lambda must be positive");
    return -grad_sum / denom;
}

double split_gain(double gl, double hl, double gr, double hr,
                  double reg_lambda, double reg_gamma) {
    if (!(hl + reg_lambda > 0.0) || !(hr + reg_lambda > 0.0) ||
        !(hl + hr + reg_lambda > 0.0))
        throw std::invalid_argument("split_gain: H + lambda must be positive");
    const double gp = gl + gr;
    const double hp = hl + hr;
    return 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) -
                  gp * gp / (hp + reg_lambda)) -
           reg_gamma;
}

int Tree::max_depth() const {
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[i].is_leaf()) {
            stack.push_back({nodes[i].left, d + 1});
            stack.push_back({nodes[i].right, d + 1});
        }
    }
    return best;
}

void Tree::compute_expectations() {
    // Children are always appended after their parent, so a reverse sweep
    // sees both children before the parent.
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
        if (it->is_leaf()) continue;
        const auto& l = nodes[it->left];
        const auto& r = nodes[it->right];
        it->value = (l.cover * l.value + r.cover * r.value) / (l.cover + r.cover);
    }
}

namespace {

double route(const Tree& t, std::span<const double> x) {
    int i = 0;
    while (!t.nodes[i].is_leaf()) {
        const auto& n = t.nodes[i];
        const double v = x[n.feature];
        if (is_missing(v))
            i = n.default_left ? n.left : n.right;
        else
            i = v < n.threshold ? n.left : n.right;
    }
    return t.nodes[i].value;
}

struct SplitCandidate {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    bool valid() const { return feature >= 0; }
};

struct TrainContext {
    const Dataset& data;
    const Hyperparams& p;
    std::vector<double> grad;  // full-dataset gradients, indexed by row
    std::vector<double> hess;
};

/// Best split of `rows` on one feature: exact scan over midpoints of sorted
/// present values, with the missing-value block tried on both sides.
SplitCandidate scan_feature(const TrainContext& ctx, const std::vector<int>& rows,
                            int feature, double g_total, double h_total,
                            std::vector<std::pair<double, int>>& scratch) {
    scratch.clear();
    double g_missing = 0.0, h_missing = 0.0;
    for (int r : rows) {
        const double v = ctx.data.rows[r].values[feature];
        if (is_missing(v)) {
            g_missing += ctx.grad[r];
            h_missing += ctx.hess[r];
        } else {
            scratch.emplace_back(v, r);
        }
    }
    SplitCandidate best;
    if (scratch.size() < 2) return best;
    std::sort(scratch.begin(), scratch.end());

    const double lambda = ctx.p.reg_lambda;
    const double gamma = ctx.p.reg_gamma;
    const double mcw = ctx.p.min_child_weight;

    double g_left = 0.0, h_left = 0.0;
    for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
        g_left += ctx.grad[scratch[i].second];
        h_left += ctx.hess[scratch[i].second];
        if (scratch[i].first == scratch[i + 1].first) continue;
        const double threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);

        // Missing rows on the left, then on the right; keep the better.
        for (int side = 0; side < 2; ++side) {
            const double gl = g_left + (side == 0 ? g_missing : 0.0);
            const double hl = h_left + (side == 0 ? h_missing : 0.0);
            const double gr = g_total - gl;
            const double hr = h_total - hl;
            if (hl < mcw || hr < mcw) continue;
            const double gain = split_gain(gl, hl, gr, hr, lambda, gamma);
            if (gain > best.gain) {
                best.gain = gain;
                best.feature = feature;
                best.threshold = threshold;
                best.default_left = (side == 0);
            }
        }
    }
    return best;
}

SplitCandidate find_best_split(const TrainContext& ctx, const std::vector<int>& rows,
                               const std::vector<int>& features, double g_total,
                               double h_total, Execution exec) {
    std::vector<SplitCandidate> per_feature(features.size());
    if (exec == Execution::Parallel) {
#pragma omp parallel
        {
            std::vector<std::pair<double, int>> scratch;
            scratch.reserve(rows.size());
#pragma omp for schedule(dynamic)
            for (long i = 0; i < static_cast<long>(features.size()); ++i)
                per_feature[i] = scan_feature(ctx, rows, features[i], g_total, h_total, scratch);
        }
    } else {
        std::vector<std::pair<double, int>> scratch;
        scratch.reserve(rows.size());
        for (std::size_t i = 0; i < features.size(); ++i)
            per_feature[i] = scan_feature(ctx, rows, features[i], g_total, h_total, scratch);
    }
    // Serial reduction in feature order keeps the result independent of
    // the thread count; ties go to the lower feature index, then the
    // lower threshold.
    SplitCandidate best;
    for (const auto& c : per_feature) {
        if (!c.valid()) continue;
        if (c.gain > best.gain ||
            (c.gain == best.gain && best.valid() &&
             (c.feature < best.feature ||
              (c.feature == best.feature && c.threshold < best.threshold))))
            best = c;
    }
    return best;
}

int grow_node(Tree& tree, TrainContext& ctx, std::vector<int>&& rows,
              const std::vector<int>& features, int depth, Execution exec) {
    double g_total = 0.0, h_total = 0.0;
    for (int r : rows) {
        g_total += ctx.grad[r];
        h_total += ctx.hess[r];
    }

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[index].cover = h_total;

    SplitCandidate split;
    if (depth < ctx.p.max_depth)
        split = find_best_split(ctx, rows, features, g_total, h_total, exec);

    if (!split.valid() || !(split.gain > 0.0)) {
        tree.nodes[index].value =
            ctx.p.learning_rate * leaf_weight(g_total, h_total, ctx.p.reg_lambda);
        return index;
    }

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
        const double v = ctx.data.rows[r].values[split.feature];
        const bool go_left = is_missing(v) ? split.default_left : v < split.threshold;
        (go_left ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left = grow_node(tree, ctx, std::move(left_rows), features, depth + 1, exec);
    const int right = grow_node(tree, ctx, std::move(right_rows), features, depth + 1, exec);
    auto& n = tree.nodes[index];
    n.feature = split.feature;
    n.threshold = split.threshold;
    n.default_left = split.default_left;
    n.left = left;
    n.right = right;
    return index;
}

}  // namespace

Ensemble train(const Dataset& d, const Hyperparams& p, Execution exec) {
    p.validate();
    if (d.rows.size() < 2) throw std::invalid_argument("train: need at least 2 rows");
    for (const auto& r : d.rows)
        if (!std::isfinite(r.target)) throw std::invalid_argument("train: non-finite target");

    const std::size_t n = d.rows.size();
    const std::size_t n_feat = d.schema.size();

    Ensemble m;
    m.params = p;
    m.schema_fingerprint = schema_fingerprint(d.schema);
    for (const auto& v : d.schema) m.feature_names.push_back(v.name);

    double target_sum = 0.0;
    for (const auto& r : d.rows) target_sum += r.target;
    m.base_score = target_sum / static_cast<double>(n);

    std::vector<double> pred(n, m.base_score);
    std::mt19937_64 rng(p.seed);

    TrainContext ctx{d, p, std::vector<double>(n), std::vector<double>(n, 1.0)};

    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    std::vector<int> all_features(n_feat);
    std::iota(all_features.begin(), all_features.end(), 0);

    const std::size_t n_sampled_rows =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     std::llround(p.subsample * static_cast<double>(n))));
    const std::size_t n_sampled_feat =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                     p.colsample_bytree * static_cast<double>(n_feat))));

    for (int round = 0; round < p.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) ctx.grad[i] = pred[i] - d.rows[i].target;

        std::vector<int> rows = all_rows;
        if (n_sampled_rows < n) {
            std::shuffle(rows.begin(), rows.end(), rng);
            rows.resize(n_sampled_rows);
            std::sort(rows.begin(), rows.end());
        }
        std::vector<int> features = all_features;
        if (n_sampled_feat < n_feat) {
            std::shuffle(features.begin(), features.end(), rng);
            features.resize(n_sampled_feat);
            std::sort(features.begin(), features.end());
        }

        Tree tree;
        grow_node(tree, ctx, std::move(rows), features, 0, exec);
        tree.compute_expectations();

        for (std::size_t i = 0; i < n; ++i) pred[i] += route(tree, d.rows[i].values);
        m.trees.push_back(std::move(tree));
    }
    return m;
}

double Ensemble::predict(std::span<const double> x) const {
    if (x.size() != n_features())
        throw std::invalid_argument("predict: expected " + std::to_string(n_features()) +
                                    " feature values, got " + std::to_string(x.size()));
    double out = base_score;
    for (const auto& t : trees) out += route(t, x);
    return out;
}

std::vector<double> Ensemble::predict_batch(const Dataset& d) const {
    std::vector<double> out;
    out.reserve(d.rows.size());
    for (const auto& r : d.rows) out.push_back(predict(r.values));
    return out;
}

namespace {

nlohmann::json node_to_json(const Tree& t, int i) {
    const auto& n = t.nodes[i];
    if (n.is_leaf()) return {{"leaf", n.value}, {"cover", n.cover}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"default_left", n.default_left},
            {"cover", n.cover},
            {"left", node_to_json(t, n.left)},
            {"right", node_to_json(t, n.right)}};
}

int node_from_json(const nlohmann::json& j, Tree& t) {
    const int index = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[index].cover = j.at("cover").get<double>();
    if (j.contains("leaf")) {
        t.nodes[index].value = j.at("leaf").get<double>();
        return index;
    }
    const int left = node_from_json(j.at("left"), t);
    const int right = node_from_json(j.at("right"), t);
    auto& n = t.nodes[index];
    n.feature = j.at("feature").get<int>();
    n.threshold = j.at("threshold").get<double>();
    n.default_left = j.at("default_left").get<bool>();
    n.left = left;
    n.right = right;
    return index;
}

}  // namespace

nlohmann::json ensemble_to_json(const Ensemble& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees) trees.push_back(node_to_json(t, 0));
    return {{"base_score", m.base_score},
            {"params",
             {{"n_estimators", m.params.n_estimators},
              {"learning_rate", m.params.learning_rate},
              {"max_depth", m.params.max_depth},
              {"subsample", m.params.subsample},
              {"colsample_bytree", m.params.colsample_bytree},
              {"reg_lambda", m.params.reg_lambda},
              {"reg_gamma", m.params.reg_gamma},
              {"min_child_weight", m.params.min_child_weight},
              {"seed", m.params.seed}}},
            {"schema_fingerprint", m.schema_fingerprint},
            {"feature_names", m.feature_names},
            {"trees", trees}};
}

Ensemble ensemble_from_json(const nlohmann::json& j) {
    Ensemble m;
    m.base_score = j.at("base_score").get<double>();
    const auto& p = j.at("params");
    m.params.n_estimators = p.at("n_estimators").get<int>();
    m.params.learning_rate = p.at("learning_rate").get<double>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.subsample = p.at("subsample").get<double>();
    m.params.colsample_bytree = p.at("colsample_bytree").get<double>();
    m.params.reg_lambda = p.at("reg_lambda").get<double>();
    m.params.reg_gamma = p.at("reg_gamma").get<double>();
    m.params.min_child_weight = p.at("min_child_weight").get<double>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.schema_fingerprint = j.at("schema_fingerprint").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& tj : j.at("trees")) {
        Tree t;
        node_from_json(tj, t);
        t.compute_expectations();
        m.trees.push_back(std::move(t));
    }
    return m;
}

void save_model(const Ensemble& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << ensemble_to_json(m).dump(2) << '\n';
}

Ensemble load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return ensemble_from_json(j);
}

}  // namespace takeover
