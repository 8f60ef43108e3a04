#include "takeover/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace takeover {

double Attribution::output() const {
    return base_value + std::accumulate(phi.begin(), phi.end(), 0.0);
}

std::vector<double> InteractionMatrix::row_sums() const {
    std::vector<double> sums(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) sums[i] += at(i, j);
    return sums;
}

namespace {

void check_arity(const Ensemble& m, std::span<const double> x) {
    if (x.size() != m.n_features())
        throw std::invalid_argument("explain: expected " + std::to_string(m.n_features()) +
                                    " feature values, got " + std::to_string(x.size()));
}

int hot_child(const TreeNode& n, std::span<const double> x) {
    const double v = x[n.feature];
    if (is_missing(v)) return n.default_left ? n.left : n.right;
    return v < n.threshold ? n.left : n.right;
}

double cond_exp_node(const Tree& t, int i, std::span<const double> x,
                     const std::vector<bool>& in_coalition) {
    const auto& n = t.nodes[i];
    if (n.is_leaf()) return n.value;
    if (in_coalition[n.feature]) return cond_exp_node(t, hot_child(n, x), x, in_coalition);
    const auto& l = t.nodes[n.left];
    const auto& r = t.nodes[n.right];
    return (l.cover * cond_exp_node(t, n.left, x, in_coalition) +
            r.cover * cond_exp_node(t, n.right, x, in_coalition)) /
           (l.cover + r.cover);
}

// ---------------------------------------------------------------------
// Exact per-tree Shapley recursion over feature paths. The path holds,
// per unique feature met so far, the fraction of zero (marginalized) and
// one (instance-following) extensions plus the permutation weight.
// ---------------------------------------------------------------------

struct PathElement {
    int feature_index = -1;
    double zero_fraction = 0.0;
    double one_fraction = 0.0;
    double pweight = 0.0;
};

void extend_path(PathElement* path, int unique_depth, double zero_fraction,
                 double one_fraction, int feature_index) {
    path[unique_depth] = {feature_index, zero_fraction, one_fraction,
                          unique_depth == 0 ? 1.0 : 0.0};
    for (int i = unique_depth - 1; i >= 0; --i) {
        path[i + 1].pweight +=
            one_fraction * path[i].pweight * (i + 1) / static_cast<double>(unique_depth + 1);
        path[i].pweight = zero_fraction * path[i].pweight * (unique_depth - i) /
                          static_cast<double>(unique_depth + 1);
    }
}

void unwind_path(PathElement* path, int unique_depth, int path_index) {
    const double one_fraction = path[path_index].one_fraction;
    const double zero_fraction = path[path_index].zero_fraction;
    double next_one_portion = path[unique_depth].pweight;

    for (int i = unique_depth - 1; i >= 0; --i) {
        if (one_fraction != 0.0) {
            const double tmp = path[i].pweight;
            path[i].pweight = next_one_portion * (unique_depth + 1) /
                              static_cast<double>((i + 1) * one_fraction);
            next_one_portion = tmp - path[i].pweight * zero_fraction * (unique_depth - i) /
                                         static_cast<double>(unique_depth + 1);
        } else {
            path[i].pweight =
                (path[i].pweight * (unique_depth + 1)) / (zero_fraction * (unique_depth - i));
        }
    }
    for (int i = path_index; i < unique_depth; ++i) {
        path[i].feature_index = path[i + 1].feature_index;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

double unwound_path_sum(const PathElement* path, int unique_depth, int path_index) {
    const double one_fraction = path[path_index].one_fraction;
    const double zero_fraction = path[path_index].zero_fraction;
    double next_one_portion = path[unique_depth].pweight;
    double total = 0.0;

    if (one_fraction != 0.0) {
        for (int i = unique_depth - 1; i >= 0; --i) {
            const double tmp = next_one_portion / static_cast<double>((i + 1) * one_fraction);
            total += tmp;
            next_one_portion = path[i].pweight - tmp * zero_fraction * (unique_depth - i);
        }
    } else {
        for (int i = unique_depth - 1; i >= 0; --i)
            total += path[i].pweight / (zero_fraction * (unique_depth - i));
    }
    return total * (unique_depth + 1);
}

// condition: 0 = plain Shapley values; +1/-1 = values of the model with
// condition_feature forced present / forced marginalized (used for the
// pairwise interaction decomposition).
void shap_recurse(const Tree& t, std::span<const double> x, double* phi, int node_index,
                  int unique_depth, PathElement* parent_path, double parent_zero_fraction,
                  double parent_one_fraction, int parent_feature_index, int condition,
                  int condition_feature, double condition_fraction) {
    if (condition_fraction == 0.0) return;

    PathElement* path = parent_path + unique_depth + 1;
    std::copy(parent_path, parent_path + unique_depth + 1, path);

    if (condition == 0 || condition_feature != parent_feature_index)
        extend_path(path, unique_depth, parent_zero_fraction, parent_one_fraction,
                    parent_feature_index);

    const auto& n = t.nodes[node_index];
    if (n.is_leaf()) {
        for (int i = 1; i <= unique_depth; ++i) {
            const double w = unwound_path_sum(path, unique_depth, i);
            const PathElement& el = path[i];
            phi[el.feature_index] +=
                w * (el.one_fraction - el.zero_fraction) * condition_fraction * n.value;
        }
        return;
    }

    const int hot = hot_child(n, x);
    const int cold = hot == n.left ? n.right : n.left;
    const double hot_zero_fraction = t.nodes[hot].cover / n.cover;
    const double cold_zero_fraction = t.nodes[cold].cover / n.cover;
    double incoming_zero_fraction = 1.0;
    double incoming_one_fraction = 1.0;

    // If this feature was already split on, undo that path entry so it can
    // be redone for this node.
    int path_index = 0;
    for (; path_index <= unique_depth; ++path_index)
        if (path[path_index].feature_index == n.feature) break;
    if (path_index != unique_depth + 1) {
        incoming_zero_fraction = path[path_index].zero_fraction;
        incoming_one_fraction = path[path_index].one_fraction;
        unwind_path(path, unique_depth, path_index);
        unique_depth -= 1;
    }

    double hot_condition_fraction = condition_fraction;
    double cold_condition_fraction = condition_fraction;
    if (condition > 0 && n.feature == condition_feature) {
        cold_condition_fraction = 0.0;
        unique_depth -= 1;
    } else if (condition < 0 && n.feature == condition_feature) {
        hot_condition_fraction *= hot_zero_fraction;
        cold_condition_fraction *= cold_zero_fraction;
        unique_depth -= 1;
    }

    shap_recurse(t, x, phi, hot, unique_depth + 1, path,
                 hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction, n.feature,
                 condition, condition_feature, hot_condition_fraction);
    shap_recurse(t, x, phi, cold, unique_depth + 1, path,
                 cold_zero_fraction * incoming_zero_fraction, 0.0, n.feature, condition,
                 condition_feature, cold_condition_fraction);
}

void tree_shap_single(const Tree& t, std::span<const double> x, double* phi, int condition,
                      int condition_feature) {
    const int maxd = t.max_depth() + 2;
    std::vector<PathElement> path_storage((maxd * (maxd + 1)) / 2);
    shap_recurse(t, x, phi, 0, 0, path_storage.data(), 1.0, 1.0, -1, condition,
                 condition_feature, 1.0);
}

std::vector<double> factorial_table(std::size_t n) {
    std::vector<double> f(n + 1, 1.0);
    for (std::size_t i = 1; i <= n; ++i) f[i] = f[i - 1] * static_cast<double>(i);
    return f;
}

/// v(S) for every subset bitmask.
std::vector<double> coalition_values(const Ensemble& m, std::span<const double> x) {
    const std::size_t nf = m.n_features();
    std::vector<bool> in_coalition(nf, false);
    std::vector<double> v(std::size_t{1} << nf);
    for (std::size_t mask = 0; mask < v.size(); ++mask) {
        for (std::size_t i = 0; i < nf; ++i) in_coalition[i] = (mask >> i) & 1u;
        double total = m.base_score;
        for (const auto& t : m.trees) total += cond_exp_node(t, 0, x, in_coalition);
        v[mask] = total;
    }
    return v;
}

}  // namespace

double conditional_expectation(const Ensemble& m, std::span<const double> x,
                               const std::vector<bool>& in_coalition) {
    check_arity(m, x);
    if (in_coalition.size() != m.n_features())
        throw std::invalid_argument("conditional_expectation: coalition mask arity mismatch");
    double total = m.base_score;
    for (const auto& t : m.trees) total += cond_exp_node(t, 0, x, in_coalition);
    return total;
}

Attribution brute_shap(const Ensemble& m, std::span<const double> x) {
    check_arity(m, x);
    const std::size_t nf = m.n_features();
    if (nf > 15) throw std::invalid_argument("brute_shap: more than 15 features");

    const auto v = coalition_values(m, x);
    const auto fact = factorial_table(nf);

    Attribution a;
    a.instance.assign(x.begin(), x.end());
    a.base_value = v[0];
    a.phi.assign(nf, 0.0);
    for (std::size_t i = 0; i < nf; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t mask = 0; mask < v.size(); ++mask) {
            if (mask & bit) continue;
            const int s = std::popcount(mask);
            const double w = fact[s] * fact[nf - s - 1] / fact[nf];
            a.phi[i] += w * (v[mask | bit] - v[mask]);
        }
    }
    return a;
}

Attribution tree_shap(const Ensemble& m, std::span<const double> x) {
    check_arity(m, x);
    Attribution a;
    a.instance.assign(x.begin(), x.end());
    a.phi.assign(m.n_features(), 0.0);
    a.base_value = m.base_score;
    for (const auto& t : m.trees) {
        a.base_value += t.nodes[0].value;
        tree_shap_single(t, x, a.phi.data(), 0, -1);
    }
    return a;
}

std::vector<Attribution> tree_shap_batch(const Ensemble& m, const Dataset& d, Execution exec) {
    std::vector<Attribution> out(d.rows.size());
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(d.rows.size()); ++i)
            out[i] = tree_shap(m, d.rows[i].values);
    } else {
        for (std::size_t i = 0; i < d.rows.size(); ++i) out[i] = tree_shap(m, d.rows[i].values);
    }
    return out;
}

InteractionMatrix interactions(const Ensemble& m, std::span<const double> x) {
    check_arity(m, x);
    const std::size_t nf = m.n_features();
    const Attribution a = tree_shap(m, x);

    InteractionMatrix im;
    im.m = nf;
    im.values.assign(nf * nf, 0.0);

    std::vector<double> phi_on(nf), phi_off(nf);
    for (std::size_t j = 0; j < nf; ++j) {
        std::fill(phi_on.begin(), phi_on.end(), 0.0);
        std::fill(phi_off.begin(), phi_off.end(), 0.0);
        for (const auto& t : m.trees) {
            tree_shap_single(t, x, phi_on.data(), 1, static_cast<int>(j));
            tree_shap_single(t, x, phi_off.data(), -1, static_cast<int>(j));
        }
        // (phi_on - phi_off) / 2 is the pairwise interaction under the
        // conventional 2(M-1)! weighting; rescale to the M! weighting used
        // here (total interaction = 2/M of the conventional one) and store
        // half per cell so the [i][j]/[j][i] pair sums to the total.
        for (std::size_t i = 0; i < nf; ++i)
            if (i != j)
                im.at(j, i) =
                    (phi_on[i] - phi_off[i]) / (2.0 * static_cast<double>(nf));
    }

    // Symmetrize the off-diagonal and let the diagonal absorb the residual
    // so both the symmetry and the row-sum identity hold exactly.
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = i + 1; j < nf; ++j) {
            const double avg = 0.5 * (im.at(i, j) + im.at(j, i));
            im.at(i, j) = avg;
            im.at(j, i) = avg;
        }
    for (std::size_t i = 0; i < nf; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < nf; ++j)
            if (j != i) off += im.at(i, j);
        im.at(i, i) = a.phi[i] - off;
    }
    return im;
}

InteractionMatrix brute_interactions(const Ensemble& m, std::span<const double> x) {
    check_arity(m, x);
    const std::size_t nf = m.n_features();
    if (nf > 12) throw std::invalid_argument("brute_interactions: more than 12 features");

    const auto v = coalition_values(m, x);
    const auto fact = factorial_table(nf);
    const Attribution a = brute_shap(m, x);

    InteractionMatrix im;
    im.m = nf;
    im.values.assign(nf * nf, 0.0);

    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = i + 1; j < nf; ++j) {
            const std::size_t bi = std::size_t{1} << i;
            const std::size_t bj = std::size_t{1} << j;
            double total = 0.0;
            for (std::size_t mask = 0; mask < v.size(); ++mask) {
                if (mask & (bi | bj)) continue;
                const int s = std::popcount(mask);
                const double w = fact[s] * fact[nf - s - 2] / fact[nf];
                total += w * (v[mask | bi | bj] - v[mask | bi] - v[mask | bj] + v[mask]);
            }
            im.at(i, j) = 0.5 * total;
            im.at(j, i) = 0.5 * total;
        }
    }
    for (std::size_t i = 0; i < nf; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < nf; ++j)
            if (j != i) off += im.at(i, j);
        im.at(i, i) = a.phi[i] - off;
    }
    return im;
}

GlobalImportance global_importance(const Ensemble& m, const Dataset& d, Execution exec) {
    if (d.rows.empty()) throw std::invalid_argument("global_importance: empty dataset");
    const auto attributions = tree_shap_batch(m, d, exec);
    const std::size_t nf = m.n_features();

    GlobalImportance gi;
    gi.per_instance.reserve(attributions.size());
    std::vector<double> scores(nf, 0.0);
    for (const auto& a : attributions) {
        for (std::size_t j = 0; j < nf; ++j) scores[j] += std::abs(a.phi[j]);
        gi.per_instance.push_back(a.phi);
    }

    std::vector<std::size_t> order(nf);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    for (std::size_t j : order) gi.ranking.emplace_back(m.feature_names[j], scores[j]);
    return gi;
}

DependenceData dependence_data(const Ensemble& m, const Dataset& d, int feature) {
    const std::size_t nf = m.n_features();
    if (feature < 0 || static_cast<std::size_t>(feature) >= nf)
        throw std::invalid_argument("dependence_data: feature index out of range");

    std::vector<InteractionMatrix> per_row(d.rows.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(d.rows.size()); ++i)
        per_row[i] = interactions(m, d.rows[i].values);

    std::vector<double> mass(nf, 0.0);
    for (const auto& im : per_row)
        for (std::size_t j = 0; j < nf; ++j)
            if (j != static_cast<std::size_t>(feature)) mass[j] += std::abs(im.at(feature, j));

    DependenceData dd;
    dd.feature = feature;
    dd.color_feature = feature;  // self when no other feature interacts
    double best = 0.0;
    for (std::size_t j = 0; j < nf; ++j) {
        if (j == static_cast<std::size_t>(feature)) continue;
        if (mass[j] > best) {
            best = mass[j];
            dd.color_feature = static_cast<int>(j);
        }
    }

    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        const auto& im = per_row[i];
        DependenceRecord rec;
        const double fv = d.rows[i].values[feature];
        rec.feature_missing = is_missing(fv);
        rec.feature_value = rec.feature_missing ? 0.0 : fv;
        rec.main_effect = im.at(feature, feature);
        double total = 0.0;
        for (std::size_t j = 0; j < nf; ++j) total += im.at(feature, j);
        rec.phi_total = total;
        const double cv = d.rows[i].values[dd.color_feature];
        rec.color_missing = is_missing(cv);
        rec.color_value = rec.color_missing ? 0.0 : cv;
        dd.records.push_back(rec);
    }
    return dd;
}

ForceRecord force_data(const Ensemble& m, const Schema& schema, std::span<const double> x) {
    const Attribution a = tree_shap(m, x);
    ForceRecord fr;
    fr.base_value = a.base_value;
    fr.output = a.output();
    for (std::size_t j = 0; j < a.phi.size(); ++j) {
        if (a.phi[j] == 0.0) continue;
        ForceRecord::Item item;
        item.variable = j < schema.size() ? schema[j].name : m.feature_names[j];
        item.missing = is_missing(x[j]);
        item.value = item.missing ? 0.0 : x[j];
        item.phi = a.phi[j];
        fr.contributions.push_back(std::move(item));
    }
    std::stable_sort(fr.contributions.begin(), fr.contributions.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.phi) > std::abs(b.phi); });
    return fr;
}

nlohmann::json to_json(const Attribution& a) {
    nlohmann::json instance = nlohmann::json::array();
    for (double v : a.instance)
        instance.push_back(is_missing(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    return {{"base_value", a.base_value},
            {"phi", a.phi},
            {"instance", instance},
            {"output", a.output()}};
}

nlohmann::json to_json(const InteractionMatrix& im) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < im.m; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < im.m; ++j) row.push_back(im.at(i, j));
        rows.push_back(std::move(row));
    }
    return {{"values", rows}};
}

nlohmann::json to_json(const GlobalImportance& gi) {
    nlohmann::json ranking = nlohmann::json::array();
    for (const auto& [name, score] : gi.ranking)
        ranking.push_back({{"variable", name}, {"score", score}});
    return {{"ranking", ranking}, {"per_instance", gi.per_instance}};
}

nlohmann::json to_json(const ForceRecord& fr) {
    nlohmann::json contributions = nlohmann::json::array();
    for (const auto& c : fr.contributions)
        contributions.push_back({{"variable", c.variable},
                                 {"value", c.missing ? nlohmann::json(nullptr) : nlohmann::json(c.value)},
                                 {"phi", c.phi}});
    return {{"base_value", fr.base_value}, {"output", fr.output}, {"contributions", contributions}};
}

nlohmann::json to_json(const DependenceData& dd, const Schema& schema) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : dd.records)
        records.push_back(
            {{"feature_value", r.feature_missing ? nlohmann::json(nullptr) : nlohmann::json(r.feature_value)},
             {"main_effect", r.main_effect},
             {"phi_total", r.phi_total},
             {"color_value", r.color_missing ? nlohmann::json(nullptr) : nlohmann::json(r.color_value)}});
    return {{"feature", schema[dd.feature].name},
            {"color_feature", schema[dd.color_feature].name},
            {"records", records}};
}

std::string dependence_csv(const DependenceData& dd) {
    std::string out = "feature_value,main_effect,phi_total,color_feature,color_value\n";
    for (const auto& r : dd.records) {
        if (!r.feature_missing) out += format_double(r.feature_value);
        out += ',';
        out += format_double(r.main_effect);
        out += ',';
        out += format_double(r.phi_total);
        out += ',';
        out += std::to_string(dd.color_feature);
        out += ',';
        if (!r.color_missing) out += format_double(r.color_value);
        out += '\n';
    }
    return out;
}

}  // namespace takeover
