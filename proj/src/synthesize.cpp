#include "takeover/synthesize.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace takeover {

namespace {

double piecewise_eval(const std::vector<std::pair<double, double>>& knots, double x) {
    if (knots.empty()) return 0.0;
    if (x <= knots.front().first) return knots.front().second;
    if (x >= knots.back().first) return knots.back().second;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (x <= knots[i].first) {
            const auto& [x0, y0] = knots[i - 1];
            const auto& [x1, y1] = knots[i];
            const double t = (x - x0) / (x1 - x0);
            return y0 + t * (y1 - y0);
        }
    }
    return knots.back().second;
}

}  // namespace

double GeneratorSpec::evaluate(const Schema& schema, const std::vector<double>& values) const {
    double y = intercept;
    for (const auto& term : piecewise) {
        const int i = find_variable(schema, term.variable);
        if (i < 0) throw std::invalid_argument("generator: unknown variable " + term.variable);
        const double v = values[i];
        if (!is_missing(v)) y += piecewise_eval(term.knots, v);
    }
    for (const auto& term : coded) {
        const int i = find_variable(schema, term.variable);
        if (i < 0) throw std::invalid_argument("generator: unknown variable " + term.variable);
        const double v = values[i];
        if (is_missing(v)) continue;
        const auto& levels = schema[i].levels;
        const int base = levels.empty() ? 0 : levels.front();
        const int pos = static_cast<int>(v) - base;
        if (pos >= 0 && pos < static_cast<int>(term.offsets.size())) y += term.offsets[pos];
    }
    for (const auto& term : products) {
        const int a = find_variable(schema, term.a);
        const int b = find_variable(schema, term.b);
        if (a < 0 || b < 0)
            throw std::invalid_argument("generator: unknown variable in product term");
        if (!is_missing(values[a]) && !is_missing(values[b]))
            y += term.coefficient * values[a] * values[b];
    }
    return y;
}

GeneratorSpec GeneratorSpec::takeover_like() {
    GeneratorSpec g;
    g.intercept = 0.8;
    g.piecewise.push_back({kMergedTimeBudgetName, {{2.0, 0.2}, {30.0, 3.0}}});
    g.piecewise.push_back({"AGE", {{18.0, 0.0}, {45.0, 1.2}, {70.0, 0.3}}});
    g.coded.push_back({"URG", {1.4, 0.6, 0.0}});
    g.coded.push_back({"HAND", {0.0, 0.7}});
    g.coded.push_back({"TOR_V", {0.0, 0.4}});
    g.noise_sd = 0.3;
    g.missing_rate = 0.05;
    return g;
}

Dataset synthesize(const Schema& schema, const GeneratorSpec& spec, std::uint64_t seed) {
    validate_schema(schema);
    if (spec.rows == 0) throw std::invalid_argument("synthesize: row count must be positive");
    if (spec.missing_rate < 0.0 || spec.missing_rate > 1.0)
        throw std::invalid_argument("synthesize: missingness rate outside [0,1]");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    Dataset d;
    d.schema = schema;
    d.provenance = "synthetic";
    d.rows.reserve(spec.rows);

    for (std::size_t r = 0; r < spec.rows; ++r) {
        Sample s;
        s.values.reserve(schema.size());
        for (const auto& var : schema) {
            double v;
            if (var.kind == VarKind::Continuous) {
                if (var.unit == "years")
                    v = 18.0 + 52.0 * unit(rng);
                else if (var.unit == "seconds")
                    v = 2.0 + 28.0 * unit(rng);
                else
                    v = 10.0 * unit(rng);
            } else {
                const std::size_t k =
                    std::min(var.levels.size() - 1,
                             static_cast<std::size_t>(unit(rng) * static_cast<double>(var.levels.size())));
                v = static_cast<double>(var.levels[k]);
            }
            s.values.push_back(v);
        }
        double y = spec.evaluate(schema, s.values);
        if (spec.noise_sd > 0.0) y += spec.noise_sd * noise(rng);
        s.target = std::max(y, 1e-3);

        // Missingness is applied after the target so the generating
        // function sees the complete row.
        if (spec.missing_rate > 0.0)
            for (double& v : s.values)
                if (unit(rng) < spec.missing_rate) v = missing_value();

        d.rows.push_back(std::move(s));
    }
    return d;
}

}  // namespace takeover
