#include "takeover/linear.hpp"

#include <cmath>
#include <stdexcept>

namespace takeover {

double LinearModel::predict(std::span<const double> x) const {
    if (x.size() != coefficients.size())
        throw std::invalid_argument("linear predict: arity mismatch");
    double y = intercept;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double v = is_missing(x[j]) ? column_means[j] : x[j];
        y += coefficients[j] * v;
    }
    return y;
}

LinearModel fit_ols(const Dataset& d) {
    const std::size_t n = d.rows.size();
    const std::size_t p = d.schema.size() + 1;  // intercept first
    if (n == 0) throw std::invalid_argument("fit_ols: empty dataset");

    LinearModel lm;
    for (const auto& v : d.schema) lm.feature_names.push_back(v.name);

    lm.column_means.assign(d.schema.size(), 0.0);
    for (std::size_t j = 0; j < d.schema.size(); ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& r : d.rows) {
            if (is_missing(r.values[j])) continue;
            sum += r.values[j];
            ++count;
        }
        lm.column_means[j] = count ? sum / static_cast<double>(count) : 0.0;
    }

    auto design = [&](std::size_t i, std::size_t j) -> double {
        if (j == 0) return 1.0;
        const double v = d.rows[i].values[j - 1];
        return is_missing(v) ? lm.column_means[j - 1] : v;
    };

    // Normal equations A b = c with A = X'X, c = X'y.
    std::vector<double> a(p * p, 0.0), c(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double xj = design(i, j);
            c[j] += xj * d.rows[i].target;
            for (std::size_t k = j; k < p; ++k) a[j * p + k] += xj * design(i, k);
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < j; ++k) a[j * p + k] = a[k * p + j];

    // Gaussian elimination with partial pivoting.
    std::vector<std::size_t> col_of(p);
    for (std::size_t j = 0; j < p; ++j) col_of[j] = j;
    const double scale = [&] {
        double s = 0.0;
        for (double v : a) s = std::max(s, std::abs(v));
        return s > 0.0 ? s : 1.0;
    }();
    for (std::size_t j = 0; j < p; ++j) {
        std::size_t piv = j;
        for (std::size_t i = j + 1; i < p; ++i)
            if (std::abs(a[i * p + j]) > std::abs(a[piv * p + j])) piv = i;
        if (std::abs(a[piv * p + j]) < 1e-10 * scale) {
            const std::string col =
                j == 0 ? std::string("intercept") : d.schema[j - 1].name;
            throw std::runtime_error("fit_ols: design matrix is rank deficient at column " + col);
        }
        if (piv != j) {
            for (std::size_t k = 0; k < p; ++k) std::swap(a[piv * p + k], a[j * p + k]);
            std::swap(c[piv], c[j]);
        }
        for (std::size_t i = j + 1; i < p; ++i) {
            const double f = a[i * p + j] / a[j * p + j];
            for (std::size_t k = j; k < p; ++k) a[i * p + k] -= f * a[j * p + k];
            c[i] -= f * c[j];
        }
    }
    std::vector<double> beta(p, 0.0);
    for (std::size_t jj = p; jj-- > 0;) {
        double s = c[jj];
        for (std::size_t k = jj + 1; k < p; ++k) s -= a[jj * p + k] * beta[k];
        beta[jj] = s / a[jj * p + jj];
    }

    lm.intercept = beta[0];
    lm.coefficients.assign(beta.begin() + 1, beta.end());
    return lm;
}

nlohmann::json to_json(const LinearModel& lm) {
    return {{"intercept", lm.intercept},
            {"coefficients", lm.coefficients},
            {"feature_names", lm.feature_names},
            {"column_means", lm.column_means}};
}

}  // namespace takeover
