#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

namespace takeover {

struct MetricsReport {
    double rmse = 0.0;
    double mae = 0.0;
    double adj_r2 = 0.0;           // explained-variance form
    double adj_r2_standard = 0.0;  // conventional 1 - SSE/SST form
    double corr = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
};

double rmse(std::span<const double> y, std::span<const double> yhat);
double mae(std::span<const double> y, std::span<const double> yhat);

/// Adjusted R^2 with R^2 = sum (yhat - ybar)^2 / sum (y - ybar)^2
/// (explained variance over total variance). Requires n > m + 1 and a
/// non-constant target.
double adj_r2(std::span<const double> y, std::span<const double> yhat, std::size_t m);

/// Same adjustment applied to the conventional 1 - SSE/SST.
double adj_r2_standard(std::span<const double> y, std::span<const double> yhat, std::size_t m);

/// Pearson correlation; both vectors must be non-constant.
double corr(std::span<const double> y, std::span<const double> yhat);

MetricsReport score(std::span<const double> y, std::span<const double> yhat, std::size_t m);

nlohmann::json to_json(const MetricsReport& r);

}  // namespace takeover
