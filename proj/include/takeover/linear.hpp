#pragma once

#include <span>
#include <string>
#include <vector>

#include "takeover/dataset.hpp"

#include "json.hpp"

namespace takeover {

/// Ordinary least squares model with per-column mean imputation for
/// missing values (fitted means travel with the model).
struct LinearModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<std::string> feature_names;
    std::vector<double> column_means;  // imputation values, one per feature

    double predict(std::span<const double> x) const;
};

/// Least-squares fit via the normal equations. Throws on rank deficiency,
/// naming the offending column.
LinearModel fit_ols(const Dataset& d);

nlohmann::json to_json(const LinearModel& lm);

}  // namespace takeover
