#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace takeover {

enum class VarKind { Binary, Ordinal, Continuous };

/// One predictor variable: its coding kind, admissible integer codes
/// (empty for continuous variables) and a unit / code description.
struct VariableSpec {
    std::string name;
    VarKind kind = VarKind::Continuous;
    std::vector<int> levels;
    std::string unit;

    bool admits_code(double v) const;
};

using Schema = std::vector<VariableSpec>;

/// The 18-variable study schema (TBTC and TBTB still separate; they are
/// merged by preprocessing).
Schema study_schema();

/// The study schema after the time-budget merge: 17 predictors with a
/// single TBTC&TBTB column.
Schema merged_study_schema();

/// Checks uniqueness of names and level conventions; throws on violation.
void validate_schema(const Schema& schema);

int find_variable(const Schema& schema, const std::string& name);

/// FNV-1a hash over names, kinds and levels. Used to tie a trained model
/// to the schema it was trained on.
std::uint64_t schema_fingerprint(const Schema& schema);

std::string kind_name(VarKind k);
VarKind kind_from_name(const std::string& s);

inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

inline constexpr const char* kMergedTimeBudgetName = "TBTC&TBTB";
inline constexpr const char* kTargetColumnName = "takeover_time";

}  // namespace takeover
