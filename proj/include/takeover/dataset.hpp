#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "takeover/schema.hpp"

#include "json.hpp"

namespace takeover {

/// One observation: a value per schema variable (NaN = missing) plus the
/// takeover time target in seconds.
struct Sample {
    std::vector<double> values;
    double target = 0.0;
};

struct Dataset {
    Schema schema;
    std::vector<Sample> rows;
    std::string provenance = "user";  // study | synthetic | user

    std::size_t n_features() const { return schema.size(); }
    std::size_t n_rows() const { return rows.size(); }

    /// Projection onto a named feature subset, preserving row order.
    Dataset select_features(const std::vector<std::string>& names) const;

    std::vector<double> targets() const;
};

struct SummaryStats {
    std::size_t row_count = 0;
    double missing_fraction = 0.0;
    double target_min = 0.0;
    double target_max = 0.0;
    double target_mean = 0.0;
    std::vector<std::size_t> histogram;  // 1 s bins starting at 0
};

struct PreprocessOptions {
    bool merge_time_budgets = true;
    double outlier_threshold = 9.0;  // seconds; rows above are dropped
};

/// Parse failure with 1-based row/column position (row 0 = header).
class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t row, std::size_t col, const std::string& what)
        : std::runtime_error("row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": " + what),
          row_(row), col_(col) {}
    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

  private:
    std::size_t row_, col_;
};

/// CSV ingestion. The header must name every schema variable plus exactly
/// one extra column, which is taken as the target. Empty cells are missing;
/// the target may never be missing.
Dataset parse_table(std::string_view csv, const Schema& schema);

/// Inverse of parse_table (schema column order, target last).
std::string serialize_table(const Dataset& d);

Dataset load_csv(const std::string& path, const Schema& schema);
void save_csv(const Dataset& d, const std::string& path);

/// Merges TBTC/TBTB into one column and drops outlier targets. Idempotent.
Dataset preprocess(const Dataset& d, const PreprocessOptions& opts);

SummaryStats summarize(const Dataset& d);

nlohmann::json to_json(const SummaryStats& s);
nlohmann::json schema_to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& j);

/// Round-trip-precision decimal formatting (shortest representation that
/// parses back to the same double).
std::string format_double(double v);

}  // namespace takeover
