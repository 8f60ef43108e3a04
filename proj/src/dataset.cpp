#include "takeover/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace takeover {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col,
                    const std::string& column_name) {
    const std::string t = trim(cell);
    double v;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw ParseError(row, col, "non-numeric cell '" + cell + "' in column " + column_name);
    return v;
}

std::string levels_text(const VariableSpec& v) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.levels.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v.levels[i]);
    }
    return out + "}";
}

}  // namespace

std::vector<double> Dataset::targets() const {
    std::vector<double> y;
    y.reserve(rows.size());
    for (const auto& r : rows) y.push_back(r.target);
    return y;
}

Dataset Dataset::select_features(const std::vector<std::string>& names) const {
    Dataset out;
    out.provenance = provenance;
    std::vector<int> idx;
    for (const auto& name : names) {
        int i = find_variable(schema, name);
        if (i < 0) throw std::invalid_argument("select_features: unknown variable " + name);
        out.schema.push_back(schema[i]);
        idx.push_back(i);
    }
    out.rows.reserve(rows.size());
    for (const auto& r : rows) {
        Sample s;
        s.target = r.target;
        s.values.reserve(idx.size());
        for (int i : idx) s.values.push_back(r.values[i]);
        out.rows.push_back(std::move(s));
    }
    return out;
}

Dataset parse_table(std::string_view csv, const Schema& schema) {
    validate_schema(schema);
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : csv) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) lines.push_back(cur);
    }
    if (lines.empty()) throw ParseError(0, 0, "empty input");

    const auto header = split_record(lines[0]);
    std::vector<int> column_to_feature(header.size(), -1);
    int target_col = -1;
    std::vector<bool> feature_seen(schema.size(), false);
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        int fi = find_variable(schema, name);
        if (fi >= 0) {
            if (feature_seen[fi])
                throw ParseError(0, c + 1, "duplicate column " + name);
            feature_seen[fi] = true;
            column_to_feature[c] = fi;
        } else {
            if (target_col >= 0)
                throw ParseError(0, c + 1, "column " + name +
                                               " is not in the schema and a target column (" +
                                               trim(header[target_col]) + ") was already found");
            target_col = static_cast<int>(c);
        }
    }
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (!feature_seen[i])
            throw ParseError(0, 0, "header is missing schema column " + schema[i].name);
    if (target_col < 0) throw ParseError(0, 0, "header has no target column");

    Dataset d;
    d.schema = schema;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty() && li == lines.size() - 1) break;
        const auto cells = split_record(lines[li]);
        if (cells.size() != header.size())
            throw ParseError(li, cells.size(), "expected " + std::to_string(header.size()) +
                                                   " cells, found " + std::to_string(cells.size()));
        Sample s;
        s.values.assign(schema.size(), missing_value());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const bool empty = trim(cells[c]).empty();
            if (static_cast<int>(c) == target_col) {
                if (empty) throw ParseError(li, c + 1, "missing target value");
                s.target = parse_number(cells[c], li, c + 1, trim(header[c]));
                if (!(s.target > 0.0) || !std::isfinite(s.target))
                    throw ParseError(li, c + 1, "target must be strictly positive and finite");
                continue;
            }
            if (empty) continue;
            const int fi = column_to_feature[c];
            const auto& var = schema[fi];
            const double v = parse_number(cells[c], li, c + 1, var.name);
            if (!var.admits_code(v))
                throw ParseError(li, c + 1, "value " + trim(cells[c]) + " is not an admissible code for " +
                                                var.name + " (admissible: " + levels_text(var) + ")");
            s.values[fi] = v;
        }
        d.rows.push_back(std::move(s));
    }
    return d;
}

std::string serialize_table(const Dataset& d) {
    std::string out;
    for (const auto& v : d.schema) {
        out += v.name;
        out += ',';
    }
    out += kTargetColumnName;
    out += '\n';
    for (const auto& r : d.rows) {
        for (double v : r.values) {
            if (!is_missing(v)) out += format_double(v);
            out += ',';
        }
        out += format_double(r.target);
        out += '\n';
    }
    return out;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_table(ss.str(), schema);
}

void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize_table(d);
}

Dataset preprocess(const Dataset& d, const PreprocessOptions& opts) {
    Dataset out;
    out.provenance = d.provenance;

    const int tbtc = find_variable(d.schema, "TBTC");
    const int tbtb = find_variable(d.schema, "TBTB");
    const bool merge = opts.merge_time_budgets && tbtc >= 0 && tbtb >= 0;

    if (merge) {
        for (std::size_t i = 0; i < d.schema.size(); ++i) {
            if (static_cast<int>(i) == tbtb) continue;
            VariableSpec v = d.schema[i];
            if (static_cast<int>(i) == tbtc) v.name = kMergedTimeBudgetName;
            out.schema.push_back(std::move(v));
        }
    } else {
        out.schema = d.schema;
    }

    for (const auto& r : d.rows) {
        if (r.target > opts.outlier_threshold) continue;
        if (!merge) {
            out.rows.push_back(r);
            continue;
        }
        Sample s;
        s.target = r.target;
        for (std::size_t i = 0; i < d.schema.size(); ++i) {
            if (static_cast<int>(i) == tbtb) continue;
            double v = r.values[i];
            // Merged column: TBTC when present, else TBTB.
            if (static_cast<int>(i) == tbtc && is_missing(v)) v = r.values[tbtb];
            s.values.push_back(v);
        }
        out.rows.push_back(std::move(s));
    }
    return out;
}

SummaryStats summarize(const Dataset& d) {
    if (d.rows.empty()) throw std::invalid_argument("summarize: empty dataset");
    SummaryStats s;
    s.row_count = d.rows.size();
    std::size_t missing = 0;
    s.target_min = d.rows.front().target;
    s.target_max = d.rows.front().target;
    double sum = 0.0;
    for (const auto& r : d.rows) {
        for (double v : r.values)
            if (is_missing(v)) ++missing;
        s.target_min = std::min(s.target_min, r.target);
        s.target_max = std::max(s.target_max, r.target);
        sum += r.target;
    }
    s.target_mean = sum / static_cast<double>(s.row_count);
    s.missing_fraction = d.schema.empty()
                             ? 0.0
                             : static_cast<double>(missing) /
                                   (static_cast<double>(s.row_count) * d.schema.size());
    const std::size_t bins = static_cast<std::size_t>(std::floor(s.target_max)) + 1;
    s.histogram.assign(bins, 0);
    for (const auto& r : d.rows) ++s.histogram[static_cast<std::size_t>(std::floor(r.target))];
    return s;
}

nlohmann::json to_json(const SummaryStats& s) {
    return {{"row_count", s.row_count},
            {"missing_fraction", s.missing_fraction},
            {"target_min", s.target_min},
            {"target_max", s.target_max},
            {"target_mean", s.target_mean},
            {"histogram", s.histogram}};
}

nlohmann::json schema_to_json(const Schema& schema) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : schema)
        arr.push_back({{"name", v.name},
                       {"kind", kind_name(v.kind)},
                       {"levels", v.levels},
                       {"unit", v.unit}});
    return arr;
}

Schema schema_from_json(const nlohmann::json& j) {
    Schema s;
    for (const auto& e : j) {
        VariableSpec v;
        v.name = e.at("name").get<std::string>();
        v.kind = kind_from_name(e.at("kind").get<std::string>());
        v.levels = e.at("levels").get<std::vector<int>>();
        v.unit = e.value("unit", "");
        s.push_back(std::move(v));
    }
    validate_schema(s);
    return s;
}

}  // namespace takeover
