#include "takeover/schema.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace takeover {

bool VariableSpec::admits_code(double v) const {
    if (kind == VarKind::Continuous) return std::isfinite(v);
    if (!std::isfinite(v) || v != std::floor(v)) return false;
    const int code = static_cast<int>(v);
    return std::find(levels.begin(), levels.end(), code) != levels.end();
}

namespace {

VariableSpec binary(std::string name, std::string unit) {
    return {std::move(name), VarKind::Binary, {0, 1}, std::move(unit)};
}

}  // namespace

Schema study_schema() {
    Schema s;
    s.push_back({"AGE", VarKind::Continuous, {}, "years"});
    s.push_back(binary("LAD", "0 = L2; 1 = L3 and above"));
    s.push_back({"SIM", VarKind::Ordinal, {0, 1, 2}, "0 = low; 1 = medium; 2 = high fidelity"});
    s.push_back(binary("TOR_V", "visual TOR present"));
    s.push_back(binary("TOR_A", "auditory TOR present"));
    s.push_back(binary("TOR_VT", "vibrotactile TOR present"));
    s.push_back(binary("TOR_P", "TOR present"));
    s.push_back(binary("NDT_V", "visual NDT"));
    s.push_back(binary("NDT_A", "auditory NDT"));
    s.push_back(binary("NDT_M", "hand operation needed"));
    s.push_back(binary("NDT_C", "high cognitive load NDT"));
    s.push_back(binary("HAND", "0 = hands-free; 1 = handheld"));
    s.push_back(binary("NDT_P", "NDT present"));
    s.push_back({"TBTC", VarKind::Continuous, {}, "seconds"});
    s.push_back({"TBTB", VarKind::Continuous, {}, "seconds"});
    s.push_back({"URG", VarKind::Ordinal, {0, 1, 2}, "0 = low; 1 = medium; 2 = high urgency"});
    s.push_back({"DRE", VarKind::Ordinal, {1, 2, 3}, "1 = low; 2 = medium; 3 = high complexity"});
    s.push_back(binary("IRU", "interaction with road users"));
    return s;
}

Schema merged_study_schema() {
    Schema out;
    for (auto& v : study_schema()) {
        if (v.name == "TBTB") continue;
        if (v.name == "TBTC") v.name = kMergedTimeBudgetName;
        out.push_back(std::move(v));
    }
    return out;
}

void validate_schema(const Schema& schema) {
    std::unordered_set<std::string> seen;
    for (const auto& v : schema) {
        if (v.name.empty()) throw std::invalid_argument("schema: empty variable name");
        if (!seen.insert(v.name).second)
            throw std::invalid_argument("schema: duplicate variable name " + v.name);
        if (v.kind == VarKind::Binary && v.levels != std::vector<int>{0, 1})
            throw std::invalid_argument("schema: binary variable " + v.name +
                                        " must have levels {0,1}");
        if (v.kind == VarKind::Ordinal) {
            if (v.levels.size() < 2)
                throw std::invalid_argument("schema: ordinal variable " + v.name +
                                            " needs at least two levels");
            if (v.levels.front() != 0 && v.levels.front() != 1)
                throw std::invalid_argument("schema: ordinal variable " + v.name +
                                            " must start at 0 or 1");
            for (std::size_t i = 1; i < v.levels.size(); ++i)
                if (v.levels[i] != v.levels[i - 1] + 1)
                    throw std::invalid_argument("schema: ordinal variable " + v.name +
                                                " has non-contiguous levels");
        }
        if (v.kind == VarKind::Continuous && !v.levels.empty())
            throw std::invalid_argument("schema: continuous variable " + v.name +
                                        " must not list levels");
    }
}

int find_variable(const Schema& schema, const std::string& name) {
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == name) return static_cast<int>(i);
    return -1;
}

std::uint64_t schema_fingerprint(const Schema& schema) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 1099511628211ull;
    };
    for (const auto& v : schema) {
        for (char c : v.name) mix(static_cast<unsigned char>(c));
        mix(0);
        mix(static_cast<unsigned char>(v.kind));
        for (int lv : v.levels) {
            mix(static_cast<unsigned char>(lv & 0xff));
            mix(static_cast<unsigned char>((lv >> 8) & 0xff));
        }
        mix(0xff);
    }
    return h;
}

std::string kind_name(VarKind k) {
    switch (k) {
        case VarKind::Binary: return "binary";
        case VarKind::Ordinal: return "ordinal";
        case VarKind::Continuous: return "continuous";
    }
    return "continuous";
}

VarKind kind_from_name(const std::string& s) {
    if (s == "binary") return VarKind::Binary;
    if (s == "ordinal") return VarKind::Ordinal;
    if (s == "continuous") return VarKind::Continuous;
    throw std::invalid_argument("unknown variable kind: " + s);
}

}  // namespace takeover
