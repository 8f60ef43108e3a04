#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "takeover/dataset.hpp"

namespace takeover {

/// Piecewise-linear contribution of one continuous variable, given as
/// (x, y) knots. Linear between knots, constant beyond the extremes.
struct PiecewiseTerm {
    std::string variable;
    std::vector<std::pair<double, double>> knots;
};

/// Additive offset per code of a binary/ordinal variable, indexed by
/// position in the variable's level list.
struct CodedTerm {
    std::string variable;
    std::vector<double> offsets;
};

/// Product interaction between two variables.
struct ProductTerm {
    std::string a;
    std::string b;
    double coefficient = 0.0;
};

/// Ground-truth target function plus sampling parameters for synthetic
/// datasets. The generator can evaluate its own function, so tests can
/// score how well a model recovered it.
struct GeneratorSpec {
    std::size_t rows = 519;
    double intercept = 1.0;
    std::vector<PiecewiseTerm> piecewise;
    std::vector<CodedTerm> coded;
    std::vector<ProductTerm> products;
    double noise_sd = 0.0;       // seconds
    double missing_rate = 0.0;   // per predictor cell

    /// Noise-free target for one row; missing inputs contribute nothing.
    double evaluate(const Schema& schema, const std::vector<double>& values) const;

    /// Signal in TBTC&TBTB (slope), AGE (piecewise peak at 45) and coded
    /// offsets for URG / HAND / TOR_V, mirroring the study's main effects.
    static GeneratorSpec takeover_like();
};

/// Deterministic for a fixed seed. Targets are clamped to stay positive.
Dataset synthesize(const Schema& schema, const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace takeover
