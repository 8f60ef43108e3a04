#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"

#include "takeover/pipeline.hpp"
#include "takeover/synthesize.hpp"

using namespace takeover;
using namespace test_util;

namespace {

std::vector<std::string> feature_names(const Schema& s) {
    std::vector<std::string> out;
    for (const auto& v : s) out.push_back(v.name);
    return out;
}

/// Small dataset with a depth-2 interaction between the first two features.
Dataset interaction_dataset(std::size_t rows, std::uint64_t seed, double noise_sd = 0.0) {
    Dataset d;
    d.schema = continuous_schema(3);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (std::size_t i = 0; i < rows; ++i) {
        const double x0 = unit(rng), x1 = unit(rng), x2 = unit(rng);
        const double y = (x0 >= 0.5 && x1 >= 0.5) ? 4.0 : 1.0;
        d.rows.push_back({{x0, x1, x2}, std::max(0.01, y + noise(rng))});
    }
    return d;
}

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
    std::vector<std::uint64_t> s(n);
    for (std::uint64_t i = 0; i < n; ++i) s[i] = i;
    return s;
}

}  // namespace

TEST_CASE("constant targets cross-validate to zero error") {
    Dataset d;
    d.schema = continuous_schema(2);
    d.rows = {{{0.1, 0.2}, 2.0}, {{0.3, 0.4}, 2.0}, {{0.5, 0.6}, 2.0}, {{0.7, 0.8}, 2.0}};
    const auto r = cross_validate(d, Hyperparams{.n_estimators = 5}, 2, seed_range(3),
                                  feature_names(d.schema));
    REQUIRE(r.per_seed.size() == 3);
    for (const auto& [seed, rep] : r.per_seed) CHECK(rep.rmse == doctest::Approx(0.0));
    CHECK(r.mean.rmse == doctest::Approx(0.0));
    CHECK(r.min_mae == doctest::Approx(0.0));
}

TEST_CASE("mean aggregation and mae extremes") {
    const auto d = interaction_dataset(80, 1, 0.3);
    const auto r = cross_validate(d, Hyperparams{.n_estimators = 20}, 4, seed_range(5),
                                  feature_names(d.schema));
    double rmse_sum = 0.0, mae_min = 1e300, mae_max = -1e300;
    for (const auto& [seed, rep] : r.per_seed) {
        rmse_sum += rep.rmse;
        mae_min = std::min(mae_min, rep.mae);
        mae_max = std::max(mae_max, rep.mae);
    }
    CHECK(r.mean.rmse == doctest::Approx(rmse_sum / 5.0).epsilon(1e-12));
    CHECK(r.min_mae == doctest::Approx(mae_min));
    CHECK(r.max_mae == doctest::Approx(mae_max));
    CHECK(r.min_mae <= r.mean.mae);
    CHECK(r.mean.mae <= r.max_mae);
}

TEST_CASE("cross_validate is deterministic and exec-policy independent") {
    const auto d = interaction_dataset(60, 2, 0.2);
    const auto p = Hyperparams{.n_estimators = 15, .subsample = 0.9};
    const auto a = cross_validate(d, p, 3, seed_range(4), feature_names(d.schema),
                                  Execution::Parallel);
    const auto b = cross_validate(d, p, 3, seed_range(4), feature_names(d.schema),
                                  Execution::Parallel);
    const auto c = cross_validate(d, p, 3, seed_range(4), feature_names(d.schema),
                                  Execution::Serial);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(to_json(a).dump() == to_json(c).dump());
}

TEST_CASE("cross_validate precondition errors") {
    const auto d = interaction_dataset(10, 3);
    CHECK_THROWS(cross_validate(d, Hyperparams{}, 1, seed_range(1), feature_names(d.schema)));
    CHECK_THROWS(cross_validate(d, Hyperparams{}, 11, seed_range(1), feature_names(d.schema)));
    CHECK_THROWS(cross_validate(d, Hyperparams{}, 2, seed_range(1), {}));
    CHECK_THROWS(cross_validate(d, Hyperparams{}, 2, seed_range(1), {"nonexistent"}));
}

TEST_CASE("grid_search") {
    const auto d = interaction_dataset(120, 4, 0.1);
    SUBCASE("a single grid point is returned as-is") {
        HyperGrid g;
        g.n_estimators = {30};
        g.learning_rate = {0.2};
        g.max_depth = {3};
        g.subsample = {1.0};
        g.colsample_bytree = {1.0};
        const auto [best, rep] = grid_search(d, g, 3, seed_range(2), feature_names(d.schema));
        CHECK(best.n_estimators == 30);
        CHECK(best.learning_rate == 0.2);
        CHECK(best.max_depth == 3);
        CHECK(std::isfinite(rep.mean.rmse));
    }
    SUBCASE("depth 3 beats depth 0 on interaction data") {
        HyperGrid g;
        g.n_estimators = {40};
        g.learning_rate = {0.3};
        g.max_depth = {0, 3};
        g.subsample = {1.0};
        g.colsample_bytree = {1.0};
        const auto [best, rep] = grid_search(d, g, 3, seed_range(2), feature_names(d.schema));
        CHECK(best.max_depth == 3);
    }
}

TEST_CASE("forward_select") {
    const Schema schema = merged_study_schema();
    SUBCASE("single informative feature") {
        GeneratorSpec g;
        g.rows = 250;
        g.piecewise.push_back({std::string(kMergedTimeBudgetName), {{2, 0.5}, {30, 5.0}}});
        g.noise_sd = 0.1;
        const auto d = synthesize(schema, g, 5);
        const auto rep = forward_select(d, Hyperparams{.n_estimators = 40}, 4, seed_range(3));
        REQUIRE(!rep.chosen.empty());
        CHECK(rep.chosen[0] == kMergedTimeBudgetName);
        CHECK(rep.chosen.size() <= 3);
        // Steps follow the ranking: step i adds exactly one feature.
        CHECK(rep.steps.size() >= rep.chosen.size());
        CHECK(rep.steps[0].report.feature_set.size() == 1);
    }
    SUBCASE("all-noise data keeps only the first-ranked feature") {
        GeneratorSpec g;
        g.rows = 150;
        g.noise_sd = 1.0;
        const auto d = synthesize(schema, g, 6);
        // Heavy regularization pins every prefix at the fold-mean
        // prediction, so no added feature can strictly improve RMSE.
        Hyperparams p;
        p.n_estimators = 30;
        p.reg_lambda = 1e6;
        const auto rep = forward_select(d, p, 3, seed_range(3));
        CHECK(rep.chosen.size() == 1);
    }
}

TEST_CASE("monotone information: adding the planted feature lowers RMSE") {
    const Schema schema = merged_study_schema();
    GeneratorSpec g;
    g.rows = 300;
    g.piecewise.push_back({std::string(kMergedTimeBudgetName), {{2, 0.5}, {30, 5.0}}});
    g.noise_sd = 0.2;
    const auto d = synthesize(schema, g, 7);
    const auto seeds = seed_range(20);
    const auto p = Hyperparams{.n_estimators = 40};

    const auto noise_only = cross_validate(d, p, 4, seeds, {"AGE"});
    const auto with_signal =
        cross_validate(d, p, 4, seeds, {"AGE", std::string(kMergedTimeBudgetName)});

    double var = 0.0;
    for (const auto& [seed, rep] : noise_only.per_seed) {
        const double dlt = rep.rmse - noise_only.mean.rmse;
        var += dlt * dlt;
    }
    const double sd = std::sqrt(var / 20.0);
    CHECK(noise_only.mean.rmse - with_signal.mean.rmse > sd);
}

TEST_CASE("bin_analysis") {
    const auto d = interaction_dataset(100, 8, 0.2);  // targets near 1 and 4
    const auto p = Hyperparams{.n_estimators = 15};
    const auto features = feature_names(d.schema);
    const auto rep = bin_analysis(d, p, 3, seed_range(2), features, {0.5, 2.0, 10.0});
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].skipped);  // no targets below 0.5
    CHECK(!rep.rows[1].skipped);
    CHECK(!rep.rows[2].skipped);
    CHECK(rep.rows[1].sample_count <= rep.rows[2].sample_count);
    CHECK(rep.rows[2].sample_count == 100);

    // The all-inclusive bound reproduces plain cross-validation.
    const auto plain = cross_validate(d, p, 3, seed_range(2), features);
    CHECK(rep.rows[2].metrics.rmse == doctest::Approx(plain.mean.rmse).epsilon(1e-12));
    CHECK(rep.rows[2].min_mae == doctest::Approx(plain.min_mae));

    CHECK_THROWS(bin_analysis(d, p, 3, seed_range(2), features, {2.0, 1.0}));
}

TEST_CASE("linear baseline recovers an exact linear function") {
    Dataset d;
    d.schema = continuous_schema(3);
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 120; ++i) {
        const double x0 = unit(rng), x1 = unit(rng), x2 = unit(rng);
        d.rows.push_back({{x0, x1, x2}, 1.5 + 2.0 * x0 - 0.5 * x1 + 0.25 * x2});
    }
    const auto [model, rep] = fit_linear_baseline(d, feature_names(d.schema), 4, seed_range(3));
    CHECK(rep.mean.rmse < 1e-9);
    CHECK(model.intercept == doctest::Approx(1.5).epsilon(1e-6));
    REQUIRE(model.coefficients.size() == 3);
    CHECK(model.coefficients[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(model.coefficients[1] == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(model.coefficients[2] == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("intercept-only baseline predicts the training mean") {
    Dataset d;
    d.schema = continuous_schema(1);
    d.rows = {{{0.1}, 1.0}, {{0.2}, 2.0}, {{0.3}, 3.0}, {{0.4}, 6.0}};
    const auto [model, rep] = fit_linear_baseline(d, {}, 2, seed_range(1));
    CHECK(model.coefficients.empty());
    CHECK(model.intercept == doctest::Approx(3.0));  // full-data mean
    CHECK(model.predict(std::vector<double>{}) == doctest::Approx(3.0));
}

TEST_CASE("boosting beats the linear baseline on nonlinear data") {
    const auto d = interaction_dataset(250, 9, 0.2);
    const auto features = feature_names(d.schema);
    const auto seeds = seed_range(5);
    const auto boosted = cross_validate(d, Hyperparams{.n_estimators = 60}, 5, seeds, features);
    const auto [model, linear] = fit_linear_baseline(d, features, 5, seeds);
    CHECK(boosted.mean.rmse < linear.mean.rmse);
}

TEST_CASE("adj_r2 variants agree on in-sample least-squares fits") {
    Dataset d;
    d.schema = continuous_schema(2);
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (int i = 0; i < 80; ++i) {
        const double x0 = unit(rng), x1 = unit(rng);
        d.rows.push_back({{x0, x1}, 2.0 + x0 - 0.3 * x1 + noise(rng)});
    }
    const auto model = fit_ols(d);
    std::vector<double> yhat;
    for (const auto& r : d.rows) yhat.push_back(model.predict(r.values));
    // Residuals orthogonal to predictions: the two definitions coincide.
    CHECK(adj_r2(d.targets(), yhat, 2) ==
          doctest::Approx(adj_r2_standard(d.targets(), yhat, 2)).epsilon(1e-9));
}

TEST_CASE("rank deficiency names the offending column") {
    Dataset d;
    d.schema = continuous_schema(2);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double x = unit(rng);
        d.rows.push_back({{x, 2.0 * x}, x});  // x1 is collinear with x0
    }
    try {
        fit_ols(d);
        FAIL("expected rank deficiency");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("x1") != std::string::npos);
    }
}

TEST_CASE("report serialization") {
    const auto d = interaction_dataset(40, 10, 0.1);
    const auto features = feature_names(d.schema);
    const auto cv = cross_validate(d, Hyperparams{.n_estimators = 10}, 2, seed_range(2), features);
    const auto j = to_json(cv);
    CHECK(j.at("per_seed").size() == 2);
    CHECK(j.at("mean").at("rmse").get<double>() == cv.mean.rmse);
    CHECK(j.at("feature_set").size() == 3);

    const auto bins = bin_analysis(d, Hyperparams{.n_estimators = 10}, 2, seed_range(2),
                                   features, {10.0});
    const std::string csv = bin_csv(bins);
    CHECK(csv.rfind("upper_bound,samples,rmse,adj_r2,mae,min_mae,max_mae,corr", 0) == 0);

    Hyperparams p;
    p.max_depth = 5;
    p.reg_lambda = 2.5;
    const auto back = hyperparams_from_json(hyperparams_to_json(p));
    CHECK(back.max_depth == 5);
    CHECK(back.reg_lambda == 2.5);
    CHECK(back.n_estimators == p.n_estimators);
}
