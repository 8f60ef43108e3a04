#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "takeover/metrics.hpp"

using namespace takeover;

TEST_CASE("rmse") {
    std::vector<double> y{1, 2, 3}, same{1, 2, 3}, flat{2, 2, 2};
    CHECK(rmse(y, same) == 0.0);
    CHECK(rmse(y, flat) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    std::vector<double> shifted{2.5, 3.5, 4.5};
    CHECK(rmse(y, shifted) == doctest::Approx(1.5).epsilon(1e-12));
    const std::vector<double> empty, one{1.0};
    CHECK_THROWS(rmse(empty, empty));
    CHECK_THROWS(rmse(y, one));
}

TEST_CASE("mae") {
    std::vector<double> y{1, 2, 3}, flat{2, 2, 2};
    CHECK(mae(y, y) == 0.0);
    CHECK(mae(y, flat) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(mae(std::vector<double>{5.0}, std::vector<double>{3.5}) == doctest::Approx(1.5));
}

TEST_CASE("adjusted R^2, both variants") {
    std::vector<double> y{1, 2, 3, 4, 5};
    CHECK(adj_r2(y, y, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(adj_r2_standard(y, y, 2) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> null_model{3, 3, 3, 3, 3};
    CHECK(adj_r2(y, null_model, 1) < 0.0);

    std::vector<double> yhat{1.1, 1.9, 3.2, 3.8, 5.0};
    // Explained variance 9.5 over total 10 -> R^2 0.95, adjusted 0.9;
    // SSE 0.10 -> standard R^2 0.99, adjusted 0.98.
    CHECK(adj_r2(y, yhat, 2) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(adj_r2_standard(y, yhat, 2) == doctest::Approx(0.98).epsilon(1e-12));

    CHECK_THROWS(adj_r2(y, yhat, 4));                                  // N <= M+1
    CHECK_THROWS(adj_r2(null_model, yhat, 1));                         // constant target
}

TEST_CASE("Pearson correlation") {
    std::vector<double> y{1, 2, 3};
    std::vector<double> affine{3, 5, 7};  // 2y + 1
    CHECK(corr(y, affine) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> negated{-1, -2, -3};
    CHECK(corr(y, negated) == doctest::Approx(-1.0).epsilon(1e-12));
    std::vector<double> swapped{1, 3, 2};
    CHECK(corr(y, swapped) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS(corr(y, std::vector<double>{2, 2, 2}));
}

TEST_CASE("corr is shift invariant and rmse dominates mae") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> y(30), yhat(30), shifted(30);
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = unit(rng);
            yhat[i] = unit(rng);
            shifted[i] = yhat[i] + 3.7;
        }
        CHECK(corr(y, yhat) == doctest::Approx(corr(y, shifted)).epsilon(1e-9));
        CHECK(rmse(y, yhat) >= mae(y, yhat));
    }
}

TEST_CASE("score fills the full report") {
    std::vector<double> y{1, 2, 3, 4, 5}, yhat{1.1, 1.9, 3.2, 3.8, 5.0};
    const auto r = score(y, yhat, 2);
    CHECK(r.n == 5);
    CHECK(r.m == 2);
    CHECK(r.rmse >= r.mae);
    CHECK(r.corr <= 1.0);
    const auto j = to_json(r);
    CHECK(j.at("rmse").get<double>() == r.rmse);
    CHECK(j.at("adj_r2_standard").get<double>() == r.adj_r2_standard);
}
