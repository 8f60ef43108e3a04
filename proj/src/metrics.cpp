#include "takeover/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace takeover {

namespace {

void check_pair(std::span<const double> y, std::span<const double> yhat) {
    if (y.empty()) throw std::invalid_argument("metrics: empty input");
    if (y.size() != yhat.size()) throw std::invalid_argument("metrics: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!std::isfinite(y[i]) || !std::isfinite(yhat[i]))
            throw std::invalid_argument("metrics: non-finite value");
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double adjust(double r2, std::size_t n, std::size_t m) {
    if (n <= m + 1) throw std::invalid_argument("adj_r2: need N > M + 1");
    return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - m - 1);
}

double total_variance_about_mean(std::span<const double> y, double ybar) {
    double s = 0.0;
    for (double v : y) s += (v - ybar) * (v - ybar);
    return s;
}

}  // namespace

double rmse(std::span<const double> y, std::span<const double> yhat) {
    check_pair(y, yhat);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> yhat) {
    check_pair(y, yhat);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

double adj_r2(std::span<const double> y, std::span<const double> yhat, std::size_t m) {
    check_pair(y, yhat);
    const double ybar = mean(y);
    const double sst = total_variance_about_mean(y, ybar);
    if (sst == 0.0) throw std::invalid_argument("adj_r2: zero target variance");
    const double explained = total_variance_about_mean(yhat, ybar);
    return adjust(explained / sst, y.size(), m);
}

double adj_r2_standard(std::span<const double> y, std::span<const double> yhat, std::size_t m) {
    check_pair(y, yhat);
    const double ybar = mean(y);
    const double sst = total_variance_about_mean(y, ybar);
    if (sst == 0.0) throw std::invalid_argument("adj_r2: zero target variance");
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        sse += d * d;
    }
    return adjust(1.0 - sse / sst, y.size(), m);
}

double corr(std::span<const double> y, std::span<const double> yhat) {
    check_pair(y, yhat);
    const double ybar = mean(y);
    const double phat = mean(yhat);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double a = yhat[i] - phat;
        const double b = y[i] - ybar;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("corr: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

MetricsReport score(std::span<const double> y, std::span<const double> yhat, std::size_t m) {
    MetricsReport r;
    r.n = y.size();
    r.m = m;
    r.rmse = rmse(y, yhat);
    r.mae = mae(y, yhat);
    r.adj_r2 = adj_r2(y, yhat, m);
    r.adj_r2_standard = adj_r2_standard(y, yhat, m);
    r.corr = corr(y, yhat);
    return r;
}

nlohmann::json to_json(const MetricsReport& r) {
    return {{"rmse", r.rmse},
            {"mae", r.mae},
            {"adj_r2", r.adj_r2},
            {"adj_r2_standard", r.adj_r2_standard},
            {"corr", r.corr},
            {"n", r.n},
            {"m", r.m}};
}

}  // namespace takeover
