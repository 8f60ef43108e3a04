// Timing comparison between the serial reference kernels and the
// OpenMP-parallel ones: split search during training and batched Shapley
// explanation. Not a correctness test (the unit suite asserts the two
// policies produce identical output); this just reports speedups.

#include <chrono>
#include <cstdio>
#include <string>

#include "takeover/booster.hpp"
#include "takeover/explain.hpp"
#include "takeover/synthesize.hpp"

using namespace takeover;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_best_of(int repeats, F&& f) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = clock_type::now();
        f();
        best = std::min(best,
                        std::chrono::duration<double>(clock_type::now() - t0).count());
    }
    return best;
}

void row(const char* name, double serial, double parallel) {
    std::printf("%-24s %10.3f s %10.3f s %8.2fx\n", name, serial, parallel,
                serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t rows = 2000;
    int trees = 100;
    if (argc > 1) rows = static_cast<std::size_t>(std::stoul(argv[1]));
    if (argc > 2) trees = std::stoi(argv[2]);

    GeneratorSpec g = GeneratorSpec::takeover_like();
    g.rows = rows;
    g.noise_sd = 0.3;
    g.missing_rate = 0.05;
    const auto d = synthesize(merged_study_schema(), g, 42);

    Hyperparams p;
    p.n_estimators = trees;
    p.max_depth = 6;

    std::printf("%zu rows, %d trees, depth %d\n\n", rows, trees, p.max_depth);
    std::printf("%-24s %12s %12s %9s\n", "kernel", "serial", "parallel", "speedup");

    const double train_serial = time_best_of(3, [&] { train(d, p, Execution::Serial); });
    const double train_parallel = time_best_of(3, [&] { train(d, p, Execution::Parallel); });
    row("train (split search)", train_serial, train_parallel);

    const auto m = train(d, p);
    const double shap_serial =
        time_best_of(3, [&] { tree_shap_batch(m, d, Execution::Serial); });
    const double shap_parallel =
        time_best_of(3, [&] { tree_shap_batch(m, d, Execution::Parallel); });
    row("tree_shap_batch", shap_serial, shap_parallel);

    return 0;
}
