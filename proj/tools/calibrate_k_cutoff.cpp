// Regenerates the frozen K cutoff table compiled into src/chaos/zero_one.cpp.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <vector>

#include "levdyn/chaos.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Calibrate the 0-1 test cutoff on logistic orbits"};
    std::vector<long> lengths{59, 295, 590, 1180, 5000};
    int per_class = 500;
    std::uint64_t seed = 20240601;
    app.add_option("--lengths", lengths)->delimiter(',');
    app.add_option("--per-class", per_class);
    app.add_option("--seed", seed);
    bool check = false;
    app.add_flag("--check", check, "Compare with the compiled table and fail on a mismatch");
    CLI11_PARSE(app, argc, argv);

    const auto table = levdyn::calibrate_k_cutoff(lengths, per_class, seed);
    std::printf("length,cutoff,raw_cutoff,misclassified\n");
    for (const auto& p : table) std::printf("%ld,%.4f,%.4f,%.4f\n", p.length, p.cutoff, p.raw_cutoff, p.misclassified);
    if (!check) return 0;

    int mismatches = 0;
    for (const auto& p : table) {
        const double frozen = levdyn::k_cutoff(p.length);
        if (std::abs(frozen - p.cutoff) > 5e-5) {
            std::printf("mismatch at length %ld: compiled %.4f, recomputed %.4f\n", p.length, frozen, p.cutoff);
            ++mismatches;
        }
    }
    std::printf("%s\n", mismatches ? "compiled table is stale" : "compiled table reproduced");
    return mismatches ? 1 : 0;
}
