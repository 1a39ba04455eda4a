#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "levdyn/chaos.hpp"
#include "levdyn/errors.hpp"

namespace levdyn {

std::string to_string(ChaosLabel label) {
    switch (label) {
        case ChaosLabel::Stochastic: return "stochastic";
        case ChaosLabel::Periodic: return "periodic";
        case ChaosLabel::Chaotic: return "chaotic";
    }
    return "?";
}

double permutation_entropy(std::span<const double> series, int order, int lag) {
    if (order < 2 || order > 10) throw DomainError("permutation_entropy: order must lie in [2, 10]");
    if (lag < 1) throw DomainError("permutation_entropy: lag must be positive");
    const auto n = static_cast<long>(series.size());
    if (n < static_cast<long>(order) * lag + 10)
        throw TooShortError("permutation_entropy: need at least order * lag + 10 points");

    long factorial = 1;
    for (int i = 2; i <= order; ++i) factorial *= i;
    std::vector<long> counts(static_cast<std::size_t>(factorial), 0);

    const long windows = n - static_cast<long>(order - 1) * lag;
    std::array<int, 10> idx{};
    std::array<double, 10> w{};
    for (long t = 0; t < windows; ++t) {
        for (int k = 0; k < order; ++k) w[k] = series[static_cast<std::size_t>(t + k * lag)];
        std::iota(idx.begin(), idx.begin() + order, 0);
        std::stable_sort(idx.begin(), idx.begin() + order, [&](int a, int b) { return w[a] < w[b]; });
        // Lehmer code of the permutation
        long code = 0;
        for (int i = 0; i < order; ++i) {
            int smaller = 0;
            for (int j = i + 1; j < order; ++j) smaller += idx[j] < idx[i];
            code = code * (order - i) + smaller;
        }
        ++counts[static_cast<std::size_t>(code)];
    }

    double h = 0.0;
    for (long c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(windows);
        h -= p * std::log(p);
    }
    return h / std::log(static_cast<double>(factorial));
}

}  // namespace levdyn
