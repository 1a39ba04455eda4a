#include <algorithm>
#include <cmath>
#include <numeric>

#include "levdyn/chaos.hpp"
#include "levdyn/errors.hpp"

namespace levdyn {

namespace {

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double std_of(std::span<const double> x) {
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

}  // namespace

std::vector<double> schreiber_denoise(std::span<const double> series, int embed, double radius_frac,
                                      int iterations) {
    if (embed < 1 || embed % 2 == 0) throw DomainError("schreiber_denoise: embed must be odd and positive");
    if (!(radius_frac >= 0.0)) throw DomainError("schreiber_denoise: radius_frac must be non-negative");
    if (iterations < 0) throw DomainError("schreiber_denoise: iterations must be non-negative");
    if (series.size() < 50) throw TooShortError("schreiber_denoise: need at least 50 points");

    const long n = static_cast<long>(series.size());
    const long h = embed / 2;
    std::vector<double> x(series.begin(), series.end());
    std::vector<double> next;
    for (int it = 0; it < iterations; ++it) {
        const double r = radius_frac * std_of(x);
        next = x;
        for (long i = h; i < n - h; ++i) {
            double sum = 0.0;
            long count = 0;
            for (long j = h; j < n - h; ++j) {
                bool close = true;
                for (long k = -h; k <= h && close; ++k) close = std::abs(x[j + k] - x[i + k]) <= r;
                if (close) {
                    sum += x[j];
                    ++count;
                }
            }
            next[i] = sum / static_cast<double>(count);  // count >= 1: j = i
        }
        x.swap(next);
    }
    return x;
}

double lag1_autocorrelation(std::span<const double> series) {
    if (series.size() < 2) throw TooShortError("lag1_autocorrelation: need at least 2 points");
    const double m = mean_of(series);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double d = series[t] - m;
        den += d * d;
        if (t + 1 < series.size()) num += d * (series[t + 1] - m);
    }
    return den > 0.0 ? num / den : 0.0;
}

Downsampled downsample_if_oversampled(std::span<const double> series) {
    if (series.size() < 40) throw TooShortError("downsample_if_oversampled: need at least 40 points");
    Downsampled out{std::vector<double>(series.begin(), series.end()), 1};
    while (lag1_autocorrelation(out.series) > 0.95 && (out.series.size() + 1) / 2 >= 40) {
        std::vector<double> half;
        half.reserve((out.series.size() + 1) / 2);
        for (std::size_t t = 0; t < out.series.size(); t += 2) half.push_back(out.series[t]);
        out.series = std::move(half);
        out.factor *= 2;
    }
    return out;
}

std::optional<int> exact_period(std::span<const double> series, double tol) {
    if (series.empty()) return std::nullopt;
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    const double eps = tol * std::max(*hi - *lo, std::abs(*hi));
    const int max_p = static_cast<int>(series.size() / 4);
    if (*hi - *lo <= eps) return 1;
    for (int p = 1; p <= max_p; ++p) {
        bool repeats = true;
        for (std::size_t t = 0; t + static_cast<std::size_t>(p) < series.size() && repeats; ++t)
            repeats = std::abs(series[t + static_cast<std::size_t>(p)] - series[t]) <= eps;
        if (repeats) return p;
    }
    return std::nullopt;
}

}  // namespace levdyn
