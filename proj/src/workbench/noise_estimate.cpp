#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <vector>

#include "levdyn/errors.hpp"
#include "levdyn/noise_kernel.hpp"
#include "levdyn/workbench.hpp"

namespace levdyn {

namespace {

void check_series(std::span<const double> series, int k) {
    if (k < 1) throw DomainError("estimate_n: k must be positive");
    if (series.size() < 3) throw TooShortError("estimate_n: need at least 3 observations");
    for (double x : series)
        if (!(x >= -1.0 && x <= 1.0)) throw DomainError("estimate_n: observations must lie in [-1, 1]");
}

// sum over steps j of sigma_1(y_j)^2 prod_{i>j} T'(y_i)^2 along y_0 = x, y_{j+1} = T(y_j)
double propagated_sigma1_sq(const MapParams& p, double x, int k) {
    std::vector<double> path(static_cast<std::size_t>(k));
    path[0] = x;
    for (int j = 1; j < k; ++j) path[static_cast<std::size_t>(j)] = eval_T(p, path[static_cast<std::size_t>(j - 1)]);
    double acc = 0.0, gain = 1.0;
    for (int j = k - 1; j >= 0; --j) {
        const double y = path[static_cast<std::size_t>(j)];
        const double s = sigma_one(p, y);
        acc += gain * s * s;
        const double d = eval_T_prime(p, std::abs(y));  // mirror branch below 0
        gain *= d * d;
    }
    return acc;
}

double mean_propagated(std::span<const double> series, const MapParams& p, int k) {
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < series.size(); ++t) sum += propagated_sigma1_sq(p, series[t], k);
    return sum / static_cast<double>(series.size() - 1);
}

}  // namespace

double predicted_residual_ms(std::span<const double> series, const MapParams& p, int k) {
    check_series(series, k);
    if (p.noiseless()) return 0.0;
    const NoiseKernel kernel(p);
    return mean_propagated(series, p, k) * kernel.standard().variance() / p.n_rebalance();
}

NoiseEstimate estimate_n(std::span<const double> series, double phi_star, double omega, int k, double n_lo,
                         double n_hi) {
    check_series(series, k);
    if (!(n_lo >= 1.0 && n_hi > n_lo && std::isfinite(n_hi))) throw DomainError("estimate_n: need 1 <= n_lo < n_hi");
    const MapParams base = make_params(phi_star, omega, 1.0);

    double observed = 0.0;
    for (std::size_t t = 0; t + 1 < series.size(); ++t) {
        const double r = series[t + 1] - iterate_T(base, series[t], k);
        observed += r * r;
    }
    observed /= static_cast<double>(series.size() - 1);

    const double g = mean_propagated(series, base, k);
    // only the variance of the standardized noise depends on n besides 1/n
    auto predicted = [&](double n) { return g * NoiseKernel(base.with_n(n)).standard().variance() / n; };

    NoiseEstimate out;
    out.observed = observed;
    const double p_lo = predicted(n_lo);
    if (observed >= p_lo) {
        out.n = n_lo;
        out.predicted = p_lo;
        out.at_lower_bound = true;
        return out;
    }
    const double p_hi = predicted(n_hi);
    if (observed <= p_hi) {
        out.n = n_hi;
        out.predicted = p_hi;
        out.at_upper_bound = true;
        return out;
    }
    const double log_obs = std::log(observed);
    auto f = [&](double u) { return std::log(predicted(std::exp(u))) - log_obs; };
    std::uintmax_t iterations = 100;
    const auto [a, b] = boost::math::tools::toms748_solve(f, std::log(n_lo), std::log(n_hi), std::log(p_lo) - log_obs,
                                                         std::log(p_hi) - log_obs,
                                                         boost::math::tools::eps_tolerance<double>(40), iterations);
    out.n = std::exp(0.5 * (a + b));
    out.predicted = predicted(out.n);
    return out;
}

}  // namespace levdyn
