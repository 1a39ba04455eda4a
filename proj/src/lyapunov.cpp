#include "levdyn/lyapunov.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

#include "levdyn/errors.hpp"
#include "levdyn/parallel.hpp"

namespace levdyn {

namespace {

double generic_start(const MapParams& p) { return std::min(p.critical() + 1e-3, 0.5 * (p.critical() + 1.0)); }

struct RealizationSum {
    double mean = 0.0;
    long hits = 0;
};

double floored_log(double derivative, long& hits) {
    const double a = std::abs(derivative);
    if (a < kDerivativeFloor) {
        ++hits;
        return std::log(kDerivativeFloor);
    }
    return std::log(a);
}

template <class Realization>
LyapunovEstimate run_realizations(const MonteCarloBudget& budget, Realization&& one) {
    if (budget.realizations < 1) throw DomainError("Lyapunov estimate needs at least one realization");
    if (budget.steps < 1) throw DomainError("Lyapunov estimate needs at least one step");
    std::vector<RealizationSum> results(static_cast<std::size_t>(budget.realizations));
    parallel_for(results.size(), [&](std::size_t r) { results[r] = one(r); });

    LyapunovEstimate est;
    for (const auto& r : results) {
        est.mean += r.mean;
        est.near_critical_hits += r.hits;
    }
    const double count = static_cast<double>(results.size());
    est.mean /= count;
    if (results.size() > 1) {
        double ss = 0.0;
        for (const auto& r : results) ss += (r.mean - est.mean) * (r.mean - est.mean);
        est.std_error = std::sqrt(ss / (count - 1.0) / count);
    }
    return est;
}

}  // namespace

double lyap_deterministic(const MapParams& p, double x0, long steps, long transient) {
    if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("lyap_deterministic: x0 must lie in (0, 1)");
    if (steps < 1) throw DomainError("lyap_deterministic: steps must be positive");
    double x = iterate_T(p, x0, transient);
    const double c = p.critical();
    double sum = 0.0;
    for (long i = 0; i < steps; ++i) {
        if (std::abs(x - c) < 1e-15)
            throw DegenerateError("lyap_deterministic: orbit hit the critical point at step " + std::to_string(i));
        sum += std::log(std::abs(eval_T_prime(p, x)));
        x = eval_T(p, x);
    }
    return sum / static_cast<double>(steps);
}

double lyap_deterministic(const MapParams& p) { return lyap_deterministic(p, generic_start(p), 1'000'000); }

LyapunovEstimate lyap_average_estimate(const NoiseKernel& kernel, const MonteCarloBudget& budget,
                                       std::uint64_t seed) {
    const MapParams& p = kernel.params();
    return run_realizations(budget, [&](std::size_t r) {
        Rng rng = make_rng(seed, r);
        double x = uniform_open01(rng);
        for (long t = 0; t < budget.transient; ++t) x = kernel.step(x, rng);
        RealizationSum out;
        double sum = 0.0;
        for (long t = 0; t < budget.steps; ++t) {
            sum += floored_log(eval_T_prime(p, x), out.hits);
            x = kernel.step(x, rng);
        }
        out.mean = sum / static_cast<double>(budget.steps);
        return out;
    });
}

LyapunovReport lyap_average(const NoiseKernel& kernel, int realizations, long steps, std::uint64_t seed) {
    MonteCarloBudget budget;
    budget.realizations = realizations;
    budget.steps = steps;
    const LyapunovEstimate est = lyap_average_estimate(kernel, budget, seed);
    LyapunovReport report(kernel.params());
    report.ale = est.mean;
    report.std_error = est.std_error;
    report.n_realizations = realizations;
    report.steps_per_realization = steps;
    report.near_critical_hits = est.near_critical_hits;
    return report;
}

LyapunovEstimate lyap_random_estimate(const NoiseKernel& kernel, const MonteCarloBudget& budget,
                                      std::uint64_t seed) {
    const MapParams& p = kernel.params();
    const bool noiseless = kernel.noiseless();
    return run_realizations(budget, [&](std::size_t r) {
        Rng rng = make_rng(seed, r);
        double x = uniform_open01(rng);
        auto advance = [&](double& derivative) {
            const double q = noiseless ? 0.0 : kernel.quantile(uniform_open01(rng));
            derivative = eval_T_prime(p, x) + q * kernel.sigma_n_prime(x);
            x = eval_T(p, x) + q * kernel.sigma_n(x);
        };
        double derivative = 0.0;
        for (long t = 0; t < budget.transient; ++t) advance(derivative);
        RealizationSum out;
        double sum = 0.0;
        for (long t = 0; t < budget.steps; ++t) {
            advance(derivative);
            sum += floored_log(derivative, out.hits);
        }
        out.mean = sum / static_cast<double>(budget.steps);
        return out;
    });
}

double lyap_random(const NoiseKernel& kernel, int realizations, long steps, std::uint64_t seed) {
    MonteCarloBudget budget;
    budget.realizations = realizations;
    budget.steps = steps;
    return lyap_random_estimate(kernel, budget, seed).mean;
}

double lyap_average_from_density(const MapParams& p, const Density& density) {
    using Gauss = boost::math::quadrature::gauss<double, 8>;
    const double c = p.critical();
    auto log_abs_derivative = [&](double x) { return std::log(std::abs(eval_T_prime(p, x))); };
    auto log_regular_part = [&](double x) { return std::log(std::abs(eval_T_prime(p, x) / (x - c))); };
    // int_0^u log(t) dt
    auto log_primitive = [](double u) { return u > 0.0 ? u * std::log(u) - u : 0.0; };

    const double width = density.bin_width();
    double total = 0.0;
    for (int j = 0; j < density.bins(); ++j) {
        const double mass = density.weights()[static_cast<std::size_t>(j)];
        if (mass == 0.0) continue;
        const double lo = density.bin_left(j);
        const double hi = lo + width;
        double integral;
        if (c > lo && c < hi) {
            integral = Gauss::integrate(log_regular_part, lo, c) + Gauss::integrate(log_regular_part, c, hi) +
                       log_primitive(c - lo) + log_primitive(hi - c);
        } else {
            integral = Gauss::integrate(log_abs_derivative, lo, hi);
        }
        total += mass * integral / width;
    }
    return total;
}

BifurcationData bifurcation_scan(double omega, double phi_lo, double phi_hi, int n_points, int iterates_kept,
                                 long transient) {
    if (n_points < 1 || iterates_kept < 1) throw DomainError("bifurcation_scan: counts must be positive");
    if (!(phi_lo > 0.0 && phi_hi < 1.0 && phi_lo <= phi_hi))
        throw DomainError("bifurcation_scan: phi_star range must lie in (0, 1)");
    BifurcationData out;
    for (int i = 0; i < n_points; ++i) {
        const double phi = n_points == 1 ? phi_lo : phi_lo + (phi_hi - phi_lo) * i / (n_points - 1);
        if (!admissible(phi, omega)) {
            out.skipped.push_back(phi);
            continue;
        }
        const MapParams p = make_params(phi, omega, std::numeric_limits<double>::infinity());
        double x = iterate_T(p, generic_start(p), transient);
        for (int k = 0; k < iterates_kept; ++k) {
            x = eval_T(p, x);
            out.phi_star.push_back(phi);
            out.x.push_back(x);
        }
    }
    return out;
}

std::vector<SweepCell> sweep_grid(std::span<const double> phi_grid, std::span<const double> omega_grid,
                                  double n_rebalance, std::uint64_t seed, const SweepOptions& options) {
    std::vector<SweepCell> cells(phi_grid.size() * omega_grid.size());
    const bool noiseless = n_rebalance == std::numeric_limits<double>::infinity();
    parallel_for(cells.size(), [&](std::size_t index) {
        SweepCell& cell = cells[index];
        cell.omega = omega_grid[index / phi_grid.size()];
        cell.phi_star = phi_grid[index % phi_grid.size()];
        cell.n = n_rebalance;
        if (!admissible(cell.phi_star, cell.omega)) {
            cell.regime = "inadmissible";
            return;
        }
        cell.admissible = true;
        try {
            const MapParams p = make_params(cell.phi_star, cell.omega, n_rebalance);
            cell.regime = regime_tag(classify(p));
            if (noiseless || options.with_det) {
                try {
                    cell.det = lyap_deterministic(p, generic_start(p), options.det_steps);
                } catch (const DegenerateError& e) {
                    // superstable orbit through c (phi* = omega puts the fixed point there)
                    cell.det = -std::numeric_limits<double>::infinity();
                    cell.error = e.what();
                }
            }
            if (noiseless) {
                cell.ale = cell.det;
                cell.std_error = 0.0;
                return;
            }
            const std::uint64_t cell_seed = options.common_random_numbers ? seed : derive_seed(seed, index);
            const NoiseKernel kernel(p);
            const LyapunovEstimate ale = lyap_average_estimate(kernel, options.budget, cell_seed);
            cell.ale = ale.mean;
            cell.std_error = ale.std_error;
            if (options.with_rle) cell.rle = lyap_random_estimate(kernel, options.budget, cell_seed).mean;
        } catch (const Error& e) {
            cell.regime = "error";
            cell.error = e.what();
        }
    });
    return cells;
}

}  // namespace levdyn
