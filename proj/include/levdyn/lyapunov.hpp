#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levdyn/map_core.hpp"
#include "levdyn/measure.hpp"
#include "levdyn/noise_kernel.hpp"

namespace levdyn {

/// |T'| below this floor contributes log(kDerivativeFloor) and is counted as a
/// near-critical hit.
inline constexpr double kDerivativeFloor = 1e-15;

struct MonteCarloBudget {
    int realizations = 128;
    long steps = 10'000;
    long transient = 1'000;
};

/// Cross-realization mean of per-trajectory Birkhoff averages.
struct LyapunovEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long near_critical_hits = 0;
};

struct LyapunovReport {
    explicit LyapunovReport(const MapParams& p) : params(p) {}

    MapParams params;
    double ale = 0.0;
    double rle = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> det;
    int n_realizations = 0;
    long steps_per_realization = 0;
    double std_error = 0.0;      // of ale
    double rle_std_error = 0.0;  // of rle, when computed
    long near_critical_hits = 0;
};

/// Birkhoff average of log|T'| along the noiseless orbit after `transient`.
/// DegenerateError when the orbit comes within 1e-15 of the critical point.
double lyap_deterministic(const MapParams& p, double x0, long steps, long transient = 1'000);
/// Defaults: x0 = c + 1e-3, 10^6 steps.
double lyap_deterministic(const MapParams& p);

/// Average Lyapunov exponent: log|T'(X_t)| along the noisy chain. Realization r
/// starts from a uniform x0 drawn from stream (seed, r).
LyapunovEstimate lyap_average_estimate(const NoiseKernel& kernel, const MonteCarloBudget& budget,
                                       std::uint64_t seed);
LyapunovReport lyap_average(const NoiseKernel& kernel, int realizations, long steps, std::uint64_t seed);

/// Random Lyapunov exponent: log|T'_eta(x)| along random-map orbits, with
/// T'_eta = T' + q_n(eta) sigma_n'.
LyapunovEstimate lyap_random_estimate(const NoiseKernel& kernel, const MonteCarloBudget& budget,
                                      std::uint64_t seed);
double lyap_random(const NoiseKernel& kernel, int realizations, long steps, std::uint64_t seed);

/// Integral of log|T'| against a piecewise-constant density. The bin holding
/// the critical point is split as log|T'(x)| = log|T'(x) / (x - c)| + log|x - c|
/// with the second term integrated exactly.
double lyap_average_from_density(const MapParams& p, const Density& density);

struct BifurcationData {
    std::vector<double> phi_star;  // one entry per kept point
    std::vector<double> x;
    std::vector<double> skipped;   // inadmissible phi_star values
};

/// For each phi_star on a uniform grid over [lo, hi] at fixed omega, the last
/// `iterates_kept` states of a noiseless orbit from c + 1e-3 after `transient`.
BifurcationData bifurcation_scan(double omega, double phi_lo, double phi_hi, int n_points,
                                 int iterates_kept, long transient = 10'000);

struct SweepCell {
    double phi_star = 0.0;
    double omega = 0.0;
    double n = 0.0;
    bool admissible = false;
    double ale = std::numeric_limits<double>::quiet_NaN();
    double rle = std::numeric_limits<double>::quiet_NaN();
    double det = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    std::string regime;  // regime_tag, or "inadmissible" / "error"
    std::string error;
};

struct SweepOptions {
    MonteCarloBudget budget{};
    bool with_rle = false;
    /// Share random streams across cells (common random numbers) so that
    /// neighbouring cells differ only through the parameters.
    bool common_random_numbers = true;
    /// Also compute the deterministic exponent for finite n (always done for n = inf).
    bool with_det = false;
    long det_steps = 1'000'000;
};

/// ALE (or the deterministic exponent for n = inf) on the grid
/// phi_star_grid x omega_grid, row-major in omega. Cells that fail or are
/// inadmissible are flagged, never silently zero. An orbit through the
/// critical point gives det = -inf, with the reason in `error`.
std::vector<SweepCell> sweep_grid(std::span<const double> phi_star_grid, std::span<const double> omega_grid,
                                  double n_rebalance, std::uint64_t seed, const SweepOptions& options = {});

}  // namespace levdyn
