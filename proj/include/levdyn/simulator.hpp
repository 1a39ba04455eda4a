#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levdyn/map_core.hpp"
#include "levdyn/noise_kernel.hpp"

namespace levdyn {

enum class TrajectoryKind { Reduced, SlowFast, Deterministic };
std::string to_string(TrajectoryKind kind);

struct Trajectory {
    std::vector<double> values;
    std::uint64_t seed = 0;
    int stride_k = 1;
    /// Map the chain was generated from; empty for slow-fast runs whose
    /// (phi*, omega) has no admissible reduced map.
    std::optional<MapParams> params;
    TrajectoryKind kind = TrajectoryKind::Reduced;
    long transient = 0;
};

/// Runs the chain X_{t+1} = T(X_t) + sigma_n(X_t) Z_{t+1} from x0, discards
/// `transient` chain steps and then records every stride_k-th state until
/// `steps` values are stored (values[i] = X_{transient + (i+1) stride_k}).
/// A noiseless kernel (n = inf) yields the deterministic orbit.
Trajectory simulate_reduced(const NoiseKernel& kernel, double x0, long steps, int stride_k,
                            std::uint64_t seed, long transient = 0);

struct Ar1Estimate {
    double phi_hat = 0.0;
    double sigma_hat = 0.0;
};

/// Conditional least squares (= conditional Gaussian MLE) for
/// r_s = phi r_{s-1} + e_s without intercept.
Ar1Estimate ar1_mle(std::span<const double> series);

/// Variance of the sum of n consecutive returns of a stationary AR(1) with
/// coefficient phi_hat and innovation std sigma_hat.
double aggregated_variance(double phi_hat, double sigma_hat, long n_rebalance);

struct SlowFastConfig {
    double alpha_var = 1.64;
    /// Sigma_eps = sigma_eps^2 * n, invariant under refinement of the fast grid.
    double sigma_eps_total = 0.0;
    double gamma_liq = 0.0;
    double omega = 0.5;
    long n_rebalance = 100;
    double lambda0 = 2.0;

    /// Fixed point (1 - alpha sqrt(Sigma)) / (1 + alpha gamma sqrt(Sigma)).
    double implied_phi_star() const;
    /// Leverage at the fixed point, 1 + gamma phi*.
    double implied_lambda_star() const;
    void validate() const;
};

struct SlowFastRun {
    Trajectory lambda;          // kind SlowFast
    std::vector<double> phi;    // (lambda_t - 1) / gamma
    long clamp_events = 0;
};

/// Slow-fast leverage model: for every slow step, n AR(1) returns with
/// phi_{t-1} = (lambda_{t-1} - 1) / gamma (stationary start), AR(1) estimate,
/// aggregated variance, then the adaptive-expectations update of lambda.
SlowFastRun simulate_slowfast(const SlowFastConfig& config, long steps, std::uint64_t seed);

/// n -> inf skeleton of the slow-fast update: the next lambda given the
/// previous one, with the aggregated variance replaced by its limit.
double slowfast_skeleton(const SlowFastConfig& config, double lambda_prev);

}  // namespace levdyn
