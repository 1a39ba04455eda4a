#include "levdyn/simulator.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cmath>

#include "levdyn/errors.hpp"

namespace levdyn {

std::string to_string(TrajectoryKind kind) {
    switch (kind) {
        case TrajectoryKind::Reduced: return "reduced";
        case TrajectoryKind::SlowFast: return "slowfast";
        case TrajectoryKind::Deterministic: return "deterministic";
    }
    return "?";
}

Trajectory simulate_reduced(const NoiseKernel& kernel, double x0, long steps, int stride_k,
                            std::uint64_t seed, long transient) {
    if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("simulate_reduced: x0 must lie in (0, 1)");
    if (steps < 1) throw DomainError("simulate_reduced: steps must be >= 1");
    if (stride_k < 1) throw DomainError("simulate_reduced: stride must be >= 1");
    if (transient < 0) throw DomainError("simulate_reduced: negative transient");

    Rng rng{seed};
    double x = x0;
    for (long i = 0; i < transient; ++i) x = kernel.step(x, rng);

    Trajectory out{.values = {},
                   .seed = seed,
                   .stride_k = stride_k,
                   .params = kernel.params(),
                   .kind = kernel.noiseless() ? TrajectoryKind::Deterministic : TrajectoryKind::Reduced,
                   .transient = transient};
    out.values.reserve(static_cast<std::size_t>(steps));
    for (long i = 0; i < steps; ++i) {
        for (int k = 0; k < stride_k; ++k) x = kernel.step(x, rng);
        out.values.push_back(x);
    }
    return out;
}

Ar1Estimate ar1_mle(std::span<const double> r) {
    if (r.size() < 3) throw TooShortError("ar1_mle needs at least 3 observations");
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t s = 1; s < r.size(); ++s) {
        sxy += r[s] * r[s - 1];
        sxx += r[s - 1] * r[s - 1];
    }
    if (sxx == 0.0) throw DegenerateError("ar1_mle: lagged series has zero energy");
    const double phi = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t s = 1; s < r.size(); ++s) {
        const double e = r[s] - phi * r[s - 1];
        ssr += e * e;
    }
    return {phi, std::sqrt(ssr / static_cast<double>(r.size() - 1))};
}

double aggregated_variance(double phi, double sigma, long n) {
    if (!(std::abs(phi) < 1.0)) throw DomainError("aggregated_variance: |phi_hat| must be < 1");
    if (n < 1) throw DomainError("aggregated_variance: n must be >= 1");
    const double nn = static_cast<double>(n);
    const double one_m = 1.0 - phi;
    const double phi_n = std::pow(phi, nn);
    const double bracket = 1.0 + 2.0 * phi * (1.0 - phi_n) / one_m -
                           2.0 * ((nn * phi - nn - 1.0) * phi_n * phi + phi) / (nn * one_m * one_m);
    return bracket * nn * sigma * sigma / (1.0 - phi * phi);
}

double SlowFastConfig::implied_phi_star() const {
    const double a = alpha_var * std::sqrt(sigma_eps_total);
    return (1.0 - a) / (1.0 + a * gamma_liq);
}

double SlowFastConfig::implied_lambda_star() const { return 1.0 + gamma_liq * implied_phi_star(); }

void SlowFastConfig::validate() const {
    if (!(alpha_var > 0.0)) throw DomainError("alpha_var must be positive");
    if (!(sigma_eps_total > 0.0)) throw DomainError("Sigma_eps must be positive");
    if (!(gamma_liq > 0.0)) throw DomainError("gamma_liq must be positive");
    if (!(omega > 0.0 && omega <= 1.0)) throw DomainError("omega must lie in (0, 1]");
    if (n_rebalance < 1) throw DomainError("n_rebalance must be >= 1");
    if (!(lambda0 > 1.0)) throw DomainError("lambda0 must exceed 1");
    const double ps = implied_phi_star();
    if (!(ps > 0.0 && ps < 1.0)) throw DomainError("implied phi_star outside (0, 1)");
}

namespace {

constexpr double kPhiFloor = 1e-6;

double update_lambda(const SlowFastConfig& c, double lambda_prev, double est_variance) {
    return 1.0 / std::sqrt(c.omega / (lambda_prev * lambda_prev) +
                           (1.0 - c.omega) * c.alpha_var * c.alpha_var * est_variance);
}

}  // namespace

double slowfast_skeleton(const SlowFastConfig& c, double lambda_prev) {
    const double phi = std::clamp((lambda_prev - 1.0) / c.gamma_liq, kPhiFloor, 1.0 - kPhiFloor);
    const double limit = c.sigma_eps_total / ((1.0 - phi) * (1.0 - phi));
    return update_lambda(c, lambda_prev, limit);
}

SlowFastRun simulate_slowfast(const SlowFastConfig& c, long steps, std::uint64_t seed) {
    c.validate();
    if (steps < 1) throw DomainError("simulate_slowfast: steps must be >= 1");

    const double phi_star = c.implied_phi_star();
    const long n = c.n_rebalance;
    const double innovation_sd = std::sqrt(c.sigma_eps_total / static_cast<double>(n));

    SlowFastRun run;
    run.lambda.seed = seed;
    run.lambda.kind = TrajectoryKind::SlowFast;
    if (c.omega < 1.0 && admissible(phi_star, c.omega))
        run.lambda.params = make_params(phi_star, c.omega, static_cast<double>(n), c.gamma_liq);
    run.lambda.values.reserve(static_cast<std::size_t>(steps));
    run.phi.reserve(static_cast<std::size_t>(steps));

    Rng rng{seed};
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> returns(static_cast<std::size_t>(n) + 1);

    double lambda = c.lambda0;
    for (long t = 0; t < steps; ++t) {
        double phi = (lambda - 1.0) / c.gamma_liq;
        if (phi < kPhiFloor || phi > 1.0 - kPhiFloor) {
            phi = std::clamp(phi, kPhiFloor, 1.0 - kPhiFloor);
            ++run.clamp_events;
        }
        returns[0] = normal(rng) * innovation_sd / std::sqrt(1.0 - phi * phi);
        for (long k = 1; k <= n; ++k) returns[k] = phi * returns[k - 1] + innovation_sd * normal(rng);

        double est_variance;
        if (n >= 2) {
            Ar1Estimate est = ar1_mle(std::span<const double>(returns).subspan(1));
            if (!(std::abs(est.phi_hat) < 1.0 - kPhiFloor)) {
                est.phi_hat = std::clamp(est.phi_hat, -1.0 + kPhiFloor, 1.0 - kPhiFloor);
                ++run.clamp_events;
            }
            est_variance = aggregated_variance(est.phi_hat, est.sigma_hat, n);
        } else {
            est_variance = returns[1] * returns[1];
        }

        lambda = update_lambda(c, lambda, est_variance);
        if (!std::isfinite(lambda))
            throw NumericalError("simulate_slowfast: non-finite leverage at slow step " +
                                 std::to_string(t));
        run.lambda.values.push_back(lambda);
        run.phi.push_back((lambda - 1.0) / c.gamma_liq);
    }
    return run;
}

}  // namespace levdyn
