#pragma once

#include <vector>

#include "levdyn/map_core.hpp"
#include "levdyn/rng.hpp"

namespace levdyn {

/// Smooth cut-off: 1 on |y| <= (1-eps) a, Psi((|y| - (1-eps) a) / (eps a)) on
/// the shoulder with Psi(t) = exp(1 - 1/(1 - t^2)), 0 for |y| >= a.
double bump_chi(double a, double bump_eps, double y);

/// Standard normal density smoothly truncated to [-radius, radius]:
/// f(z) proportional to bump_chi(radius, eps, z) exp(-z^2 / 2).
///
/// The plateau part of the CDF is closed form (erf); the two shoulders use a
/// table of Gauss-Legendre panel masses, refined inside a panel on demand.
/// radius == +inf gives the plain standard normal.
class SmoothTruncatedNormal {
public:
    SmoothTruncatedNormal(double radius, double bump_eps);

    double radius() const { return radius_; }
    double bump_eps() const { return eps_; }
    double pdf(double z) const;
    double cdf(double z) const;
    /// Inverse CDF by bisection to 1e-12; q(1/2) = 0 and q(1-u) = -q(u).
    double quantile(double u) const;
    /// Rejection from the plain truncated normal (inverse transform), accepted
    /// with probability bump_chi(z).
    double sample(Rng& rng) const;
    double variance() const { return variance_; }
    /// Normalizing constant 1 / integral of chi * exp(-z^2/2).
    double normalizer() const { return 0.5 / half_mass_; }

private:
    double half_partial_mass(double z) const;  // integral over [0, z], z >= 0
    double shoulder_panel_mass(double lo, double hi) const;

    double radius_;
    double eps_;
    double plateau_;
    double half_mass_ = 0.0;
    double plateau_mass_ = 0.0;
    double erf_radius_ = 1.0;
    double variance_ = 1.0;
    std::vector<double> panel_edges_;
    std::vector<double> panel_cumulative_;  // shoulder mass up to panel_edges_[i]
};

/// Heteroscedastic noise of the leverage chain at rebalance time n:
///
///     sigma_n(x) = b x^3 sqrt(1 - x^2) / (sqrt(n) (b x^2 + omega (1 - x)^2)^(3/2)),
///     s(x)       = sigma_1(x) / sigma_max * min(gap / 2, T(1 - gap / 2)),
///
/// with transition density p_n(x, y) = g_{x,n}(y - T(x)). Because s / sigma_n is
/// the same for every x, g_{x,n} is sigma_n(x) times one standardized
/// distribution (SmoothTruncatedNormal with radius s_scale sqrt(n) / sigma_max).
class NoiseKernel {
public:
    static constexpr double kDefaultBumpEps = 0.1;

    explicit NoiseKernel(MapParams params, double bump_eps = kDefaultBumpEps);

    const MapParams& params() const { return params_; }
    double bump_eps() const { return bump_eps_; }
    double sigma_max() const { return sigma_max_; }
    double s_scale() const { return s_scale_; }
    /// Truncation radius of the standardized noise.
    double standard_radius() const { return standard_.radius(); }
    const SmoothTruncatedNormal& standard() const { return standard_; }
    bool noiseless() const { return params_.noiseless(); }

    double sigma_n(double x) const;
    double sigma_n_prime(double x) const;
    /// Support radius s(x); zero for x <= 0.
    double support_radius(double x) const;

    /// Transition density p_n(x, y); DomainError for x outside (0, 1).
    double kernel_density(double x, double y) const;
    /// P_x((-inf, y]).
    double kernel_cdf(double x, double y) const;

    /// Additive noise y ~ g_{x,n}; |y| <= s(x).
    double sample_noise(double x, Rng& rng) const;
    /// One step of the chain from x.
    double step(double x, Rng& rng) const;

    /// Quantile of the standardized noise (independent of the state).
    double quantile(double eta) const;
    /// Random map T_eta(x) = T(x) + q_n(eta) sigma_n(x).
    double random_map_eval(double eta, double x) const;
    /// d/dx T_eta(x) = T'(x) + q_n(eta) sigma_n'(x).
    double random_map_derivative(double eta, double x) const;

private:
    MapParams params_;
    double bump_eps_;
    double inv_sqrt_n_;
    double sigma_max_ = 0.0;
    double s_scale_ = 0.0;
    SmoothTruncatedNormal standard_;
};

/// sigma_1(x) for given map parameters (helper shared with the estimator).
double sigma_one(const MapParams& p, double x);

}  // namespace levdyn
