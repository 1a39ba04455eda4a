#include "levdyn/noise_kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "levdyn/errors.hpp"

namespace levdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kShoulderPanels = 512;
// Beyond this plateau half-width the Gaussian tail mass underflows; the
// shoulders carry no representable mass.
constexpr double kNegligibleTail = 38.0;

const double kHalfGaussMass = std::sqrt(std::numbers::pi / 2.0);

double psi(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

using Gauss10 = boost::math::quadrature::gauss<double, 10>;

}  // namespace

double bump_chi(double a, double bump_eps, double y) {
    const double ay = std::abs(y);
    if (ay >= a) return 0.0;
    const double inner = (1.0 - bump_eps) * a;
    if (ay <= inner) return 1.0;
    return psi((ay - inner) / (bump_eps * a));
}

SmoothTruncatedNormal::SmoothTruncatedNormal(double radius, double bump_eps)
    : radius_(radius), eps_(bump_eps) {
    if (!(radius > 0.0)) throw DomainError("truncation radius must be positive");
    if (!(bump_eps > 0.0 && bump_eps < 0.5)) throw DomainError("bump_eps must lie in (0, 0.5)");

    if (radius == kInf) {
        plateau_ = kInf;
        plateau_mass_ = half_mass_ = kHalfGaussMass;
        erf_radius_ = 1.0;
        variance_ = 1.0;
        return;
    }

    plateau_ = (1.0 - eps_) * radius_;
    plateau_mass_ = kHalfGaussMass * std::erf(plateau_ / std::numbers::sqrt2);
    erf_radius_ = std::erf(radius_ / std::numbers::sqrt2);

    // Second moment of the plateau: int_0^p z^2 e^{-z^2/2} dz.
    double second = plateau_mass_ - plateau_ * std::exp(-0.5 * plateau_ * plateau_);
    double shoulder = 0.0;
    if (plateau_ < kNegligibleTail) {
        panel_edges_.resize(kShoulderPanels + 1);
        panel_cumulative_.resize(kShoulderPanels + 1);
        const double width = (radius_ - plateau_) / kShoulderPanels;
        panel_cumulative_[0] = 0.0;
        for (int i = 0; i <= kShoulderPanels; ++i) panel_edges_[i] = plateau_ + i * width;
        panel_edges_.back() = radius_;
        for (int i = 0; i < kShoulderPanels; ++i) {
            const double lo = panel_edges_[i];
            const double hi = panel_edges_[i + 1];
            shoulder += shoulder_panel_mass(lo, hi);
            panel_cumulative_[i + 1] = shoulder;
            second += Gauss10::integrate(
                [&](double t) { return t * t * bump_chi(radius_, eps_, t) * std::exp(-0.5 * t * t); },
                lo, hi);
        }
    }
    half_mass_ = plateau_mass_ + shoulder;
    variance_ = second / half_mass_;
}

double SmoothTruncatedNormal::shoulder_panel_mass(double lo, double hi) const {
    return Gauss10::integrate(
        [&](double t) { return bump_chi(radius_, eps_, t) * std::exp(-0.5 * t * t); }, lo, hi);
}

double SmoothTruncatedNormal::half_partial_mass(double z) const {
    if (z <= plateau_) return kHalfGaussMass * std::erf(z / std::numbers::sqrt2);
    if (z >= radius_ || panel_edges_.empty()) return half_mass_;
    const auto it = std::upper_bound(panel_edges_.begin(), panel_edges_.end(), z);
    const auto i = static_cast<std::size_t>(std::distance(panel_edges_.begin(), it) - 1);
    return plateau_mass_ + panel_cumulative_[i] + shoulder_panel_mass(panel_edges_[i], z);
}

double SmoothTruncatedNormal::pdf(double z) const {
    const double chi = radius_ == kInf ? 1.0 : bump_chi(radius_, eps_, z);
    return chi * std::exp(-0.5 * z * z) * normalizer();
}

double SmoothTruncatedNormal::cdf(double z) const {
    const double half = half_partial_mass(std::abs(z)) / (2.0 * half_mass_);
    return z >= 0.0 ? 0.5 + half : 0.5 - half;
}

double SmoothTruncatedNormal::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    if (u == 0.5) return 0.0;
    if (u < 0.5) return -quantile(1.0 - u);
    if (u == 1.0) return radius_;

    const double target = (2.0 * u - 1.0) * half_mass_;
    if (target <= plateau_mass_) {
        const double arg = std::min(target / kHalfGaussMass, std::nextafter(1.0, 0.0));
        return std::numbers::sqrt2 * boost::math::erf_inv(arg);
    }
    const double rem = target - plateau_mass_;
    const auto it = std::upper_bound(panel_cumulative_.begin(), panel_cumulative_.end(), rem);
    if (it == panel_cumulative_.end()) return radius_;
    const auto i = static_cast<std::size_t>(std::distance(panel_cumulative_.begin(), it) - 1);
    const double need = rem - panel_cumulative_[i];
    double lo = panel_edges_[i];
    double hi = panel_edges_[i + 1];
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (shoulder_panel_mass(panel_edges_[i], mid) < need)
            lo = mid;
        else
            hi = mid;
    }
    if (hi - lo > 1e-12 * std::max(1.0, hi)) throw ConvergenceError("quantile bisection failed");
    return 0.5 * (lo + hi);
}

double SmoothTruncatedNormal::sample(Rng& rng) const {
    for (;;) {
        const double u = uniform_open01(rng);
        double z = std::numbers::sqrt2 * boost::math::erf_inv((2.0 * u - 1.0) * erf_radius_);
        if (radius_ == kInf) return z;
        z = std::clamp(z, -radius_, radius_);
        if (std::abs(z) <= plateau_) return z;
        if (uniform_open01(rng) < bump_chi(radius_, eps_, z)) return z;
    }
}

double sigma_one(const MapParams& p, double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double y = 1.0 - x;
    const double d = p.b() * x * x + p.omega() * y * y;
    return p.b() * x * x * x * std::sqrt(1.0 - x * x) / (d * std::sqrt(d));
}

namespace {

double sigma_one_prime(const MapParams& p, double x) {
    const double y = 1.0 - x;
    const double d = p.b() * x * x + p.omega() * y * y;
    const double dd = 2.0 * p.b() * x - 2.0 * p.omega() * y;
    const double root = std::sqrt(1.0 - x * x);
    const double num = x * x * x * root;
    const double num_prime = 3.0 * x * x * root - x * x * x * x / root;
    const double d15 = d * std::sqrt(d);
    return p.b() * (num_prime / d15 - 1.5 * num * dd / (d15 * d));
}

double find_sigma_max(const MapParams& p) {
    constexpr int grid = 2000;
    int best = 1;
    double best_value = 0.0;
    for (int i = 1; i < grid; ++i) {
        const double v = sigma_one(p, static_cast<double>(i) / grid);
        if (v > best_value) best_value = v, best = i;
    }
    const double lo = static_cast<double>(best - 1) / grid;
    const double hi = static_cast<double>(best + 1) / grid;
    const auto r = boost::math::tools::brent_find_minima(
        [&](double x) { return -sigma_one(p, x); }, lo, hi, std::numeric_limits<double>::digits);
    return std::max(best_value, -r.second);
}

double standard_radius_for(const MapParams& p, double s_scale, double sigma_max) {
    if (p.noiseless()) return kInf;
    return s_scale * std::sqrt(p.n_rebalance()) / sigma_max;
}

}  // namespace

NoiseKernel::NoiseKernel(MapParams params, double bump_eps)
    : params_(params),
      bump_eps_(bump_eps),
      inv_sqrt_n_(params.noiseless() ? 0.0 : 1.0 / std::sqrt(params.n_rebalance())),
      sigma_max_(find_sigma_max(params)),
      s_scale_(std::min(0.5 * params.gap(), eval_T(params, 1.0 - 0.5 * params.gap()))),
      standard_(standard_radius_for(params, s_scale_, sigma_max_), bump_eps) {}

double NoiseKernel::sigma_n(double x) const { return sigma_one(params_, x) * inv_sqrt_n_; }

double NoiseKernel::sigma_n_prime(double x) const {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return sigma_one_prime(params_, x) * inv_sqrt_n_;
}

double NoiseKernel::support_radius(double x) const {
    if (x <= 0.0) return 0.0;
    return sigma_one(params_, x) / sigma_max_ * s_scale_;
}

double NoiseKernel::kernel_density(double x, double y) const {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("kernel_density: x must lie in (0, 1)");
    if (noiseless()) throw DomainError("kernel_density: the noiseless kernel has no density");
    const double sigma = sigma_n(x);
    return standard_.pdf((y - eval_T(params_, x)) / sigma) / sigma;
}

double NoiseKernel::kernel_cdf(double x, double y) const {
    const double t = eval_T(params_, x);
    const double sigma = sigma_n(x);
    if (noiseless() || x <= 0.0 || sigma == 0.0) return y >= t ? 1.0 : 0.0;
    return standard_.cdf((y - t) / sigma);
}

double NoiseKernel::sample_noise(double x, Rng& rng) const {
    if (noiseless() || x <= 0.0) return 0.0;
    const double s = support_radius(x);
    return std::clamp(sigma_n(x) * standard_.sample(rng), -s, s);
}

double NoiseKernel::step(double x, Rng& rng) const {
    return eval_T(params_, x) + sample_noise(x, rng);
}

double NoiseKernel::quantile(double eta) const {
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("quantile: eta must lie in (0, 1)");
    if (noiseless()) return 0.0;
    return standard_.quantile(eta);
}

double NoiseKernel::random_map_eval(double eta, double x) const {
    if (x <= 0.0 || noiseless()) return eval_T(params_, x);
    return eval_T(params_, x) + quantile(eta) * sigma_n(x);
}

double NoiseKernel::random_map_derivative(double eta, double x) const {
    const double d = eval_T_prime(params_, x);
    if (noiseless()) return d;
    return d + quantile(eta) * sigma_n_prime(x);
}

}  // namespace levdyn
