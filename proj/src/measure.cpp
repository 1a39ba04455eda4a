#include "levdyn/measure.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "levdyn/errors.hpp"

namespace levdyn {

Density::Density(std::vector<double> weights) : weights_(std::move(weights)) {}

double Density::total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

double Density::expectation(const std::function<double(double)>& f) const {
    using Gauss = boost::math::quadrature::gauss<double, 4>;
    double sum = 0.0;
    const double w = bin_width();
    for (int i = 0; i < bins(); ++i) {
        const double mass = weights_[static_cast<std::size_t>(i)];
        if (mass == 0.0) continue;
        const double lo = bin_left(i);
        sum += mass * Gauss::integrate(f, lo, lo + w) / w;
    }
    return sum;
}

double Density::mass_in(double lo, double hi) const {
    double sum = 0.0;
    const double w = bin_width();
    for (int i = 0; i < bins(); ++i) {
        const double a = std::max(lo, bin_left(i));
        const double b = std::min(hi, bin_left(i) + w);
        if (b > a) sum += weights_[static_cast<std::size_t>(i)] * (b - a) / w;
    }
    return sum;
}

Density Density::coarsen(int factor) const {
    if (factor < 1 || bins() % factor != 0) throw DomainError("coarsen: factor must divide bins");
    std::vector<double> out(static_cast<std::size_t>(bins() / factor), 0.0);
    for (int i = 0; i < bins(); ++i) out[static_cast<std::size_t>(i / factor)] += weights_[static_cast<std::size_t>(i)];
    return Density(std::move(out));
}

double l1_distance(const Density& a, const Density& b) {
    if (a.bins() != b.bins()) throw DomainError("l1_distance: bin counts differ");
    double sum = 0.0;
    for (int i = 0; i < a.bins(); ++i) sum += std::abs(a.weights()[i] - b.weights()[i]);
    return sum;
}

double UlamMatrix::row_sum(int i) const {
    const auto& p = row(i).probs;
    return std::accumulate(p.begin(), p.end(), 0.0);
}

double UlamMatrix::entry(int i, int j) const {
    const Row& r = row(i);
    const int k = j - r.first;
    if (k < 0 || k >= static_cast<int>(r.probs.size())) return 0.0;
    return r.probs[static_cast<std::size_t>(k)];
}

std::vector<double> UlamMatrix::apply_left(std::span<const double> mu) const {
    std::vector<double> out(rows_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double m = mu[i];
        if (m == 0.0) continue;
        const Row& r = rows_[i];
        double* dst = out.data() + r.first;
        for (std::size_t k = 0; k < r.probs.size(); ++k) dst[k] += m * r.probs[k];
    }
    return out;
}

UlamMatrix ulam_matrix(const NoiseKernel& kernel, int bins, int sub_points) {
    if (bins < 16) throw DomainError("ulam_matrix: need at least 16 bins");
    if (sub_points < 1) throw DomainError("ulam_matrix: sub_points must be positive");
    const MapParams& p = kernel.params();
    const double width = 1.0 / bins;
    auto bin_of = [&](double y) { return std::clamp(static_cast<int>(std::floor(y * bins)), 0, bins - 1); };

    std::vector<UlamMatrix::Row> rows(static_cast<std::size_t>(bins));
    std::vector<double> acc;
    for (int i = 0; i < bins; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        // band covering every sub-point's support
        int first = bins, last = -1;
        for (int k = 0; k < sub_points; ++k) {
            const double x = (i + (k + 0.5) / sub_points) * width;
            const double t = eval_T(p, x);
            const double s = kernel.noiseless() ? 0.0 : kernel.support_radius(x);
            first = std::min(first, bin_of(t - s));
            last = std::max(last, bin_of(t + s));
        }
        acc.assign(static_cast<std::size_t>(last - first + 1), 0.0);
        for (int k = 0; k < sub_points; ++k) {
            const double x = (i + (k + 0.5) / sub_points) * width;
            const double t = eval_T(p, x);
            const double s = kernel.noiseless() ? 0.0 : kernel.support_radius(x);
            if (s == 0.0 || kernel.sigma_n(x) == 0.0) {
                acc[static_cast<std::size_t>(bin_of(t) - first)] += 1.0;
                continue;
            }
            const int lo = bin_of(t - s), hi = bin_of(t + s);
            double prev = 0.0;  // CDF at the left edge of the current bin; mass below 0 folds into bin 0
            for (int j = lo; j <= hi; ++j) {
                const double right = (j + 1) * width;
                const double cdf = j == hi ? 1.0 : kernel.kernel_cdf(x, right);
                acc[static_cast<std::size_t>(j - first)] += std::max(0.0, cdf - prev);
                prev = cdf;
            }
        }
        // trim zero ends so the band stays tight
        std::size_t a = 0, b = acc.size();
        while (a + 1 < b && acc[a] == 0.0) ++a;
        while (b - 1 > a && acc[b - 1] == 0.0) --b;
        row.first = first + static_cast<int>(a);
        row.probs.assign(acc.begin() + static_cast<std::ptrdiff_t>(a), acc.begin() + static_cast<std::ptrdiff_t>(b));
        for (double& v : row.probs) v /= sub_points;
    }
    const ConfiningInterval ci = confining_interval(kernel);
    return UlamMatrix(std::move(rows), std::pair{bin_of(ci.epsilon), bin_of(ci.upper)});
}

namespace {

double l1_change(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum;
}

void normalize(std::vector<double>& v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= total;
}

}  // namespace

StationaryResult stationary_solve(const UlamMatrix& m, double tol, const StationaryOptions& options) {
    const auto n = static_cast<std::size_t>(m.size());
    std::vector<double> mu = options.start;
    if (mu.empty()) {
        // Uniform on the confining bins. Bin 0 holds the repelling fixed point
        // 0, which the discretization turns into an absorbing state, and the
        // bins near 1 feed it; a start there would mix in delta_0.
        mu.assign(n, 0.0);
        const auto [lo, hi] = m.start_bins().value_or(std::pair{n > 1 ? 1 : 0, static_cast<int>(n) - 1});
        for (int i = lo; i <= hi; ++i) mu[static_cast<std::size_t>(i)] = 1.0;
    }
    if (mu.size() != n) throw DomainError("stationary_solve: start vector has the wrong size");
    normalize(mu);

    const double a = options.laziness;
    double change = 0.0;
    for (long it = 1; it <= options.max_iterations; ++it) {
        std::vector<double> next = m.apply_left(mu);
        if (a > 0.0)
            for (std::size_t i = 0; i < n; ++i) next[i] = a * mu[i] + (1.0 - a) * next[i];
        normalize(next);
        change = l1_change(next, mu);
        mu = std::move(next);
        if (change < tol) {
            Density d(std::move(mu));
            const double residual = invariance_residual(m, d);
            return {std::move(d), it, residual};
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "stationary_solve: no convergence after %ld iterations, last L1 change %.3e",
                  options.max_iterations, change);
    throw ConvergenceError(buf);
}

Density stationary_density(const UlamMatrix& m, double tol, const StationaryOptions& options) {
    return stationary_solve(m, tol, options).density;
}

double invariance_residual(const UlamMatrix& m, const Density& mu) {
    const std::vector<double> next = m.apply_left(mu.weights());
    return l1_change(next, mu.weights());
}

Density empirical_density(std::span<const double> values, int bins) {
    if (bins < 1) throw DomainError("empirical_density: bins must be positive");
    if (values.size() < static_cast<std::size_t>(bins))
        throw DomainError("empirical_density: fewer values than bins");
    std::vector<double> w(static_cast<std::size_t>(bins), 0.0);
    for (double v : values) {
        const int j = std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1);
        w[static_cast<std::size_t>(j)] += 1.0;
    }
    for (double& x : w) x /= static_cast<double>(values.size());
    return Density(std::move(w));
}

Density empirical_density(const Trajectory& trajectory, int bins, long transient) {
    if (transient < 0 || static_cast<std::size_t>(transient) > trajectory.values.size())
        throw DomainError("empirical_density: transient exceeds the trajectory");
    return empirical_density(std::span<const double>(trajectory.values).subspan(static_cast<std::size_t>(transient)),
                             bins);
}

ConfiningInterval confining_interval(const NoiseKernel& kernel, int grid) {
    const MapParams& p = kernel.params();
    const double upper = 1.0 - 0.5 * p.gap();
    auto lower_edge = [&](double x) { return eval_T(p, x) - kernel.support_radius(x); };

    double eps = upper;
    for (int i = 1; i <= grid; ++i) {
        const double x = upper * i / grid;
        if (!(lower_edge(x) > x)) {
            eps = x;
            break;
        }
    }
    double floor_value = eps;
    for (int i = 0; i <= grid; ++i) {
        const double x = eps + (upper - eps) * i / grid;
        floor_value = std::min(floor_value, lower_edge(x));
    }
    return {std::min(eps, floor_value), upper};
}

WeakStarResult weak_star_convergence(const MapParams& base, std::span<const double> n_list,
                                     const std::function<double(double)>& probe,
                                     const WeakStarOptions& options) {
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (!(n_list[i] > n_list[i - 1])) throw DomainError("weak_star_convergence: n_list must increase");

    WeakStarResult out;
    for (double n : n_list) {
        const NoiseKernel kernel(base.with_n(n));
        const UlamMatrix m = ulam_matrix(kernel, options.bins, options.sub_points);
        StationaryOptions so;
        so.laziness = 0.5;
        const Density d = stationary_density(m, options.tol, so);
        out.n_values.push_back(n);
        out.integrals.push_back(d.expectation(probe));
    }

    double x = iterate_T(base, base.critical() + 1e-3, options.birkhoff_transient);
    double sum = 0.0;
    for (long i = 0; i < options.birkhoff_steps; ++i) {
        x = eval_T(base, x);
        sum += probe(x);
    }
    out.reference = sum / static_cast<double>(options.birkhoff_steps);
    return out;
}

}  // namespace levdyn
