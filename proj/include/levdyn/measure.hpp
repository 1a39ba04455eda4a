#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <span>
#include <vector>

#include "levdyn/noise_kernel.hpp"
#include "levdyn/simulator.hpp"

namespace levdyn {

/// Piecewise-constant probability density on a uniform grid over [0, 1];
/// weights[i] is the mass of bin i.
class Density {
public:
    Density() = default;
    explicit Density(std::vector<double> weights);

    int bins() const { return static_cast<int>(weights_.size()); }
    double bin_width() const { return 1.0 / bins(); }
    double bin_left(int i) const { return static_cast<double>(i) / bins(); }
    double bin_center(int i) const { return (i + 0.5) / bins(); }
    const std::vector<double>& weights() const { return weights_; }
    double total_mass() const;
    /// Density value (mass / width) on bin i.
    double value(int i) const { return weights_[static_cast<std::size_t>(i)] * bins(); }

    /// Integral of f against the density (Gauss-Legendre on every bin).
    double expectation(const std::function<double(double)>& f) const;
    /// Mass in [lo, hi], bins cut proportionally.
    double mass_in(double lo, double hi) const;
    /// Merge `factor` adjacent bins; bins() must be divisible by factor.
    Density coarsen(int factor) const;

private:
    std::vector<double> weights_;
};

/// L1 distance sum |w_i - v_i| (equal bin counts required).
double l1_distance(const Density& a, const Density& b);

/// Row-stochastic Ulam discretization of the Markov operator, stored as one
/// contiguous band per row.
class UlamMatrix {
public:
    struct Row {
        int first = 0;
        std::vector<double> probs;
    };

    explicit UlamMatrix(std::vector<Row> rows, std::optional<std::pair<int, int>> start_bins = std::nullopt)
        : rows_(std::move(rows)), start_bins_(start_bins) {}

    int size() const { return static_cast<int>(rows_.size()); }
    const Row& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
    double row_sum(int i) const;
    double entry(int i, int j) const;
    /// Left product (mu M)_j = sum_i mu_i M_ij.
    std::vector<double> apply_left(std::span<const double> mu) const;
    /// Inclusive bin range covering the confining interval, when known.
    const std::optional<std::pair<int, int>>& start_bins() const { return start_bins_; }

private:
    std::vector<Row> rows_;
    std::optional<std::pair<int, int>> start_bins_;
};

/// Entry (i, j) = P_{x_i}(bin j), x_i the midpoint of bin i, from the kernel CDF.
/// With sub_points > 1 the row is instead the average of P_x(bin j) over that
/// many equally spaced points of bin i, which is needed when s(x) spans only a
/// few bins. Mass falling outside [0, 1] (only from rows outside the
/// stationary support) is assigned to the nearest boundary bin.
UlamMatrix ulam_matrix(const NoiseKernel& kernel, int bins = 2048, int sub_points = 1);

struct StationaryOptions {
    long max_iterations = 100'000;
    /// Weight of the identity in mu <- a mu + (1 - a) mu M; a > 0 removes
    /// cyclic behaviour of nearly deterministic operators without changing the
    /// fixed point.
    double laziness = 0.0;
    std::vector<double> start;  // uniform on the matrix's start_bins (else bins 1..) when empty
};

struct StationaryResult {
    Density density;
    long iterations = 0;
    /// L1 norm of mu M - mu at exit.
    double residual = 0.0;
};

/// Power iteration until the L1 change per step drops below tol; throws
/// ConvergenceError (with the residual) after max_iterations.
StationaryResult stationary_solve(const UlamMatrix& m, double tol = 1e-12,
                                  const StationaryOptions& options = {});
Density stationary_density(const UlamMatrix& m, double tol = 1e-12,
                           const StationaryOptions& options = {});

/// || mu M - mu ||_1.
double invariance_residual(const UlamMatrix& m, const Density& mu);

/// Normalized histogram of trajectory values after dropping `transient`
/// leading entries. DomainError if fewer than `bins` values remain.
Density empirical_density(const Trajectory& trajectory, int bins, long transient = 0);
Density empirical_density(std::span<const double> values, int bins);

/// The interval [epsilon, 1 - gap/2] that confines every stationary measure.
/// epsilon is the first grid point at which T(x) - s(x) > x fails, lowered to
/// min T(x) - s(x) over [epsilon, 1 - gap/2] when that is smaller.
struct ConfiningInterval {
    double epsilon = 0.0;
    double upper = 1.0;
};
ConfiningInterval confining_interval(const NoiseKernel& kernel, int grid = 100'000);

struct WeakStarOptions {
    int bins = 2048;
    /// Bin-averaged rows: at large n the kernel is nearly deterministic and
    /// midpoint rows break the chain into slowly mixing cycles.
    int sub_points = 8;
    double tol = 1e-12;
    long birkhoff_steps = 10'000'000;
    long birkhoff_transient = 10'000;
};

struct WeakStarResult {
    std::vector<double> n_values;
    std::vector<double> integrals;  // integral of the probe against mu_n
    double reference = 0.0;         // noiseless Birkhoff average
};

/// Integral of `probe` against the Ulam stationary density for every n in
/// n_list, plus the long noiseless Birkhoff average from c + 1e-3.
WeakStarResult weak_star_convergence(const MapParams& base, std::span<const double> n_list,
                                     const std::function<double(double)>& probe,
                                     const WeakStarOptions& options = {});

}  // namespace levdyn
