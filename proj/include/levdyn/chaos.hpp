#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levdyn/map_core.hpp"
#include "levdyn/rng.hpp"

namespace levdyn {

enum class ChaosLabel { Stochastic, Periodic, Chaotic };
std::string to_string(ChaosLabel label);

struct Band {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
};

inline constexpr const char* kCdtaVariant = "reimplementation";

struct ChaosVerdict {
    ChaosLabel label = ChaosLabel::Periodic;
    std::optional<double> K;  // absent iff Stochastic
    double pe_original = 0.0;
    Band surrogate_band_aaft;
    /// Empty when the series has fewer than 3 phase cycles.
    std::optional<Band> surrogate_band_cpp;
    /// Set when the gate was skipped because the series repeats exactly.
    bool exactly_periodic = false;
    bool denoised = false;  // false below 50 points
    int downsample_factor = 1;
    double cutoff_used = 0.0;
    long length_tested = 0;  // length handed to the 0-1 test
    std::string variant = kCdtaVariant;
};

/// Normalized Shannon entropy of ordinal patterns of `order` values spaced
/// `lag` apart; equal values are ranked by position. TooShortError when the
/// series has fewer than order * lag + 10 points.
double permutation_entropy(std::span<const double> series, int order = 5, int lag = 1);

/// Amplitude adjusted Fourier transform surrogates. Surrogate i depends only
/// on (seed, i), so a larger count extends a smaller one.
std::vector<std::vector<double>> surrogates_aaft(std::span<const double> series, int count,
                                                 std::uint64_t seed);

/// Boundaries of the cycles of the series: indices where the unwrapped phase
/// of the analytic signal passes a multiple of 2 pi. Cycle j is
/// [b[j], b[j+1]).
std::vector<std::size_t> phase_cycle_boundaries(std::span<const double> series);

/// Cyclic phase permutation surrogates: the complete cycles are shuffled, the
/// partial cycles at both ends stay in place. DegenerateError with fewer than
/// 3 cycles.
std::vector<std::vector<double>> surrogates_cpp(std::span<const double> series, int count,
                                                std::uint64_t seed);

/// Smallest p <= size/4 with |x[t+p] - x[t]| <= tol * range for every t, if
/// any. A constant series has period 1.
std::optional<int> exact_period(std::span<const double> series, double tol = 1e-9);

struct StochasticityResult {
    bool stochastic = false;
    double pe = 0.0;
    Band aaft;
    std::optional<Band> cpp;
    bool exactly_periodic = false;
};

/// Stochastic iff the permutation entropy of the series lies inside the
/// [min, max] band of either surrogate family. An exactly repeating series is
/// never stochastic: its surrogates reproduce it and the comparison carries
/// no information.
StochasticityResult stochasticity_test(std::span<const double> series, int n_surrogates = 100,
                                       int order = 5, int lag = 1, std::uint64_t seed = 0);

/// Simple nonlinear noise reduction: each point with a full window of `embed`
/// values (odd, centred) becomes the mean of the centre values of all windows
/// within max-norm distance radius_frac * std of its own. End points are kept.
std::vector<double> schreiber_denoise(std::span<const double> series, int embed = 7,
                                      double radius_frac = 0.1, int iterations = 1);

double lag1_autocorrelation(std::span<const double> series);

struct Downsampled {
    std::vector<double> series;
    int factor = 1;
};

/// Keeps every second point while the lag-1 autocorrelation exceeds 0.95 and
/// the halved series still has at least 40 points.
Downsampled downsample_if_oversampled(std::span<const double> series);

struct ZeroOneOptions {
    int n_c = 100;
    /// Amplitude of the uniform noise added to the displacement curve to damp
    /// resonant c values; 0 disables it.
    double noise_sigma = 0.5;
    long min_length = 40;
};

/// 0-1 test, correlation method. The series is scaled to unit variance, the
/// oscillatory term is subtracted from the mean-square displacement up to
/// n_cut = N / 10, and K is the median over c ~ U(pi/5, 4 pi/5), clipped to
/// [0, 1]. A constant series gives 0.
double zero_one_test(std::span<const double> series, const ZeroOneOptions& options = {},
                     std::uint64_t seed = 0);
/// K_c for a single c, without the added noise.
double zero_one_kc(std::span<const double> series, double c);

struct CutoffPoint {
    long length;
    double cutoff;
    // calibration diagnostics
    double raw_cutoff = 0.0;  // before the monotone adjustment
    double misclassified = 0.0;
};

/// Frozen calibration table.
std::span<const CutoffPoint> k_cutoff_table();
/// Threshold for K, interpolated linearly in log(length) and held constant
/// outside the table. DomainError below 40.
double k_cutoff(long length);

struct CdtaConfig {
    int order = 5;
    int lag = 1;
    int n_surrogates = 100;
    int denoise_embed = 7;
    double denoise_radius_frac = 0.1;
    int denoise_iterations = 1;
    ZeroOneOptions zero_one;
    std::uint64_t seed = 0;
};

/// Stochasticity gate, then denoising, downsampling and the 0-1 test against
/// k_cutoff of the tested length. Errors are re-raised with the stage name.
ChaosVerdict cdta_classify(std::span<const double> series, const CdtaConfig& config = {});

/// Calibration of the K threshold on logistic maps x -> r x (1 - x): for
/// every length, `per_class` periodic (Lyapunov < -0.05) and chaotic (> 0.05)
/// orbits with r ~ U(3, 4) after 1000 transient steps, each denoised and
/// tested as in cdta_classify. The threshold is the midpoint of the interval
/// with the fewest misclassifications; the table is then made non-increasing
/// in length.
std::vector<CutoffPoint> calibrate_k_cutoff(std::span<const long> lengths, int per_class, std::uint64_t seed,
                                            const CdtaConfig& config = {});

/// Logistic orbit after `transient` steps from x0.
std::vector<double> logistic_orbit(double r, double x0, long length, long transient = 1000);
double logistic_lyapunov(double r, long steps = 10'000);

struct Table5Cell {
    bool dynamical_core = true;
    int k = 1;
    long length = 0;
    double n = 0.0;
    int samples = 0;
    double stochastic = 0.0;  // fractions in [0, 1]
    double periodic = 0.0;
    double chaotic = 0.0;
    int errors = 0;
};

/// (phi*, omega) uniform on the unit square, rejected until admissible and in
/// (dynamical_core) or out of regime C3.
MapParams sample_table5_params(bool dynamical_core, double n, Rng& rng);

/// Appendix protocol: `samples` reduced-map series of the given length with
/// stride k from x0 ~ U(0, 1), each classified by cdta_classify.
Table5Cell table5_cell(bool dynamical_core, int k, long length, double n, int samples, std::uint64_t seed,
                       const CdtaConfig& config = {});

}  // namespace levdyn
