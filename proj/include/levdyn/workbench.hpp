#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levdyn/map_core.hpp"

namespace levdyn {

/// Library version, embedded in every JSON output.
std::string version();

// ---------------------------------------------------------------- ingestion

/// Column names of a long-format leverage file: one row per (bank, quarter).
/// Leverage is read from `leverage` when that column exists, otherwise it is
/// assets / equity.
struct CsvSchema {
    std::string id_column = "bank_id";
    std::string time_column = "quarter";
    std::string leverage_column = "leverage";
    std::string assets_column = "assets";
    std::string equity_column = "equity";
};

struct BankSeries {
    std::string bank_id;
    std::vector<std::string> quarters;
    std::vector<double> leverage;
    std::optional<std::vector<double>> phi;
    /// One entry per offending row, e.g. "line 12: leverage 0.9 <= 1".
    std::vector<std::string> flags;
    long phi_clamped = 0;

    std::size_t size() const { return leverage.size(); }
    bool flagged() const { return !flags.empty(); }
};

struct IngestResult {
    std::vector<BankSeries> series;  // in order of first appearance
    long rows = 0;
    long flagged_rows = 0;
    long flagged_series = 0;
    std::vector<std::string> warnings;
};

/// Comma separated, header row required, '.' decimals. Rows with a non-finite
/// leverage or leverage <= 1 are kept and flag their series. ParseError
/// (with the line number) for malformed rows, SchemaError for missing columns.
/// An empty file gives an empty result and a warning.
IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
IngestResult ingest_csv(std::istream& in, const CsvSchema& schema = {});

struct GammaCalibration {
    double gamma = 0.0;
    long series_total = 0;
    long excluded_flagged = 0;  // flagged at ingestion
    long excluded_outlier = 0;  // a value beyond sd_threshold per-series SDs
    long used = 0;
    std::vector<std::string> excluded_ids;
    std::string statistic = "max over kept series of max_t(lambda_t - 1)";
};

/// Drops flagged series and every series holding a value more than
/// sd_threshold (population) standard deviations from its own mean; gamma is
/// the largest lambda_t - 1 over the rest, so that phi <= 1 for all of them.
/// DomainError for an empty set, EmptyAfterFilterError when nothing is left.
GammaCalibration calibrate_gamma(std::span<const BankSeries> series, double sd_threshold = 2.0);

/// Smallest phi written by leverage_to_phi; leverage <= 1 is clamped to it.
inline constexpr double kPhiFloor = 1e-9;

/// phi_t = (lambda_t - 1) / gamma clamped to [kPhiFloor, 1]; every clamped
/// value is counted in phi_clamped (excesses over 1 below 1e-12 are rounding
/// and not counted). NaN leverage stays NaN and is counted too.
BankSeries leverage_to_phi(const BankSeries& series, double gamma);

// ------------------------------------------------------- estimator datasets

struct TrainingSetConfig {
    long count = 1000;
    int length = 59;
    std::vector<int> k_set{1, 2, 3};
    double n_lo = 1.0;
    double n_hi = 1e4;
    std::uint64_t seed = 0;
};

struct TrainingRecord {
    std::vector<double> series;
    int k = 1;
    double phi_star = 0.0;
    double omega = 0.0;
    double n = 1.0;
    std::uint64_t seed = 0;  // < 2^53 so that it survives a float reader
};

/// Record `index` of the set: its seed is derived from (config.seed, index);
/// (phi*, omega) uniform on the admissible region by rejection, k uniform on
/// k_set, n log-uniform on [n_lo, n_hi]. The series is left empty.
TrainingRecord sample_training_params(const TrainingSetConfig& config, long index);

/// Series of a record from its own fields: x0 ~ U(0, 1) from stream (seed, 1),
/// then simulate_reduced with stride k and seed `seed`, no transient.
std::vector<double> training_series(double phi_star, double omega, double n, int k, int length,
                                    std::uint64_t seed);

/// Full record `index` (parameters and series).
TrainingRecord make_training_record(const TrainingSetConfig& config, long index);

/// Writes the header `s0..s{length-1},k,phi_star,omega,n,seed` and `count`
/// records with %.17g. Identical configs give byte-identical output.
void gen_training_set(const TrainingSetConfig& config, std::ostream& out);
void gen_training_set(const TrainingSetConfig& config, const std::filesystem::path& path);

std::vector<TrainingRecord> read_training_set(std::istream& in);
std::vector<TrainingRecord> read_training_set(const std::filesystem::path& path);

/// Unlabelled series for `estimate`: the same s0.. columns, other columns ignored.
std::vector<std::vector<double>> read_series_columns(const std::filesystem::path& path);

struct Prediction {
    long row_id = 0;
    int k_hat = 1;
    double phi_star_hat = 0.0;
    double omega_hat = 0.0;
};

/// Header `row_id,k_hat,phi_star_hat,omega_hat`. ParseError / SchemaError as
/// for ingestion; k_hat must be 1, 2 or 3 and both estimates in (0, 1).
std::vector<Prediction> read_predictions(std::istream& in);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
void write_predictions(std::span<const Prediction> rows, std::ostream& out);

// ----------------------------------------------------- noise-level estimate

struct NoiseEstimate {
    double n = 1.0;
    double observed = 0.0;   // mean square of x_{t+1} - T^k(x_t)
    double predicted = 0.0;  // model value at n
    bool at_lower_bound = false;
    bool at_upper_bound = false;
};

/// Model mean square of the one-step residual x_{t+1} - T^k(x_t) along the
/// observed states: the noise of each of the k steps is carried to the end
/// through the derivative of the remaining iterates (first order).
double predicted_residual_ms(std::span<const double> series, const MapParams& p, int k);

/// n in [n_lo, n_hi] at which predicted_residual_ms matches the observed mean
/// square residual, by bracketed root finding in log n. The prediction is
/// flat in n while the truncation radius is small, so the bounds are reported
/// when the observation lies outside the attainable range.
NoiseEstimate estimate_n(std::span<const double> series, double phi_star, double omega, int k,
                         double n_lo = 1.0, double n_hi = 1e9);

}  // namespace levdyn
