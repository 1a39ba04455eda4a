#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include "csv.hpp"
#include "levdyn/errors.hpp"
#include "levdyn/noise_kernel.hpp"
#include "levdyn/parallel.hpp"
#include "levdyn/rng.hpp"
#include "levdyn/simulator.hpp"
#include "levdyn/workbench.hpp"

namespace levdyn {

#ifndef LEVDYN_VERSION
#define LEVDYN_VERSION "0.0.0"
#endif

std::string version() { return LEVDYN_VERSION; }

namespace {

constexpr std::uint64_t kSeedMask = (std::uint64_t{1} << 53) - 1;

void validate(const TrainingSetConfig& c) {
    if (c.count < 1) throw DomainError("gen_training_set: count must be >= 1");
    if (c.length < 1) throw DomainError("gen_training_set: length must be >= 1");
    if (c.k_set.empty()) throw DomainError("gen_training_set: empty k set");
    for (int k : c.k_set)
        if (k < 1) throw DomainError("gen_training_set: k must be positive");
    if (!(c.n_lo >= 1.0 && c.n_hi >= c.n_lo && std::isfinite(c.n_hi)))
        throw DomainError("gen_training_set: need 1 <= n_lo <= n_hi < inf");
}

void write_header(std::ostream& out, int length) {
    for (int i = 0; i < length; ++i) out << 's' << i << ',';
    out << "k,phi_star,omega,n,seed\n";
}

void write_record(std::ostream& out, const TrainingRecord& r) {
    std::string line;
    for (double v : r.series) {
        line += csv::format_double(v);
        line += ',';
    }
    line += std::to_string(r.k) + ',' + csv::format_double(r.phi_star) + ',' + csv::format_double(r.omega) + ',' +
            csv::format_double(r.n) + ',' + std::to_string(r.seed) + '\n';
    out << line;
}

}  // namespace

TrainingRecord sample_training_params(const TrainingSetConfig& config, long index) {
    validate(config);
    TrainingRecord r;
    r.seed = derive_seed(config.seed, static_cast<std::uint64_t>(index)) & kSeedMask;
    Rng rng = make_rng(r.seed, 0);
    do {
        r.phi_star = uniform_open01(rng);
        r.omega = uniform_open01(rng);
    } while (!admissible(r.phi_star, r.omega));
    r.k = config.k_set[static_cast<std::size_t>(rng() % config.k_set.size())];
    const double u = uniform_open01(rng);
    r.n = std::exp(std::log(config.n_lo) + u * (std::log(config.n_hi) - std::log(config.n_lo)));
    return r;
}

std::vector<double> training_series(double phi_star, double omega, double n, int k, int length,
                                    std::uint64_t seed) {
    Rng start = make_rng(seed, 1);
    const double x0 = uniform_open01(start);
    const NoiseKernel kernel(make_params(phi_star, omega, n));
    return simulate_reduced(kernel, x0, length, k, seed).values;
}

TrainingRecord make_training_record(const TrainingSetConfig& config, long index) {
    TrainingRecord r = sample_training_params(config, index);
    r.series = training_series(r.phi_star, r.omega, r.n, r.k, config.length, r.seed);
    return r;
}

void gen_training_set(const TrainingSetConfig& config, std::ostream& out) {
    validate(config);
    write_header(out, config.length);
    constexpr long chunk = 2048;
    std::vector<TrainingRecord> batch;
    for (long first = 0; first < config.count; first += chunk) {
        const long size = std::min(chunk, config.count - first);
        batch.assign(static_cast<std::size_t>(size), {});
        parallel_for(batch.size(), [&](std::size_t i) {
            batch[i] = make_training_record(config, first + static_cast<long>(i));
        });
        for (const TrainingRecord& r : batch) write_record(out, r);
        if (!out) throw IoError("gen_training_set: write failed");
    }
}

void gen_training_set(const TrainingSetConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    gen_training_set(config, out);
    out.close();
    if (!out) throw IoError("write to " + path.string() + " failed");
}

namespace {

/// Indices of s0, s1, ... in header order; SchemaError when s0 is missing or
/// the numbering has a gap.
std::vector<int> series_columns(const std::vector<std::string>& header) {
    std::vector<int> cols;
    for (int i = 0;; ++i) {
        const int c = csv::column(header, "s" + std::to_string(i));
        if (c < 0) break;
        cols.push_back(c);
    }
    if (cols.empty()) throw SchemaError("missing column 's0'");
    const std::string next = "s" + std::to_string(cols.size() + 1);
    if (csv::column(header, next) >= 0)
        throw SchemaError("series columns skip 's" + std::to_string(cols.size()) + "'");
    return cols;
}

void check_width(const std::vector<std::string>& row, const std::vector<std::string>& header, long line) {
    if (row.size() != header.size())
        throw ParseError("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                         " fields, got " + std::to_string(row.size()));
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace

std::vector<TrainingRecord> read_training_set(std::istream& in) {
    csv::Reader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError("training file has no header");
    const std::vector<int> s_cols = series_columns(header);
    const int k_col = csv::require_column(header, "k");
    const int phi_col = csv::require_column(header, "phi_star");
    const int omega_col = csv::require_column(header, "omega");
    const int n_col = csv::require_column(header, "n");
    const int seed_col = csv::require_column(header, "seed");

    std::vector<TrainingRecord> out;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const long line = reader.line();
        check_width(row, header, line);
        auto field = [&](int c) -> const std::string& { return row[static_cast<std::size_t>(c)]; };
        TrainingRecord r;
        r.series.reserve(s_cols.size());
        for (std::size_t i = 0; i < s_cols.size(); ++i)
            r.series.push_back(csv::to_double(field(s_cols[i]), line, header[static_cast<std::size_t>(s_cols[i])]));
        r.k = static_cast<int>(csv::to_long(field(k_col), line, "k"));
        r.phi_star = csv::to_double(field(phi_col), line, "phi_star");
        r.omega = csv::to_double(field(omega_col), line, "omega");
        r.n = csv::to_double(field(n_col), line, "n");
        r.seed = csv::to_u64(field(seed_col), line, "seed");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TrainingRecord> read_training_set(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return read_training_set(in);
}

std::vector<std::vector<double>> read_series_columns(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    csv::Reader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError(path.string() + ": no header");
    const std::vector<int> s_cols = series_columns(header);
    std::vector<std::vector<double>> out;
    std::vector<std::string> row;
    while (reader.next(row)) {
        check_width(row, header, reader.line());
        std::vector<double> s;
        s.reserve(s_cols.size());
        for (int c : s_cols)
            s.push_back(csv::to_double(row[static_cast<std::size_t>(c)], reader.line(),
                                       header[static_cast<std::size_t>(c)]));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Prediction> read_predictions(std::istream& in) {
    csv::Reader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError("prediction file has no header");
    const int id_col = csv::require_column(header, "row_id");
    const int k_col = csv::require_column(header, "k_hat");
    const int phi_col = csv::require_column(header, "phi_star_hat");
    const int omega_col = csv::require_column(header, "omega_hat");

    std::vector<Prediction> out;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const long line = reader.line();
        check_width(row, header, line);
        auto field = [&](int c) -> const std::string& { return row[static_cast<std::size_t>(c)]; };
        Prediction p;
        p.row_id = csv::to_long(field(id_col), line, "row_id");
        const long k = csv::to_long(field(k_col), line, "k_hat");
        if (k < 1 || k > 3) throw ParseError("line " + std::to_string(line) + ": k_hat must be 1, 2 or 3");
        p.k_hat = static_cast<int>(k);
        p.phi_star_hat = csv::to_double(field(phi_col), line, "phi_star_hat");
        p.omega_hat = csv::to_double(field(omega_col), line, "omega_hat");
        if (!(p.phi_star_hat > 0.0 && p.phi_star_hat < 1.0 && p.omega_hat > 0.0 && p.omega_hat < 1.0))
            throw ParseError("line " + std::to_string(line) + ": estimates must lie in (0, 1)");
        out.push_back(p);
    }
    return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return read_predictions(in);
}

void write_predictions(std::span<const Prediction> rows, std::ostream& out) {
    out << "row_id,k_hat,phi_star_hat,omega_hat\n";
    for (const Prediction& p : rows)
        out << p.row_id << ',' << p.k_hat << ',' << csv::format_double(p.phi_star_hat) << ','
            << csv::format_double(p.omega_hat) << '\n';
}

}  // namespace levdyn
