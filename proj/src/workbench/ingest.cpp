#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "csv.hpp"
#include "levdyn/errors.hpp"
#include "levdyn/workbench.hpp"

namespace levdyn {

IngestResult ingest_csv(std::istream& in, const CsvSchema& schema) {
    IngestResult out;
    csv::Reader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) {
        out.warnings.emplace_back("empty file: no header and no rows");
        return out;
    }
    const int id_col = csv::require_column(header, schema.id_column);
    const int time_col = csv::require_column(header, schema.time_column);
    int lev_col = csv::column(header, schema.leverage_column);
    int assets_col = -1, equity_col = -1;
    if (lev_col < 0) {
        assets_col = csv::column(header, schema.assets_column);
        equity_col = csv::column(header, schema.equity_column);
        if (assets_col < 0 || equity_col < 0)
            throw SchemaError("need a '" + schema.leverage_column + "' column or both '" + schema.assets_column +
                              "' and '" + schema.equity_column + "'");
    }

    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const long line = reader.line();
        if (row.size() != header.size())
            throw ParseError("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(row.size()));
        const std::string& id = row[static_cast<std::size_t>(id_col)];
        if (id.empty()) throw ParseError("line " + std::to_string(line) + ": empty " + schema.id_column);

        double lambda = 0.0;
        if (lev_col >= 0) {
            lambda = csv::to_double(row[static_cast<std::size_t>(lev_col)], line, schema.leverage_column);
        } else {
            const double a = csv::to_double(row[static_cast<std::size_t>(assets_col)], line, schema.assets_column);
            const double e = csv::to_double(row[static_cast<std::size_t>(equity_col)], line, schema.equity_column);
            lambda = a / e;
        }

        auto [it, inserted] = index.try_emplace(id, out.series.size());
        if (inserted) out.series.emplace_back().bank_id = id;
        BankSeries& s = out.series[it->second];
        s.quarters.push_back(row[static_cast<std::size_t>(time_col)]);
        s.leverage.push_back(lambda);
        ++out.rows;
        if (!std::isfinite(lambda) || lambda <= 1.0) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "line %ld: leverage %.6g %s", line, lambda,
                          std::isfinite(lambda) ? "<= 1" : "is not finite");
            s.flags.emplace_back(buf);
            ++out.flagged_rows;
        }
    }
    if (out.rows == 0) out.warnings.emplace_back("file has a header but no rows");

    std::size_t min_len = SIZE_MAX, max_len = 0;
    for (const BankSeries& s : out.series) {
        if (s.flagged()) ++out.flagged_series;
        min_len = std::min(min_len, s.size());
        max_len = std::max(max_len, s.size());
    }
    if (!out.series.empty() && min_len != max_len)
        out.warnings.emplace_back("series lengths differ: " + std::to_string(min_len) + " to " +
                                  std::to_string(max_len) + " quarters");
    if (out.flagged_series > 0)
        out.warnings.emplace_back(std::to_string(out.flagged_series) + " series flagged (" +
                                  std::to_string(out.flagged_rows) + " rows with leverage <= 1 or not finite)");
    return out;
}

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return ingest_csv(in, schema);
}

GammaCalibration calibrate_gamma(std::span<const BankSeries> series, double sd_threshold) {
    if (series.empty()) throw DomainError("calibrate_gamma: empty series set");
    GammaCalibration out;
    out.series_total = static_cast<long>(series.size());
    double gamma = -1.0;
    for (const BankSeries& s : series) {
        if (s.flagged() || s.leverage.empty()) {
            ++out.excluded_flagged;
            out.excluded_ids.push_back(s.bank_id);
            continue;
        }
        const double n = static_cast<double>(s.size());
        double mean = 0.0;
        for (double v : s.leverage) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : s.leverage) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / n);
        const bool outlier = std::any_of(s.leverage.begin(), s.leverage.end(),
                                         [&](double v) { return std::abs(v - mean) > sd_threshold * sd; });
        if (outlier) {
            ++out.excluded_outlier;
            out.excluded_ids.push_back(s.bank_id);
            continue;
        }
        ++out.used;
        for (double v : s.leverage) gamma = std::max(gamma, v - 1.0);
    }
    if (out.used == 0)
        throw EmptyAfterFilterError("calibrate_gamma: all " + std::to_string(out.series_total) +
                                    " series were excluded");
    out.gamma = gamma;
    return out;
}

BankSeries leverage_to_phi(const BankSeries& series, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("leverage_to_phi: gamma must be positive");
    BankSeries out = series;
    out.phi_clamped = 0;
    std::vector<double> phi(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double v = (series.leverage[t] - 1.0) / gamma;
        if (std::isnan(v)) {
            phi[t] = v;
            ++out.phi_clamped;
        } else if (v > 1.0) {
            phi[t] = 1.0;
            if (v > 1.0 + 1e-12) ++out.phi_clamped;  // not for rounding at lambda = gamma + 1
        } else if (v < kPhiFloor) {
            phi[t] = kPhiFloor;
            ++out.phi_clamped;
        } else {
            phi[t] = v;
        }
    }
    out.phi = std::move(phi);
    return out;
}

}  // namespace levdyn
