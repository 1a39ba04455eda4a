#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "levdyn/errors.hpp"
#include "levdyn/map_core.hpp"
#include "levdyn/noise_kernel.hpp"
#include "levdyn/simulator.hpp"
#include "levdyn/workbench.hpp"

using namespace levdyn;

namespace {

IngestResult ingest_text(const std::string& text, const CsvSchema& schema = {}) {
    std::istringstream in(text);
    return ingest_csv(in, schema);
}

std::string bank_rows(const std::string& id, int quarters, double base) {
    std::string out;
    for (int q = 0; q < quarters; ++q)
        out += id + ",Q" + std::to_string(q) + "," + std::to_string(base + 0.01 * (q % 5)) + "\n";
    return out;
}

BankSeries constant_series(const std::string& id, double lambda, int len = 59) {
    BankSeries s{.bank_id = id};
    for (int t = 0; t < len; ++t) {
        s.quarters.push_back("Q" + std::to_string(t));
        s.leverage.push_back(lambda);
    }
    return s;
}

double chi2_critical(int dof, double level) {
    return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), level));
}

double chi2_stat(const std::vector<double>& observed, const std::vector<double>& expected) {
    double s = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) s += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    return s;
}

}  // namespace

TEST(Ingest, WellFormedFile) {
    const IngestResult r = ingest_text("bank_id,quarter,leverage\n" + bank_rows("A", 59, 9.0));
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.series[0].bank_id, "A");
    EXPECT_EQ(r.series[0].size(), 59u);
    EXPECT_EQ(r.series[0].quarters.size(), 59u);
    EXPECT_FALSE(r.series[0].flagged());
    EXPECT_EQ(r.rows, 59);
    EXPECT_TRUE(r.warnings.empty());
}

TEST(Ingest, LowLeverageFlagsSeries) {
    const IngestResult r =
        ingest_text("bank_id,quarter,leverage\nA,Q1,5\nA,Q2,0.9\nA,Q3,5\nB,Q1,4\nB,Q2,4\nB,Q3,4\n");
    ASSERT_EQ(r.series.size(), 2u);
    EXPECT_TRUE(r.series[0].flagged());
    EXPECT_EQ(r.series[0].size(), 3u);  // kept, not dropped
    EXPECT_NE(r.series[0].flags[0].find("line 3"), std::string::npos);
    EXPECT_FALSE(r.series[1].flagged());
    EXPECT_EQ(r.flagged_rows, 1);
    EXPECT_EQ(r.flagged_series, 1);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Ingest, NonFiniteAndUnitLeverageFlag) {
    const IngestResult r = ingest_text("bank_id,quarter,leverage\nA,Q1,nan\nB,Q1,inf\nC,Q1,1\nD,Q1,1.0001\n");
    ASSERT_EQ(r.series.size(), 4u);
    EXPECT_TRUE(r.series[0].flagged());
    EXPECT_TRUE(r.series[1].flagged());
    EXPECT_TRUE(r.series[2].flagged());
    EXPECT_FALSE(r.series[3].flagged());
}

TEST(Ingest, EmptyInputs) {
    IngestResult r = ingest_text("");
    EXPECT_TRUE(r.series.empty());
    EXPECT_FALSE(r.warnings.empty());
    r = ingest_text("bank_id,quarter,leverage\n");
    EXPECT_TRUE(r.series.empty());
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Ingest, AssetsOverEquity) {
    const IngestResult r = ingest_text("quarter,bank_id,assets,equity\n2001Q1,X,100,10\n2001Q2,X,120,10\n");
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_DOUBLE_EQ(r.series[0].leverage[0], 10.0);
    EXPECT_DOUBLE_EQ(r.series[0].leverage[1], 12.0);
    EXPECT_EQ(r.series[0].quarters[1], "2001Q2");
}

TEST(Ingest, CustomSchemaAndQuoting) {
    CsvSchema schema;
    schema.id_column = "name";
    schema.time_column = "date";
    schema.leverage_column = "lev";
    const IngestResult r = ingest_text("\xEF\xBB\xBFname,date,lev\r\n\"Bank, N.A.\",2001-03-31,7.5\r\n\r\n", schema);
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.series[0].bank_id, "Bank, N.A.");
    EXPECT_DOUBLE_EQ(r.series[0].leverage[0], 7.5);
}

TEST(Ingest, Errors) {
    try {
        ingest_text("bank_id,quarter,leverage\nA,Q1,5\nA,Q2,5\nA,Q3,abc\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
    try {
        ingest_text("bank_id,quarter,leverage\nA,Q1\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(ingest_text("bank_id,quarter,leverage\n\"A,Q1,5\n"), ParseError);
    EXPECT_THROW(ingest_text("bank_id,leverage\nA,5\n"), SchemaError);
    EXPECT_THROW(ingest_text("bank_id,quarter,assets\nA,Q1,5\n"), SchemaError);
    EXPECT_THROW(ingest_csv(std::filesystem::path("/nonexistent/levdyn.csv")), IoError);
}

TEST(Ingest, FromFile) {
    const auto path = std::filesystem::temp_directory_path() / "levdyn_ingest_test.csv";
    {
        std::ofstream out(path);
        out << "bank_id,quarter,leverage\n" << bank_rows("A", 59, 9.0) << bank_rows("B", 59, 12.0);
    }
    const IngestResult r = ingest_csv(path);
    std::filesystem::remove(path);
    ASSERT_EQ(r.series.size(), 2u);
    EXPECT_EQ(r.series[1].size(), 59u);
}

TEST(Gamma, ConstantSeries) {
    const std::vector<BankSeries> set{constant_series("A", 3.0)};
    const GammaCalibration g = calibrate_gamma(set);
    EXPECT_DOUBLE_EQ(g.gamma, 2.0);
    EXPECT_EQ(g.used, 1);
    EXPECT_EQ(g.excluded_outlier, 0);
}

TEST(Gamma, SpikeIsExcluded) {
    std::vector<BankSeries> set;
    for (int i = 0; i < 4; ++i) set.push_back(constant_series("flat" + std::to_string(i), 5.0 + i));
    BankSeries spiky = constant_series("spiky", 4.0);
    for (std::size_t t = 0; t < spiky.size(); ++t) spiky.leverage[t] += 0.1 * ((t % 2) ? 1.0 : -1.0);
    spiky.leverage[30] = 4.0 + 5.0 * 0.1 * std::sqrt(59.0);  // far beyond 5 sd of the rest
    set.push_back(spiky);
    const GammaCalibration g = calibrate_gamma(set);
    EXPECT_EQ(g.excluded_outlier, 1);
    ASSERT_EQ(g.excluded_ids.size(), 1u);
    EXPECT_EQ(g.excluded_ids[0], "spiky");
    EXPECT_DOUBLE_EQ(g.gamma, 7.0);
}

TEST(Gamma, FlaggedSeriesAreExcludedAndCounted) {
    std::vector<BankSeries> set{constant_series("A", 3.0), constant_series("B", 30.0)};
    set[1].flags.push_back("line 9: leverage 0.5 <= 1");
    const GammaCalibration g = calibrate_gamma(set);
    EXPECT_EQ(g.excluded_flagged, 1);
    EXPECT_DOUBLE_EQ(g.gamma, 2.0);
    EXPECT_FALSE(g.statistic.empty());
}

TEST(Gamma, Errors) {
    EXPECT_THROW(calibrate_gamma(std::vector<BankSeries>{}), DomainError);
    std::vector<BankSeries> set{constant_series("A", 3.0)};
    set[0].leverage[5] = 50.0;
    EXPECT_THROW(calibrate_gamma(set), EmptyAfterFilterError);
}

TEST(LeverageToPhi, Examples) {
    const double gamma = 15.969;
    BankSeries top = leverage_to_phi(constant_series("A", gamma + 1.0), gamma);
    ASSERT_TRUE(top.phi.has_value());
    for (double v : *top.phi) EXPECT_DOUBLE_EQ(v, 1.0);
    EXPECT_EQ(top.phi_clamped, 0);

    BankSeries half = leverage_to_phi(constant_series("B", 1.0 + gamma / 2), gamma);
    for (double v : *half.phi) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(LeverageToPhi, RoundTrip) {
    const double gamma = 15.969;
    BankSeries s = constant_series("A", 1.0, 500);
    for (std::size_t t = 0; t < s.size(); ++t) s.leverage[t] = 1.0 + gamma * (t + 1.0) / 501.0;
    const BankSeries out = leverage_to_phi(s, gamma);
    for (std::size_t t = 0; t < s.size(); ++t) {
        const double phi = (*out.phi)[t];
        EXPECT_GT(phi, 0.0);
        EXPECT_LE(phi, 1.0);
        EXPECT_NEAR(phi * gamma + 1.0, s.leverage[t], 4 * std::numeric_limits<double>::epsilon() * s.leverage[t]);
    }
    EXPECT_EQ(out.phi_clamped, 0);
}

TEST(LeverageToPhi, ClampsAreCounted) {
    BankSeries s = constant_series("A", 3.0, 4);
    s.leverage = {0.5, 3.0, 40.0, std::nan("")};
    const BankSeries out = leverage_to_phi(s, 10.0);
    EXPECT_EQ(out.phi_clamped, 3);
    EXPECT_DOUBLE_EQ((*out.phi)[0], kPhiFloor);
    EXPECT_DOUBLE_EQ((*out.phi)[1], 0.2);
    EXPECT_DOUBLE_EQ((*out.phi)[2], 1.0);
    EXPECT_TRUE(std::isnan((*out.phi)[3]));
    EXPECT_THROW(leverage_to_phi(s, 0.0), DomainError);
}

TEST(TrainingSet, ThousandRecords) {
    TrainingSetConfig config;
    config.seed = 7;
    std::stringstream buf;
    gen_training_set(config, buf);

    std::string header;
    std::getline(buf, header);
    EXPECT_EQ(header.rfind("s0,s1,", 0), 0u);
    EXPECT_NE(header.find(",s58,k,phi_star,omega,n,seed"), std::string::npos);
    EXPECT_EQ(header.find("s59"), std::string::npos);
    buf.seekg(0);

    const std::vector<TrainingRecord> records = read_training_set(buf);
    ASSERT_EQ(records.size(), 1000u);
    for (const TrainingRecord& r : records) {
        ASSERT_EQ(r.series.size(), 59u);
        EXPECT_TRUE(admissible(r.phi_star, r.omega));
        EXPECT_TRUE(r.k >= 1 && r.k <= 3);
        EXPECT_GE(r.n, 1.0);
        EXPECT_LE(r.n, 1e4);
        EXPECT_LT(r.seed, std::uint64_t{1} << 53);
        // the chain lives on [-gap, 1]
        const double gap = make_params(r.phi_star, r.omega).gap();
        for (double x : r.series) EXPECT_TRUE(x >= -gap && x <= 1.0) << x;
    }
}

TEST(TrainingSet, ByteIdenticalForEqualSeeds) {
    TrainingSetConfig config;
    config.count = 300;
    config.seed = 42;
    std::ostringstream a, b, c;
    gen_training_set(config, a);
    gen_training_set(config, b);
    config.seed = 43;
    gen_training_set(config, c);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str(), c.str());
}

TEST(TrainingSet, RecordsRegenerateFromTheirFields) {
    TrainingSetConfig config;
    config.count = 40;
    config.length = 20;
    config.k_set = {2, 3};
    config.seed = 3;
    std::stringstream buf;
    gen_training_set(config, buf);
    for (const TrainingRecord& r : read_training_set(buf)) {
        ASSERT_EQ(r.series.size(), 20u);
        EXPECT_TRUE(r.k == 2 || r.k == 3);
        EXPECT_EQ(training_series(r.phi_star, r.omega, r.n, r.k, 20, r.seed), r.series);
    }
}

TEST(TrainingSet, MarginalsMatchSamplingLaws) {
    // oracle: admissible area per phi* and per omega bin on a fine grid
    constexpr int bins = 20, grid = 2000;
    std::vector<double> area_phi(bins, 0.0), area_omega(bins, 0.0);
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const double phi = (i + 0.5) / grid, omega = (j + 0.5) / grid;
            if (!admissible(phi, omega)) continue;
            area_phi[static_cast<std::size_t>(i * bins / grid)] += 1.0;
            area_omega[static_cast<std::size_t>(j * bins / grid)] += 1.0;
        }
    const double total_area = std::accumulate(area_phi.begin(), area_phi.end(), 0.0);

    TrainingSetConfig config;
    config.seed = 2024;
    constexpr long count = 100'000;
    std::vector<double> h_phi(bins, 0.0), h_omega(bins, 0.0), h_logn(bins, 0.0), h_k(3, 0.0);
    for (long i = 0; i < count; ++i) {
        const TrainingRecord r = sample_training_params(config, i);
        h_phi[static_cast<std::size_t>(r.phi_star * bins)] += 1;
        h_omega[static_cast<std::size_t>(r.omega * bins)] += 1;
        h_logn[std::min<std::size_t>(bins - 1, static_cast<std::size_t>(std::log10(r.n) / 4.0 * bins))] += 1;
        h_k[static_cast<std::size_t>(r.k - 1)] += 1;
    }
    std::vector<double> e_phi(bins), e_omega(bins), e_logn(bins, count / double(bins)), e_k(3, count / 3.0);
    for (int b = 0; b < bins; ++b) {
        e_phi[b] = count * area_phi[b] / total_area;
        e_omega[b] = count * area_omega[b] / total_area;
    }
    // drop bins with tiny expected counts from the phi* test (the region narrows near phi* = 0)
    std::vector<double> o2, e2;
    for (int b = 0; b < bins; ++b)
        if (e_phi[b] >= 5.0) o2.push_back(h_phi[b]), e2.push_back(e_phi[b]);
    EXPECT_LT(chi2_stat(o2, e2), chi2_critical(static_cast<int>(o2.size()) - 1, 0.01));
    EXPECT_LT(chi2_stat(h_omega, e_omega), chi2_critical(bins - 1, 0.01));
    EXPECT_LT(chi2_stat(h_logn, e_logn), chi2_critical(bins - 1, 0.01));
    EXPECT_LT(chi2_stat(h_k, e_k), chi2_critical(2, 0.01));
}

TEST(TrainingSet, Errors) {
    TrainingSetConfig config;
    std::ostringstream out;
    config.count = 0;
    EXPECT_THROW(gen_training_set(config, out), DomainError);
    config.count = 1;
    config.k_set = {};
    EXPECT_THROW(gen_training_set(config, out), DomainError);
    config.k_set = {1};
    config.n_lo = 0.5;
    EXPECT_THROW(gen_training_set(config, out), DomainError);

    std::istringstream missing("s0,s1,k,phi_star,omega,n\n0.1,0.2,1,0.5,0.5,10\n");
    EXPECT_THROW(read_training_set(missing), SchemaError);
    std::istringstream bad("s0,s1,k,phi_star,omega,n,seed\n0.1,x,1,0.5,0.5,10,3\n");
    EXPECT_THROW(read_training_set(bad), ParseError);
}

TEST(Predictions, RoundTrip) {
    const std::vector<Prediction> rows{{0, 1, 0.25, 0.5}, {1, 3, 0.845, 0.557}, {7, 2, 1.0 / 3.0, 0.999}};
    std::stringstream buf;
    write_predictions(rows, buf);
    std::string header;
    std::getline(buf, header);
    EXPECT_EQ(header, "row_id,k_hat,phi_star_hat,omega_hat");
    buf.seekg(0);
    const std::vector<Prediction> back = read_predictions(buf);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(back[i].row_id, rows[i].row_id);
        EXPECT_EQ(back[i].k_hat, rows[i].k_hat);
        EXPECT_EQ(back[i].phi_star_hat, rows[i].phi_star_hat);
        EXPECT_EQ(back[i].omega_hat, rows[i].omega_hat);
    }
}

TEST(Predictions, Errors) {
    std::istringstream k4("row_id,k_hat,phi_star_hat,omega_hat\n0,4,0.5,0.5\n");
    EXPECT_THROW(read_predictions(k4), ParseError);
    std::istringstream range("row_id,k_hat,phi_star_hat,omega_hat\n0,1,1.5,0.5\n");
    EXPECT_THROW(read_predictions(range), ParseError);
    std::istringstream schema("row_id,k_hat,phi_star_hat\n0,1,0.5\n");
    EXPECT_THROW(read_predictions(schema), SchemaError);
}

TEST(EstimateN, RecoversRebalanceTime) {
    // n is identifiable once the truncation radius exceeds about one standard deviation
    for (int k : {1, 2}) {
        for (double n : {5e3, 5e4}) {
            const MapParams p = make_params(0.845, 0.557, n);
            const Trajectory t = simulate_reduced(NoiseKernel(p), 0.4, 5000, k, 11);
            const NoiseEstimate e = estimate_n(t.values, 0.845, 0.557, k);
            EXPECT_FALSE(e.at_lower_bound || e.at_upper_bound);
            EXPECT_NEAR(std::log(e.n / n), 0.0, k == 1 ? 0.1 : 0.3) << "k=" << k << " n=" << n << " got " << e.n;
            EXPECT_NEAR(e.predicted / e.observed, 1.0, 1e-6);
        }
    }
}

TEST(EstimateN, FlatBelowTruncationScale) {
    // while the truncation radius is small the noise amplitude is s(x), not sigma_n(x)
    const std::vector<double> xs{0.2, 0.35, 0.5, 0.65, 0.8};
    const double p1 = predicted_residual_ms(xs, make_params(0.845, 0.557, 1.0), 1);
    const double p100 = predicted_residual_ms(xs, make_params(0.845, 0.557, 100.0), 1);
    const double p1e5 = predicted_residual_ms(xs, make_params(0.845, 0.557, 1e5), 1);
    EXPECT_NEAR(p100 / p1, 1.0, 0.01);
    EXPECT_LT(p1e5, 0.2 * p1);
}

TEST(EstimateN, PredictionIsExactForOneStep) {
    // one-step residual variance at the observed states, computed directly
    const MapParams p = make_params(0.845, 0.557, 50.0);
    const NoiseKernel kernel(p);
    const std::vector<double> xs{0.2, 0.35, 0.5, 0.65, 0.8};
    double direct = 0.0;
    for (std::size_t t = 0; t + 1 < xs.size(); ++t) direct += kernel.sigma_n(xs[t]) * kernel.sigma_n(xs[t]);
    direct *= kernel.standard().variance() / (xs.size() - 1);
    EXPECT_NEAR(predicted_residual_ms(xs, p, 1), direct, 1e-15);
}

TEST(EstimateN, BoundsAndErrors) {
    const MapParams p = make_params(0.845, 0.557);
    std::vector<double> orbit{0.3};
    for (int i = 0; i < 200; ++i) orbit.push_back(eval_T(p, orbit.back()));
    const NoiseEstimate e = estimate_n(orbit, 0.845, 0.557, 1);
    EXPECT_TRUE(e.at_upper_bound);

    std::vector<double> wild{0.1, 0.9, 0.1, 0.9, 0.1, 0.9};
    EXPECT_TRUE(estimate_n(wild, 0.845, 0.557, 1).at_lower_bound);

    EXPECT_THROW(estimate_n(std::vector<double>{0.5, 0.6}, 0.845, 0.557, 1), TooShortError);
    EXPECT_THROW(estimate_n(std::vector<double>{0.5, 1.2, 0.3}, 0.845, 0.557, 1), DomainError);
    EXPECT_THROW(estimate_n(std::vector<double>{0.5, std::nan(""), 0.3}, 0.845, 0.557, 1), DomainError);
    EXPECT_THROW(estimate_n(orbit, 0.845, 0.557, 0), DomainError);
}
