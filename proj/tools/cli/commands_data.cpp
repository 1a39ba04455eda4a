#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <sstream>

#include "common.hpp"
#include "levdyn/chaos.hpp"
#include "levdyn/errors.hpp"
#include "levdyn/workbench.hpp"

namespace levdyn::cli {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --------------------------------------------------------------- chaos-test

struct ChaosOptions {
    int order = 5;
    int lag = 1;
    int surrogates = 100;
    std::uint64_t seed = 0;
    std::string input;
    std::string out;
    bool table5 = false;
    std::string region = "both";
    int samples = 500;
    std::vector<long> lengths{59, 295, 590, 1180};
    std::vector<double> n_values{20.0, 100.0};
    std::vector<int> k_values{1};
};

CdtaConfig cdta_config(const ChaosOptions& o) {
    CdtaConfig c;
    c.order = o.order;
    c.lag = o.lag;
    c.n_surrogates = o.surrogates;
    c.seed = o.seed;
    return c;
}

json chaos_config(const ChaosOptions& o) {
    return json{{"order", o.order},
                {"lag", o.lag},
                {"surrogates", o.surrogates},
                {"variant", kCdtaVariant},
                {"zero_one", {{"n_c", 100}, {"noise_sigma", 0.5}, {"min_length", 40}}}};
}

void run_chaos_batch(const ChaosOptions& o) {
    if (o.out.empty()) throw DomainError("chaos-test --input needs --out");
    const auto series = read_series_columns(o.input);
    std::ofstream out = open_output(o.out);
    out << "id,label,K,cutoff,downsample_factor,pe,band_lo,band_hi\n";
    std::map<std::string, long> counts;
    for (std::size_t i = 0; i < series.size(); ++i) {
        CdtaConfig c = cdta_config(o);
        c.seed = derive_seed(o.seed, i);
        try {
            const ChaosVerdict v = cdta_classify(series[i], c);
            ++counts[to_string(v.label)];
            // cutoff and downsampling only apply past the stochasticity gate
            out << i << ',' << to_string(v.label) << ',' << (v.K ? fmt(*v.K) : std::string()) << ','
                << (v.K ? fmt(v.cutoff_used) : std::string()) << ','
                << (v.K ? std::to_string(v.downsample_factor) : std::string()) << ',' << fmt(v.pe_original) << ','
                << fmt(v.surrogate_band_aaft.lo) << ',' << fmt(v.surrogate_band_aaft.hi) << '\n';
        } catch (const Error& e) {
            ++counts["error"];
            out << i << ",error,,,,,,\n";
            std::cerr << "series " << i << ": " << e.what() << '\n';
        }
    }
    json config = chaos_config(o);
    config["input"] = o.input;
    config["series_seed"] = "derive_seed(seed, row index)";
    json report = provenance("chaos-test", config, o.seed);
    report["output"] = o.out;
    report["series"] = series.size();
    report["counts"] = counts;
    emit(report, o.out);
}

void run_chaos_table5(const ChaosOptions& o) {
    std::vector<bool> regions;
    if (o.region == "dc" || o.region == "both") regions.push_back(true);
    if (o.region == "not-dc" || o.region == "both") regions.push_back(false);
    if (regions.empty()) throw DomainError("--region must be dc, not-dc or both");
    const CdtaConfig c = cdta_config(o);

    json cells = json::array();
    std::uint64_t cell_index = 0;
    for (bool dc : regions)
        for (double n : o.n_values)
            for (int k : o.k_values)
                for (long len : o.lengths) {
                    const Table5Cell cell = table5_cell(dc, k, len, n, o.samples, derive_seed(o.seed, cell_index++), c);
                    cells.push_back(json{{"region", dc ? "DC" : "not DC"},
                                         {"n", n},
                                         {"k", k},
                                         {"length", len},
                                         {"samples", cell.samples},
                                         {"stochastic_pct", 100.0 * cell.stochastic},
                                         {"periodic_pct", 100.0 * cell.periodic},
                                         {"chaotic_pct", 100.0 * cell.chaotic},
                                         {"errors", cell.errors}});
                }
    json config = chaos_config(o);
    config.update(json{{"table5", true},
                       {"region", o.region},
                       {"samples", o.samples},
                       {"lengths", o.lengths},
                       {"n_values", o.n_values},
                       {"k_values", o.k_values},
                       {"cell_seed", "derive_seed(seed, cell index in output order)"},
                       {"sampling", "(phi*, omega) uniform on the unit square, rejected into or out of C3; x0 ~ U(0,1)"}});
    json report = provenance("chaos-test", config, o.seed);
    report["cells"] = cells;
    emit(report);
}

// ----------------------------------------------------------------- estimate

struct EstimateOptions {
    std::string model_dir;
    std::string input;
    std::string out;
    std::string predictor = "python3 -m levdyn_cnn.predict";
    double n_min = 1.0;
    double n_max = 1e9;
};

std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char ch : s) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    return q + "'";
}

void run_estimate(const EstimateOptions& o) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(o.model_dir)) throw IoError("model directory " + o.model_dir + " does not exist");
    const auto series = read_series_columns(o.input);

    // a model directory may ship its own `predict` executable; otherwise the estimator package is used
    const fs::path local = fs::path(o.model_dir) / "predict";
    const std::string program = fs::exists(local) ? shell_quote(local.string()) : o.predictor;
    const fs::path predictions = fs::path(o.out).concat(".predictions.csv");
    const std::string cmd = program + " --model-dir " + shell_quote(o.model_dir) + " --series " +
                            shell_quote(o.input) + " --out " + shell_quote(predictions.string());
    const int status = std::system(cmd.c_str());
    if (status != 0) throw IoError("predictor failed (status " + std::to_string(status) + "): " + cmd);

    const std::vector<Prediction> rows = read_predictions(predictions);
    if (rows.size() != series.size())
        throw SchemaError("predictor returned " + std::to_string(rows.size()) + " rows for " +
                          std::to_string(series.size()) + " series");

    std::ofstream out = open_output(o.out);
    out << "row_id,k_hat,phi_star_hat,omega_hat,regime,n_hat,n_bound\n";
    long at_bound = 0, inadmissible = 0;
    for (const Prediction& p : rows) {
        if (p.row_id < 0 || static_cast<std::size_t>(p.row_id) >= series.size())
            throw SchemaError("row_id " + std::to_string(p.row_id) + " out of range");
        std::string regime = "inadmissible", n_hat, bound;
        if (admissible(p.phi_star_hat, p.omega_hat)) {
            regime = regime_tag(classify(make_params(p.phi_star_hat, p.omega_hat)));
            try {
                const NoiseEstimate e = estimate_n(series[static_cast<std::size_t>(p.row_id)], p.phi_star_hat,
                                                   p.omega_hat, p.k_hat, o.n_min, o.n_max);
                n_hat = fmt(e.n);
                bound = e.at_lower_bound ? "lower" : e.at_upper_bound ? "upper" : "";
                if (!bound.empty()) ++at_bound;
            } catch (const Error& e) {
                bound = "error";
                std::cerr << "row " << p.row_id << ": " << e.what() << '\n';
            }
        } else {
            ++inadmissible;
        }
        out << p.row_id << ',' << p.k_hat << ',' << fmt(p.phi_star_hat) << ',' << fmt(p.omega_hat) << ',' << regime
            << ',' << n_hat << ',' << bound << '\n';
    }
    json config{{"model_dir", o.model_dir}, {"input", o.input},    {"predictor", program},
                {"n_min", o.n_min},         {"n_max", o.n_max},
                {"n_method", "match mean square of x[t+1] - T^k(x[t]) to the model value, root in log n"}};
    json report = provenance("estimate", config, 0);
    report["output"] = o.out;
    report["predictions"] = predictions.string();
    report["rows"] = rows.size();
    report["n_at_bound"] = at_bound;
    report["inadmissible_estimates"] = inadmissible;
    emit(report, o.out);
}

// -------------------------------------------------------------- gen-dataset

struct GenOptions {
    long count = 1000;
    int length = 59;
    std::vector<int> k{1, 2, 3};
    std::string n_range = "1,10000";
    std::uint64_t seed = 0;
    std::string out;
};

void run_gen(const GenOptions& o) {
    TrainingSetConfig c;
    c.count = o.count;
    c.length = o.length;
    c.k_set = o.k;
    std::tie(c.n_lo, c.n_hi) = parse_range(o.n_range);
    c.seed = o.seed;
    {
        std::ofstream out = open_output(o.out);
        gen_training_set(c, out);
        out.close();
        if (!out) throw IoError("cannot write " + o.out);
    }
    json config{{"count", c.count},
                {"length", c.length},
                {"k", c.k_set},
                {"n_range", {c.n_lo, c.n_hi}},
                {"n_law", "log-uniform"},
                {"parameter_law", "(phi*, omega) uniform on the admissible region by rejection"},
                {"record_seed", "derive_seed(seed, index) & (2^53 - 1)"}};
    json report = provenance("gen-dataset", config, o.seed);
    report["output"] = o.out;
    emit(report, o.out);
}

// -------------------------------------------------------- ingest, calibrate

struct IngestOptions {
    std::string input;
    CsvSchema schema;
    std::optional<double> gamma;
    double sd_threshold = 2.0;
    std::string out;
    std::string series_out;
};

json ingest_json(const IngestResult& r) {
    return json{{"series", r.series.size()},
                {"rows", r.rows},
                {"flagged_rows", r.flagged_rows},
                {"flagged_series", r.flagged_series},
                {"warnings", r.warnings}};
}

json gamma_json(const GammaCalibration& g) {
    return json{{"gamma", g.gamma},
                {"statistic", g.statistic},
                {"series_total", g.series_total},
                {"used", g.used},
                {"excluded_flagged", g.excluded_flagged},
                {"excluded_outlier", g.excluded_outlier}};
}

json schema_json(const IngestOptions& o) {
    return json{{"id_column", o.schema.id_column},
                {"time_column", o.schema.time_column},
                {"leverage_column", o.schema.leverage_column},
                {"assets_column", o.schema.assets_column},
                {"equity_column", o.schema.equity_column}};
}

void run_calibrate(const IngestOptions& o) {
    const IngestResult r = ingest_csv(o.input, o.schema);
    const GammaCalibration g = calibrate_gamma(r.series, o.sd_threshold);
    json config{{"input", o.input}, {"schema", schema_json(o)}, {"sd_threshold", o.sd_threshold}};
    json report = provenance("calibrate", config, 0);
    report["ingest"] = ingest_json(r);
    report["calibration"] = gamma_json(g);
    report["excluded_ids"] = g.excluded_ids;
    emit(report);
}

void run_ingest(const IngestOptions& o) {
    const IngestResult r = ingest_csv(o.input, o.schema);
    json config{{"input", o.input}, {"schema", schema_json(o)}, {"sd_threshold", o.sd_threshold}};
    json report = provenance("ingest", config, 0);
    report["ingest"] = ingest_json(r);
    if (r.series.empty()) {
        emit(report);
        return;
    }

    double gamma = 0.0;
    if (o.gamma) {
        gamma = *o.gamma;
        report["calibration"] = json{{"gamma", gamma}, {"source", "--gamma"}};
    } else {
        const GammaCalibration g = calibrate_gamma(r.series, o.sd_threshold);
        gamma = g.gamma;
        report["calibration"] = gamma_json(g);
    }

    std::ofstream out = open_output(o.out);
    out << "bank_id,quarter,leverage,phi,flagged\n";
    long clamped = 0;
    std::map<std::size_t, long> lengths;
    std::vector<BankSeries> transformed;
    for (const BankSeries& s : r.series) {
        transformed.push_back(leverage_to_phi(s, gamma));
        const BankSeries& t = transformed.back();
        clamped += t.phi_clamped;
        if (!t.flagged()) ++lengths[t.size()];
        std::string id = t.bank_id;
        if (id.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char ch : id) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            id = q + "\"";
        }
        for (std::size_t i = 0; i < t.size(); ++i)
            out << id << ',' << t.quarters[i] << ',' << fmt(t.leverage[i]) << ',' << fmt((*t.phi)[i]) << ','
                << (t.flagged() ? 1 : 0) << '\n';
    }
    report["output"] = o.out;
    report["phi_clamped"] = clamped;

    if (!o.series_out.empty()) {
        // estimator input: unflagged series of the most common length, one row each
        std::size_t len = 0;
        long best = 0;
        for (const auto& [l, c] : lengths)
            if (c > best) best = c, len = l;
        std::ofstream wide = open_output(o.series_out);
        for (std::size_t i = 0; i < len; ++i) wide << 's' << i << ',';
        wide << "bank_id\n";
        long written = 0;
        for (const BankSeries& t : transformed) {
            if (t.flagged() || t.size() != len) continue;
            for (double v : *t.phi) wide << fmt(v) << ',';
            wide << t.bank_id << '\n';
            ++written;
        }
        report["series_output"] = {{"path", o.series_out}, {"length", len}, {"rows", written},
                                   {"skipped", static_cast<long>(transformed.size()) - written}};
    }
    emit(report, o.out);
}

void add_schema(CLI::App* sub, IngestOptions& o) {
    sub->add_option("--input", o.input, "Long-format CSV, one row per bank and quarter")->required();
    sub->add_option("--id-column", o.schema.id_column)->capture_default_str();
    sub->add_option("--time-column", o.schema.time_column)->capture_default_str();
    sub->add_option("--leverage-column", o.schema.leverage_column)->capture_default_str();
    sub->add_option("--assets-column", o.schema.assets_column)->capture_default_str();
    sub->add_option("--equity-column", o.schema.equity_column)->capture_default_str();
    sub->add_option("--sd-threshold", o.sd_threshold, "Outlier filter for gamma")->capture_default_str();
}

}  // namespace

void add_data_commands(CLI::App& app) {
    {
        auto o = std::make_shared<ChaosOptions>();
        CLI::App* sub = app.add_subcommand("chaos-test", "Stochastic / periodic / chaotic classification");
        sub->add_option("--order", o->order)->capture_default_str();
        sub->add_option("--lag", o->lag)->capture_default_str();
        sub->add_option("--surrogates", o->surrogates)->capture_default_str();
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_option("--input", o->input, "CSV with columns s0, s1, ... (one series per row)");
        sub->add_option("--out", o->out, "CSV id,label,K,cutoff,downsample_factor,pe,band_lo,band_hi");
        sub->add_flag("--table5", o->table5, "Run the simulated protocol instead of classifying a file");
        sub->add_option("--region", o->region, "dc, not-dc or both")->capture_default_str();
        sub->add_option("--samples", o->samples)->capture_default_str();
        sub->add_option("--lengths", o->lengths)->delimiter(',')->capture_default_str();
        sub->add_option("--n-values", o->n_values)->delimiter(',')->capture_default_str();
        sub->add_option("--k-values", o->k_values)->delimiter(',')->capture_default_str();
        sub->callback([o] {
            if (o->table5 == !o->input.empty()) throw DomainError("chaos-test needs exactly one of --input, --table5");
            if (o->table5) run_chaos_table5(*o);
            else run_chaos_batch(*o);
        });
    }
    {
        auto o = std::make_shared<EstimateOptions>();
        CLI::App* sub = app.add_subcommand("estimate", "Estimate (k, phi*, omega) with saved models, then n");
        sub->add_option("--model-dir", o->model_dir)->required();
        sub->add_option("--input", o->input, "CSV with columns s0..s58")->required();
        sub->add_option("--out", o->out)->required();
        sub->add_option("--predictor", o->predictor, "Command used when the model directory has no 'predict'")
            ->capture_default_str();
        sub->add_option("--n-min", o->n_min)->capture_default_str();
        sub->add_option("--n-max", o->n_max)->capture_default_str();
        sub->callback([o] { run_estimate(*o); });
    }
    {
        auto o = std::make_shared<GenOptions>();
        CLI::App* sub = app.add_subcommand("gen-dataset", "Training records for the estimators");
        sub->add_option("--count", o->count)->required();
        sub->add_option("--length", o->length)->capture_default_str();
        sub->add_option("--k", o->k)->delimiter(',')->capture_default_str();
        sub->add_option("--n-range", o->n_range, "lo,hi (log-uniform)")->capture_default_str();
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_option("--out", o->out)->required();
        sub->callback([o] { run_gen(*o); });
    }
    {
        auto o = std::make_shared<IngestOptions>();
        CLI::App* sub = app.add_subcommand("ingest", "Validate a leverage CSV and transform it to phi");
        add_schema(sub, *o);
        sub->add_option("--gamma", o->gamma, "Use this gamma instead of calibrating it");
        sub->add_option("--out", o->out, "CSV bank_id,quarter,leverage,phi,flagged")->required();
        sub->add_option("--series-out", o->series_out, "Wide CSV s0.. of phi for estimate");
        sub->callback([o] { run_ingest(*o); });
    }
    {
        auto o = std::make_shared<IngestOptions>();
        CLI::App* sub = app.add_subcommand("calibrate", "Calibrate gamma on a leverage CSV");
        add_schema(sub, *o);
        sub->callback([o] { run_calibrate(*o); });
    }
}

}  // namespace levdyn::cli
