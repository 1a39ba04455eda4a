#include <cmath>
#include <memory>

#include "common.hpp"
#include "levdyn/errors.hpp"
#include "levdyn/lyapunov.hpp"
#include "levdyn/measure.hpp"
#include "levdyn/simulator.hpp"

namespace levdyn::cli {

namespace {

struct PointOptions {
    double phi_star = 0.845;
    double omega = 0.557;
    std::string n = "1000";
};

void add_point(CLI::App* sub, PointOptions& o, bool with_n = true) {
    sub->add_option("--phi-star", o.phi_star, "Fixed point phi*")->capture_default_str();
    sub->add_option("--omega", o.omega, "Adaptive-expectations weight")->capture_default_str();
    if (with_n) sub->add_option("--n", o.n, "Rebalance time, or 'inf'")->capture_default_str();
}

json point_json(const PointOptions& o) {
    return json{{"phi_star", o.phi_star}, {"omega", o.omega}, {"n", o.n}};
}

// ------------------------------------------------------------------ simulate

struct SimulateOptions {
    PointOptions point;
    long steps = 1000;
    int stride = 1;
    std::uint64_t seed = 0;
    double x0 = 0.5;
    long transient = 0;
    std::string out;
};

void run_simulate(const SimulateOptions& o) {
    const NoiseKernel kernel(make_params(o.point.phi_star, o.point.omega, parse_n(o.point.n)));
    const Trajectory t = simulate_reduced(kernel, o.x0, o.steps, o.stride, o.seed, o.transient);
    std::ofstream out = open_output(o.out);
    out << "t,x\n";
    char buf[64];
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, t.values[i]);
        out << buf;
    }
    out.close();
    if (!out) throw IoError("cannot write " + o.out);

    json config = point_json(o.point);
    config.update(json{{"steps", o.steps}, {"stride", o.stride}, {"x0", o.x0}, {"transient", o.transient}});
    json report = provenance("simulate", config, o.seed);
    report["output"] = o.out;
    report["kind"] = to_string(t.kind);
    report["values"] = t.values.size();
    emit(report, o.out);
}

// ---------------------------------------------------------------- stationary

struct StationaryCliOptions {
    PointOptions point;
    int bins = 2048;
    double tol = 1e-12;
    int sub_points = 1;
    double laziness = 0.0;
    long max_iterations = 100'000;
    std::string out;
};

void run_stationary(const StationaryCliOptions& o) {
    const NoiseKernel kernel(make_params(o.point.phi_star, o.point.omega, parse_n(o.point.n)));
    const UlamMatrix m = ulam_matrix(kernel, o.bins, o.sub_points);
    StationaryOptions so;
    so.laziness = o.laziness;
    so.max_iterations = o.max_iterations;
    const StationaryResult r = stationary_solve(m, o.tol, so);
    const ConfiningInterval ci = confining_interval(kernel);
    double max_row_error = 0.0;
    for (int i = 0; i < m.size(); ++i) max_row_error = std::max(max_row_error, std::abs(m.row_sum(i) - 1.0));

    json config = point_json(o.point);
    config.update(json{{"bins", o.bins},
                       {"tol", o.tol},
                       {"sub_points", o.sub_points},
                       {"laziness", o.laziness},
                       {"max_iterations", o.max_iterations}});
    json report = provenance("stationary", config, 0);
    report["iterations"] = r.iterations;
    report["invariance_residual"] = r.residual;
    report["max_row_sum_error"] = max_row_error;
    report["confining_interval"] = {ci.epsilon, ci.upper};
    report["mass_outside_confining_interval"] = std::max(0.0, 1.0 - r.density.mass_in(ci.epsilon, ci.upper));
    report["ale_from_density"] = number(lyap_average_from_density(kernel.params(), r.density));
    if (!o.out.empty()) {
        std::ofstream out = open_output(o.out);
        out << "x_left,x_right,density,mass\n";
        char buf[128];
        for (int i = 0; i < r.density.bins(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.density.bin_left(i),
                          r.density.bin_left(i) + r.density.bin_width(), r.density.value(i),
                          r.density.weights()[static_cast<std::size_t>(i)]);
            out << buf;
        }
        report["output"] = o.out;
    }
    emit(report, o.out);
}

// ----------------------------------------------------------------- lyapunov

struct LyapunovOptions {
    PointOptions point;
    int realizations = 128;
    long steps = 10'000;
    long transient = 1'000;
    std::uint64_t seed = 2024;
    bool table1 = false;
    std::string out;
};

struct TablePoint {
    double phi_star, omega;
};

// the nine parameter pairs of the published comparison table
constexpr TablePoint kTable1[9] = {{0.845, 0.557}, {0.795, 0.390}, {0.904, 0.627}, {0.821, 0.439}, {0.944, 0.826},
                                   {0.766, 0.323}, {0.258, 0.837}, {0.908, 0.804}, {0.541, 0.227}};
constexpr double kTable1N[4] = {1.0, 1e3, 1e6, 1e9};

json deterministic_json(const MapParams& p) {
    try {
        return lyap_deterministic(p);
    } catch (const DegenerateError&) {
        return nullptr;  // orbit through c, exponent -inf
    }
}

json lyapunov_point(const MapParams& base, double n, const MonteCarloBudget& budget, std::uint64_t seed) {
    const NoiseKernel kernel(base.with_n(n));
    json j{{"n", format_n(n)}};
    if (kernel.noiseless()) {
        j["ale"] = deterministic_json(base);
        return j;
    }
    const LyapunovEstimate a = lyap_average_estimate(kernel, budget, seed);
    const LyapunovEstimate r = lyap_random_estimate(kernel, budget, seed);
    j["ale"] = a.mean;
    j["ale_stderr"] = a.std_error;
    j["rle"] = r.mean;
    j["rle_stderr"] = r.std_error;
    j["near_critical_hits"] = a.near_critical_hits + r.near_critical_hits;
    return j;
}

void run_lyapunov(const LyapunovOptions& o) {
    const MonteCarloBudget budget{o.realizations, o.steps, o.transient};
    json config{{"realizations", o.realizations}, {"steps", o.steps}, {"transient", o.transient}};
    if (!o.table1) {
        config.update(point_json(o.point));
        const MapParams p = make_params(o.point.phi_star, o.point.omega);
        json report = provenance("lyapunov", config, o.seed);
        report["result"] = lyapunov_point(p, parse_n(o.point.n), budget, o.seed);
        report["det"] = deterministic_json(p);
        report["regime"] = regime_tag(classify(p));
        emit(report);
        return;
    }

    config["table1"] = true;
    config["n_values"] = {"1", "1000", "1000000", "1000000000"};
    json rows = json::array();
    std::ofstream csv;
    if (!o.out.empty()) {
        csv = open_output(o.out);
        csv << "phi_star,omega,dc,per,kind,n_1,n_1e3,n_1e6,n_1e9,det\n";
    }
    for (const TablePoint& tp : kTable1) {
        const MapParams p = make_params(tp.phi_star, tp.omega);
        const RegimeLabel label = classify(p);
        json row{{"phi_star", tp.phi_star},
                 {"omega", tp.omega},
                 {"dc", label.in_dynamical_core()},
                 {"per", label.periodic()},
                 {"det", deterministic_json(p)}};
        json cells = json::array();
        for (double n : kTable1N) cells.push_back(lyapunov_point(p, n, budget, o.seed));
        row["cells"] = cells;
        if (csv.is_open()) {
            for (const char* kind : {"ale", "rle"}) {
                csv << tp.phi_star << ',' << tp.omega << ',' << (label.in_dynamical_core() ? "yes" : "no") << ','
                    << (label.periodic() ? "yes" : "no") << ',' << kind;
                char buf[32];
                for (const json& c : cells) {
                    std::snprintf(buf, sizeof buf, ",%.3f", c[kind].get<double>());
                    csv << buf;
                }
                if (row["det"].is_null()) {
                    csv << ",\n";
                } else {
                    std::snprintf(buf, sizeof buf, ",%.3f\n", row["det"].get<double>());
                    csv << buf;
                }
            }
        }
        rows.push_back(row);
    }
    json report = provenance("lyapunov", config, o.seed);
    report["rows"] = rows;
    if (!o.out.empty()) report["output"] = o.out;
    emit(report, o.out);
}

// -------------------------------------------------------------- bifurcation

struct BifurcationOptions {
    double omega = 0.5;
    std::string phi_range = "0.5,0.999";
    int points = 1000;
    int keep = 64;
    long transient = 10'000;
    std::string out;
};

void run_bifurcation(const BifurcationOptions& o) {
    const auto [lo, hi] = parse_range(o.phi_range);
    const BifurcationData d = bifurcation_scan(o.omega, lo, hi, o.points, o.keep, o.transient);
    std::ofstream out = open_output(o.out);
    out << "phi_star,x\n";
    char buf[64];
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", d.phi_star[i], d.x[i]);
        out << buf;
    }
    json config{{"omega", o.omega}, {"phi_range", {lo, hi}}, {"points", o.points}, {"keep", o.keep},
                {"transient", o.transient}};
    json report = provenance("bifurcation", config, 0);
    report["output"] = o.out;
    report["rows"] = d.x.size();
    report["skipped_inadmissible"] = d.skipped.size();
    emit(report, o.out);
}

// -------------------------------------------------------------------- sweep

struct SweepCliOptions {
    std::string grid = "50x50";
    std::string n = "1000";
    std::string phi_range = "0,1";
    std::string omega_range = "0,1";
    int realizations = 128;
    long steps = 10'000;
    long transient = 1'000;
    bool rle = false;
    bool det = false;
    std::uint64_t seed = 2024;
    std::string out;
};

void run_sweep(const SweepCliOptions& o) {
    const auto [w, h] = parse_grid(o.grid);
    const auto [plo, phi_hi] = parse_range(o.phi_range);
    const auto [olo, ohi] = parse_range(o.omega_range);
    const double n = parse_n(o.n);
    const std::vector<double> phis = cell_centres(plo, phi_hi, w);
    const std::vector<double> omegas = cell_centres(olo, ohi, h);
    SweepOptions so;
    so.budget = {o.realizations, o.steps, o.transient};
    so.with_rle = o.rle;
    so.with_det = o.det;
    const std::vector<SweepCell> cells = sweep_grid(phis, omegas, n, o.seed, so);

    std::ofstream out = open_output(o.out);
    out << "phi_star,omega,n,ale,rle,det,stderr,regime\n";
    long inadmissible = 0, failed = 0;
    json notes = json::array();
    auto field = [](double v) {
        if (std::isnan(v)) return std::string();
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const SweepCell& c : cells) {
        if (!c.admissible) ++inadmissible;
        if (c.regime == "error") ++failed;
        if (!c.error.empty() && notes.size() < 50)
            notes.push_back(json{{"phi_star", c.phi_star}, {"omega", c.omega}, {"message", c.error}});
        out << field(c.phi_star) << ',' << field(c.omega) << ',' << format_n(c.n) << ',' << field(c.ale) << ','
            << field(c.rle) << ',' << field(c.det) << ',' << field(c.std_error) << ',' << c.regime << '\n';
    }
    json config{{"grid", o.grid},         {"n", o.n},         {"phi_range", {plo, phi_hi}}, {"omega_range", {olo, ohi}},
                {"realizations", o.realizations}, {"steps", o.steps}, {"transient", o.transient},
                {"rle", o.rle},           {"det", o.det},     {"grid_points", "cell centres"}};
    json report = provenance("sweep", config, o.seed);
    report["output"] = o.out;
    report["rows"] = cells.size();
    report["inadmissible"] = inadmissible;
    report["failed"] = failed;
    report["cell_messages"] = notes;
    emit(report, o.out);
}

// ----------------------------------------------------------- classify-params

struct ClassifyOptions {
    PointOptions point;
    std::string grid;
    std::string out;
};

json label_json(const MapParams& p) {
    const RegimeLabel l = classify(p);
    json j{{"regime", to_string(l.regime)},
           {"tag", regime_tag(l)},
           {"dynamical_core", l.in_dynamical_core()},
           {"periodic", l.periodic()},
           {"critical_point", p.critical()},
           {"delta", p.delta()},
           {"b", p.b()}};
    if (l.period) j["period"] = *l.period;
    return j;
}

void run_classify(const ClassifyOptions& o) {
    if (o.grid.empty()) {
        json config = point_json(o.point);
        config.erase("n");
        json report = provenance("classify-params", config, 0);
        if (!admissible(o.point.phi_star, o.point.omega)) {
            report["admissible"] = false;
        } else {
            report["admissible"] = true;
            report["label"] = label_json(make_params(o.point.phi_star, o.point.omega));
        }
        emit(report);
        return;
    }
    if (o.out.empty()) throw DomainError("classify-params --grid needs --out");
    const auto [w, h] = parse_grid(o.grid);
    std::ofstream out = open_output(o.out);
    out << "phi_star,omega,admissible,regime,period\n";
    json counts = json::object();
    for (double omega : cell_centres(0.0, 1.0, h))
        for (double phi : cell_centres(0.0, 1.0, w)) {
            std::string tag = "inadmissible", period;
            if (admissible(phi, omega)) {
                const RegimeLabel l = classify(make_params(phi, omega));
                tag = regime_tag(l);
                if (l.period) period = std::to_string(*l.period);
            }
            counts[tag] = counts.value(tag, 0) + 1;
            out << phi << ',' << omega << ',' << (tag != "inadmissible" ? 1 : 0) << ',' << tag << ',' << period
                << '\n';
        }
    json report = provenance("classify-params", json{{"grid", o.grid}, {"grid_points", "cell centres"}}, 0);
    report["output"] = o.out;
    report["counts"] = counts;
    emit(report, o.out);
}

}  // namespace

void add_model_commands(CLI::App& app) {
    {
        auto o = std::make_shared<SimulateOptions>();
        CLI::App* sub = app.add_subcommand("simulate", "Simulate the reduced stochastic map");
        add_point(sub, o->point);
        sub->add_option("--steps", o->steps, "Recorded values")->capture_default_str();
        sub->add_option("--stride", o->stride, "Chain steps per recorded value")->capture_default_str();
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_option("--x0", o->x0)->capture_default_str();
        sub->add_option("--transient", o->transient)->capture_default_str();
        sub->add_option("--out", o->out, "CSV t,x")->required();
        sub->callback([o] { run_simulate(*o); });
    }
    {
        auto o = std::make_shared<StationaryCliOptions>();
        CLI::App* sub = app.add_subcommand("stationary", "Stationary density of the Ulam discretization");
        add_point(sub, o->point);
        sub->add_option("--bins", o->bins)->capture_default_str();
        sub->add_option("--tol", o->tol)->capture_default_str();
        sub->add_option("--sub-points", o->sub_points, "Points averaged per Ulam row")->capture_default_str();
        sub->add_option("--laziness", o->laziness)->capture_default_str();
        sub->add_option("--max-iterations", o->max_iterations)->capture_default_str();
        sub->add_option("--out", o->out, "CSV x_left,x_right,density,mass");
        sub->callback([o] { run_stationary(*o); });
    }
    {
        auto o = std::make_shared<LyapunovOptions>();
        CLI::App* sub = app.add_subcommand("lyapunov", "Average, random and deterministic Lyapunov exponents");
        add_point(sub, o->point);
        sub->add_option("--realizations", o->realizations)->capture_default_str();
        sub->add_option("--steps", o->steps)->capture_default_str();
        sub->add_option("--transient", o->transient)->capture_default_str();
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_flag("--table1", o->table1, "All nine table points at n = 1, 1e3, 1e6, 1e9");
        sub->add_option("--out", o->out, "CSV of the table layout (with --table1)");
        sub->callback([o] { run_lyapunov(*o); });
    }
    {
        auto o = std::make_shared<BifurcationOptions>();
        CLI::App* sub = app.add_subcommand("bifurcation", "Noiseless bifurcation diagram in phi*");
        sub->add_option("--omega", o->omega)->capture_default_str();
        sub->add_option("--phi-range", o->phi_range, "a,b")->capture_default_str();
        sub->add_option("--points", o->points)->capture_default_str();
        sub->add_option("--keep", o->keep, "Iterates kept per phi*")->capture_default_str();
        sub->add_option("--transient", o->transient)->capture_default_str();
        sub->add_option("--out", o->out, "CSV phi_star,x")->required();
        sub->callback([o] { run_bifurcation(*o); });
    }
    {
        auto o = std::make_shared<SweepCliOptions>();
        CLI::App* sub = app.add_subcommand("sweep", "Lyapunov exponent over a (phi*, omega) grid");
        sub->add_option("--grid", o->grid, "WxH")->capture_default_str();
        sub->add_option("--n", o->n, "Rebalance time, or 'inf' for the deterministic exponent")->capture_default_str();
        sub->add_option("--phi-range", o->phi_range)->capture_default_str();
        sub->add_option("--omega-range", o->omega_range)->capture_default_str();
        sub->add_option("--realizations", o->realizations)->capture_default_str();
        sub->add_option("--steps", o->steps)->capture_default_str();
        sub->add_option("--transient", o->transient)->capture_default_str();
        sub->add_flag("--rle", o->rle, "Also compute the random Lyapunov exponent");
        sub->add_flag("--det", o->det, "Also compute the deterministic exponent for finite n");
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_option("--out", o->out, "CSV phi_star,omega,n,ale,rle,det,stderr,regime")->required();
        sub->callback([o] { run_sweep(*o); });
    }
    {
        auto o = std::make_shared<ClassifyOptions>();
        CLI::App* sub = app.add_subcommand("classify-params", "Regime of a parameter point or grid");
        add_point(sub, o->point, false);
        sub->add_option("--grid", o->grid, "WxH over the unit square instead of one point");
        sub->add_option("--out", o->out, "CSV for --grid");
        sub->callback([o] { run_classify(*o); });
    }
}

}  // namespace levdyn::cli
