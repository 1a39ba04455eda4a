#include <algorithm>
#include <cmath>
#include <limits>

#include "levdyn/chaos.hpp"
#include "levdyn/errors.hpp"
#include "levdyn/noise_kernel.hpp"
#include "levdyn/parallel.hpp"
#include "levdyn/simulator.hpp"

namespace levdyn {

namespace {

Band band_of(const std::vector<std::vector<double>>& surrogates, int order, int lag) {
    Band b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : surrogates) {
        const double pe = permutation_entropy(s, order, lag);
        b.lo = std::min(b.lo, pe);
        b.hi = std::max(b.hi, pe);
    }
    return b;
}

template <class Fn>
auto staged(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const TooShortError& e) {
        throw TooShortError(std::string(stage) + ": " + e.what());
    } catch (const DegenerateError& e) {
        throw DegenerateError(std::string(stage) + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(std::string(stage) + ": " + e.what());
    }
}

struct ZeroOneStage {
    double K = 0.0;
    int factor = 1;
    long length = 0;
    bool denoised = false;
};

// Everything after the stochasticity gate.
ZeroOneStage post_gate(std::span<const double> series, const CdtaConfig& config) {
    ZeroOneStage out;
    // the denoiser needs 50 points; shorter series go to the test as they are
    out.denoised = series.size() >= 50;
    std::vector<double> clean(series.begin(), series.end());
    if (out.denoised)
        clean = staged("denoise", [&] {
            return schreiber_denoise(series, config.denoise_embed, config.denoise_radius_frac,
                                     config.denoise_iterations);
        });
    const Downsampled d = staged("downsample", [&] { return downsample_if_oversampled(clean); });
    out.factor = d.factor;
    out.length = static_cast<long>(d.series.size());
    out.K = staged("zero-one test", [&] { return zero_one_test(d.series, config.zero_one, derive_seed(config.seed, 1)); });
    return out;
}

}  // namespace

StochasticityResult stochasticity_test(std::span<const double> series, int n_surrogates, int order, int lag,
                                       std::uint64_t seed) {
    if (n_surrogates < 1) throw DomainError("stochasticity_test: need at least one surrogate");
    StochasticityResult r;
    r.pe = permutation_entropy(series, order, lag);
    r.exactly_periodic = exact_period(series).has_value();
    r.aaft = band_of(surrogates_aaft(series, n_surrogates, derive_seed(seed, 10)), order, lag);
    try {
        r.cpp = band_of(surrogates_cpp(series, n_surrogates, derive_seed(seed, 11)), order, lag);
    } catch (const DegenerateError&) {
        r.cpp.reset();
    }
    r.stochastic = !r.exactly_periodic && (r.aaft.contains(r.pe) || (r.cpp && r.cpp->contains(r.pe)));
    return r;
}

ChaosVerdict cdta_classify(std::span<const double> series, const CdtaConfig& config) {
    if (series.size() < 40) throw TooShortError("cdta_classify: need at least 40 points");
    for (double v : series)
        if (!std::isfinite(v)) throw DomainError("cdta_classify: non-finite value in series");

    ChaosVerdict v;
    const StochasticityResult gate = staged("stochasticity test", [&] {
        return stochasticity_test(series, config.n_surrogates, config.order, config.lag, derive_seed(config.seed, 0));
    });
    v.pe_original = gate.pe;
    v.surrogate_band_aaft = gate.aaft;
    v.surrogate_band_cpp = gate.cpp;
    v.exactly_periodic = gate.exactly_periodic;
    if (gate.stochastic) {
        v.label = ChaosLabel::Stochastic;
        return v;
    }

    const ZeroOneStage z = post_gate(series, config);
    v.K = z.K;
    v.denoised = z.denoised;
    v.downsample_factor = z.factor;
    v.length_tested = z.length;
    v.cutoff_used = k_cutoff(z.length);
    v.label = z.K > v.cutoff_used ? ChaosLabel::Chaotic : ChaosLabel::Periodic;
    return v;
}

std::vector<double> logistic_orbit(double r, double x0, long length, long transient) {
    if (!(r > 0.0 && r <= 4.0)) throw DomainError("logistic_orbit: r must lie in (0, 4]");
    if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("logistic_orbit: x0 must lie in (0, 1)");
    double x = x0;
    for (long i = 0; i < transient; ++i) x = r * x * (1.0 - x);
    std::vector<double> out(static_cast<std::size_t>(std::max(length, 0L)));
    for (double& v : out) v = x = r * x * (1.0 - x);
    return out;
}

double logistic_lyapunov(double r, long steps) {
    double x = 0.3141592653589793;
    for (int i = 0; i < 1000; ++i) x = r * x * (1.0 - x);
    double sum = 0.0;
    for (long i = 0; i < steps; ++i) {
        sum += std::log(std::max(std::abs(r * (1.0 - 2.0 * x)), 1e-15));
        x = r * x * (1.0 - x);
    }
    return sum / static_cast<double>(steps);
}

std::vector<CutoffPoint> calibrate_k_cutoff(std::span<const long> lengths, int per_class, std::uint64_t seed,
                                            const CdtaConfig& config) {
    if (per_class < 1) throw DomainError("calibrate_k_cutoff: per_class must be positive");
    std::vector<CutoffPoint> table;
    for (std::size_t li = 0; li < lengths.size(); ++li) {
        const long length = lengths[li];
        // K for `per_class` periodic (class 0) and chaotic (class 1) orbits
        std::vector<double> k[2];
        for (int cls = 0; cls < 2; ++cls) {
            k[cls].resize(static_cast<std::size_t>(per_class));
            parallel_for(k[cls].size(), [&](std::size_t i) {
                Rng rng = make_rng(derive_seed(seed, li * 2 + static_cast<std::size_t>(cls)), i);
                double r = 0.0;
                for (;;) {
                    r = 3.0 + uniform_open01(rng);
                    const double lyap = logistic_lyapunov(r);
                    if (cls == 0 ? lyap < -0.05 : lyap > 0.05) break;
                }
                const std::vector<double> x = logistic_orbit(r, uniform_open01(rng), length);
                CdtaConfig c = config;
                c.seed = rng();
                k[cls][i] = post_gate(x, c).K;
            });
        }
        // candidate thresholds at every observed K; misclassified = periodic
        // above or chaotic at/below
        std::vector<double> cand(k[0]);
        cand.insert(cand.end(), k[1].begin(), k[1].end());
        cand.push_back(0.0);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        long best = std::numeric_limits<long>::max();
        double best_lo = 0.0, best_hi = 1.0;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            long err = 0;
            for (double v : k[0]) err += v > cand[i];
            for (double v : k[1]) err += v <= cand[i];
            if (err < best) {
                best = err;
                best_lo = cand[i];
                best_hi = i + 1 < cand.size() ? cand[i + 1] : 1.0;
            }
        }
        const double mid = 0.5 * (best_lo + best_hi);
        table.push_back({length, mid, mid, static_cast<double>(best) / (2.0 * per_class)});
    }
    // non-increasing in length
    std::sort(table.begin(), table.end(), [](const CutoffPoint& a, const CutoffPoint& b) { return a.length < b.length; });
    for (std::size_t i = table.size(); i-- > 1;) table[i - 1].cutoff = std::max(table[i - 1].cutoff, table[i].cutoff);
    return table;
}

MapParams sample_table5_params(bool dynamical_core, double n, Rng& rng) {
    for (;;) {
        const double phi = uniform_open01(rng), omega = uniform_open01(rng);
        if (!admissible(phi, omega)) continue;
        const MapParams p = make_params(phi, omega, n);
        const bool core = classify(p, CycleSearch{.transient = 0, .max_period = 0}).in_dynamical_core();
        if (core == dynamical_core) return p;
    }
}

Table5Cell table5_cell(bool dynamical_core, int k, long length, double n, int samples, std::uint64_t seed,
                       const CdtaConfig& config) {
    if (k < 1) throw DomainError("table5_cell: k must be positive");
    if (samples < 1) throw DomainError("table5_cell: samples must be positive");
    Table5Cell cell{dynamical_core, k, length, n, samples};
    std::vector<int> labels(static_cast<std::size_t>(samples), -1);
    parallel_for(labels.size(), [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        const MapParams p = sample_table5_params(dynamical_core, n, rng);
        const double x0 = uniform_open01(rng);
        const Trajectory t = simulate_reduced(NoiseKernel(p), x0, length, k, rng());
        CdtaConfig c = config;
        c.seed = rng();
        try {
            labels[i] = static_cast<int>(cdta_classify(t.values, c).label);
        } catch (const Error&) {
            labels[i] = -1;
        }
    });
    for (int l : labels) {
        if (l == static_cast<int>(ChaosLabel::Stochastic)) cell.stochastic += 1;
        else if (l == static_cast<int>(ChaosLabel::Periodic)) cell.periodic += 1;
        else if (l == static_cast<int>(ChaosLabel::Chaotic)) cell.chaotic += 1;
        else ++cell.errors;
    }
    cell.stochastic /= samples;
    cell.periodic /= samples;
    cell.chaotic /= samples;
    return cell;
}

}  // namespace levdyn
