#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>

#include "fftw_lock.hpp"
#include "levdyn/chaos.hpp"
#include "levdyn/errors.hpp"
#include "levdyn/parallel.hpp"

namespace levdyn {

std::mutex& fft_planner_mutex() {
    static std::mutex m;
    return m;
}

namespace {

template <class T>
struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))) {}
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    T* data;
};

struct Plan {
    fftw_plan p = nullptr;
    ~Plan() {
        std::lock_guard lock(fft_planner_mutex());
        if (p) fftw_destroy_plan(p);
    }
};

std::vector<std::size_t> ranks_of(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<std::size_t> rank(x.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    return rank;
}

// Analytic signal of x - mean(x) via the discrete Hilbert transform.
std::vector<std::complex<double>> analytic_signal(std::span<const double> x) {
    const std::size_t n = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    FftwBuffer<fftw_complex> buf(n);
    Plan fwd, bwd;
    {
        std::lock_guard lock(fft_planner_mutex());
        fwd.p = fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd.p = fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) {
        buf.data[i][0] = x[i] - mean;
        buf.data[i][1] = 0.0;
    }
    fftw_execute(fwd.p);
    for (std::size_t k = 1; k < n; ++k) {
        double h = 0.0;
        if (2 * k < n) h = 2.0;
        else if (2 * k == n) h = 1.0;
        buf.data[k][0] *= h;
        buf.data[k][1] *= h;
    }
    fftw_execute(bwd.p);
    std::vector<std::complex<double>> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = {buf.data[i][0] / n, buf.data[i][1] / n};
    return z;
}

}  // namespace

std::vector<std::vector<double>> surrogates_aaft(std::span<const double> series, int count, std::uint64_t seed) {
    const std::size_t n = series.size();
    if (n < 32) throw TooShortError("surrogates_aaft: need at least 32 points");
    if (count < 0) throw DomainError("surrogates_aaft: count must be non-negative");

    const std::vector<std::size_t> rank = ranks_of(series);
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = n / 2 + 1;

    // plans on scratch buffers; execution below uses per-task arrays of the
    // same size and alignment
    Plan r2c, c2r;
    {
        FftwBuffer<double> re(n);
        FftwBuffer<fftw_complex> sp(half);
        std::lock_guard lock(fft_planner_mutex());
        r2c.p = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data, sp.data, FFTW_ESTIMATE);
        c2r.p = fftw_plan_dft_c2r_1d(static_cast<int>(n), sp.data, re.data, FFTW_ESTIMATE);
    }

    std::vector<std::vector<double>> out(static_cast<std::size_t>(count));
    parallel_for(out.size(), [&](std::size_t s) {
        Rng rng = make_rng(seed, s);
        std::normal_distribution<double> normal;
        // Gaussian values in the rank order of the data
        std::vector<double> g(n);
        for (double& v : g) v = normal(rng);
        std::sort(g.begin(), g.end());
        FftwBuffer<double> re(n);
        FftwBuffer<fftw_complex> sp(half);
        for (std::size_t i = 0; i < n; ++i) re.data[i] = g[rank[i]];

        fftw_execute_dft_r2c(r2c.p, re.data, sp.data);
        for (std::size_t k = 1; k < half; ++k) {
            if (2 * k == n) continue;  // Nyquist term stays real
            const double amp = std::hypot(sp.data[k][0], sp.data[k][1]);
            const double phase = 2.0 * std::numbers::pi * uniform_open01(rng);
            sp.data[k][0] = amp * std::cos(phase);
            sp.data[k][1] = amp * std::sin(phase);
        }
        fftw_execute_dft_c2r(c2r.p, sp.data, re.data);

        const std::vector<std::size_t> r = ranks_of(std::span<const double>(re.data, n));
        std::vector<double>& y = out[s];
        y.resize(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = sorted[r[i]];
    });
    return out;
}

std::vector<std::size_t> phase_cycle_boundaries(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 32) throw TooShortError("phase_cycle_boundaries: need at least 32 points");
    const std::vector<std::complex<double>> z = analytic_signal(series);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<std::size_t> bounds;
    double unwrapped = std::arg(z[0]);
    double prev_arg = unwrapped;
    for (std::size_t t = 1; t < n; ++t) {
        const double a = std::arg(z[t]);
        double d = std::remainder(a - prev_arg, two_pi);
        // a half turn is taken as forward motion
        if (d <= -std::numbers::pi + 1e-9) d += two_pi;
        const double next = unwrapped + d;
        // the bias settles phases that land on a multiple of 2 pi up to rounding
        if (std::floor((next + 1e-9) / two_pi) > std::floor((unwrapped + 1e-9) / two_pi)) bounds.push_back(t);
        unwrapped = next;
        prev_arg = a;
    }
    return bounds;
}

std::vector<std::vector<double>> surrogates_cpp(std::span<const double> series, int count, std::uint64_t seed) {
    if (count < 0) throw DomainError("surrogates_cpp: count must be non-negative");
    const std::vector<std::size_t> b = phase_cycle_boundaries(series);
    if (b.size() < 4) throw DegenerateError("surrogates_cpp: fewer than 3 phase cycles");
    const std::size_t cycles = b.size() - 1;

    std::vector<std::vector<double>> out(static_cast<std::size_t>(count));
    parallel_for(out.size(), [&](std::size_t s) {
        Rng rng = make_rng(seed, s);
        std::vector<std::size_t> perm(cycles);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double>& y = out[s];
        y.reserve(series.size());
        y.insert(y.end(), series.begin(), series.begin() + static_cast<std::ptrdiff_t>(b.front()));
        for (std::size_t j : perm)
            y.insert(y.end(), series.begin() + static_cast<std::ptrdiff_t>(b[j]),
                     series.begin() + static_cast<std::ptrdiff_t>(b[j + 1]));
        y.insert(y.end(), series.begin() + static_cast<std::ptrdiff_t>(b.back()), series.end());
    });
    return out;
}

}  // namespace levdyn
