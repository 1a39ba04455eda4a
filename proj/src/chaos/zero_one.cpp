#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <mutex>
#include <numeric>

#include "fftw_lock.hpp"
#include "levdyn/chaos.hpp"
#include "levdyn/errors.hpp"

namespace levdyn {

namespace {

double correlation(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

// Generated by tools/calibrate_k_cutoff (500 periodic + 500 chaotic logistic
// orbits per length, seed 20240601).
constexpr std::array<CutoffPoint, 5> kCutoffTable{{
    {59, 0.2693},
    {295, 0.0513},
    {590, 0.0342},
    {1180, 0.0126},
    {5000, 0.0029},
}};

}  // namespace

namespace {

// Mean-square displacement of the translation variables for n = 1..n_cut,
// with the cross term sum_j P_{j+n} conj(P_j) taken from one zero-padded FFT.
class Displacement {
public:
    Displacement(std::span<const double> x, std::size_t n_cut) : x_(x), n_cut_(n_cut) {
        const std::size_t n = x.size();
        size_ = 1;
        while (size_ < 2 * n) size_ *= 2;
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
        std::lock_guard lock(fft_planner_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(size_), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(size_), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Displacement() {
        {
            std::lock_guard lock(fft_planner_mutex());
            fftw_destroy_plan(fwd_);
            fftw_destroy_plan(bwd_);
        }
        fftw_free(buf_);
    }
    Displacement(const Displacement&) = delete;
    Displacement& operator=(const Displacement&) = delete;

    // msd[m - 1] = M_c(m)
    void compute(double c, std::vector<double>& msd) {
        const std::size_t n = x_.size();
        std::vector<double> prefix(n + 1, 0.0);  // prefix sums of |P_j|^2
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < size_; ++j) {
            if (j < n) {
                acc += x_[j] * std::polar(1.0, static_cast<double>(j + 1) * c);
                buf_[j][0] = acc.real();
                buf_[j][1] = acc.imag();
                prefix[j + 1] = prefix[j] + std::norm(acc);
            } else {
                buf_[j][0] = buf_[j][1] = 0.0;
            }
        }
        fftw_execute(fwd_);
        for (std::size_t j = 0; j < size_; ++j) {
            buf_[j][0] = buf_[j][0] * buf_[j][0] + buf_[j][1] * buf_[j][1];
            buf_[j][1] = 0.0;
        }
        fftw_execute(bwd_);
        msd.resize(n_cut_);
        for (std::size_t m = 1; m <= n_cut_; ++m) {
            const double cross = buf_[m][0] / static_cast<double>(size_);
            const double squares = (prefix[n] - prefix[m]) + prefix[n - m];
            msd[m - 1] = (squares - 2.0 * cross) / static_cast<double>(n - m);
        }
    }

private:
    std::span<const double> x_;
    std::size_t n_cut_;
    std::size_t size_ = 0;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

struct Scaled {
    std::vector<double> x;
    double mean = 0.0;  // mean of x
    bool constant = false;
};

Scaled scale_to_unit_variance(std::span<const double> series) {
    const std::size_t n = series.size();
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    Scaled out;
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        out.constant = true;
        return out;
    }
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.x[i] = series[i] / sd;
    out.mean = mean / sd;
    return out;
}

double oscillation(double mean, std::size_t m, double c) {
    return mean * mean * (1.0 - std::cos(static_cast<double>(m) * c)) / (1.0 - std::cos(c));
}

void check_length(std::span<const double> series, long min_length) {
    if (static_cast<long>(series.size()) < std::max(min_length, 30L))
        throw TooShortError("zero_one_test: series too short");
}

}  // namespace

double zero_one_kc(std::span<const double> series, double c) {
    check_length(series, 30);
    const Scaled s = scale_to_unit_variance(series);
    if (s.constant) return 0.0;
    const std::size_t n_cut = s.x.size() / 10;
    Displacement engine(s.x, n_cut);
    std::vector<double> msd, steps(n_cut);
    std::iota(steps.begin(), steps.end(), 1.0);
    engine.compute(c, msd);
    for (std::size_t m = 1; m <= n_cut; ++m) msd[m - 1] -= oscillation(s.mean, m, c);
    return correlation(steps, msd);
}

double zero_one_test(std::span<const double> series, const ZeroOneOptions& options, std::uint64_t seed) {
    if (options.n_c < 1) throw DomainError("zero_one_test: n_c must be positive");
    check_length(series, options.min_length);
    const Scaled s = scale_to_unit_variance(series);
    if (s.constant) return 0.0;
    const std::size_t n_cut = s.x.size() / 10;

    Rng rng = make_rng(seed, 0);
    Displacement engine(s.x, n_cut);
    std::vector<double> kc(static_cast<std::size_t>(options.n_c));
    std::vector<double> steps(n_cut), disp;
    std::iota(steps.begin(), steps.end(), 1.0);
    for (double& k : kc) {
        const double c = std::numbers::pi / 5 + 3 * std::numbers::pi / 5 * uniform_open01(rng);
        engine.compute(c, disp);
        for (std::size_t m = 1; m <= n_cut; ++m)
            disp[m - 1] += -oscillation(s.mean, m, c) + options.noise_sigma * (uniform_open01(rng) - 0.5);
        k = correlation(steps, disp);
    }
    const auto mid = kc.begin() + static_cast<std::ptrdiff_t>(kc.size() / 2);
    std::nth_element(kc.begin(), mid, kc.end());
    double median = *mid;
    if (kc.size() % 2 == 0) median = 0.5 * (median + *std::max_element(kc.begin(), mid));
    return std::clamp(median, 0.0, 1.0);
}

std::span<const CutoffPoint> k_cutoff_table() { return kCutoffTable; }

double k_cutoff(long length) {
    if (length < 40) throw DomainError("k_cutoff: length must be at least 40");
    const auto& t = kCutoffTable;
    if (length <= t.front().length) return t.front().cutoff;
    if (length >= t.back().length) return t.back().cutoff;
    std::size_t i = 1;
    while (t[i].length < length) ++i;
    const double u = std::log(static_cast<double>(length) / t[i - 1].length) /
                     std::log(static_cast<double>(t[i].length) / t[i - 1].length);
    return t[i - 1].cutoff + u * (t[i].cutoff - t[i - 1].cutoff);
}

}  // namespace levdyn
