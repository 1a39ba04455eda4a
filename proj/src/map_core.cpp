#include "levdyn/map_core.hpp"

#include <cmath>
#include <vector>

#include "levdyn/errors.hpp"

namespace levdyn {

namespace {

double denom_sq(const MapParams& p, double x) {
    const double y = 1.0 - x;
    return p.b() * x * x + p.omega() * y * y;
}

double T_unit(const MapParams& p, double x) {
    return std::abs(x * (1.0 - x)) / std::sqrt(denom_sq(p, x));
}

}  // namespace

double b_of(double phi_star, double omega) {
    const double r = (1.0 - phi_star) / phi_star;
    return (1.0 - omega) * r * r;
}

MapParams MapParams::with_n(double n_rebalance) const {
    return make_params(phi_star_, omega_, n_rebalance, gamma_liq_);
}

MapParams make_params(double phi_star, double omega, double n_rebalance,
                      std::optional<double> gamma_liq) {
    if (!(phi_star > 0.0 && phi_star < 1.0))
        throw DomainError("phi_star must lie in (0, 1), got " + std::to_string(phi_star));
    if (!(omega > 0.0 && omega < 1.0))
        throw DomainError("omega must lie in (0, 1), got " + std::to_string(omega));
    if (!(n_rebalance >= 1.0))
        throw DomainError("n_rebalance must be >= 1, got " + std::to_string(n_rebalance));
    if (gamma_liq && !(*gamma_liq > 0.0))
        throw DomainError("gamma_liq must be positive");

    MapParams p;
    p.phi_star_ = phi_star;
    p.omega_ = omega;
    p.n_rebalance_ = n_rebalance;
    p.gamma_liq_ = gamma_liq;
    p.b_ = b_of(phi_star, omega);
    p.critical_ = 1.0 / (1.0 + std::cbrt(p.b_ / omega));
    p.delta_ = T_unit(p, p.critical_);
    if (!(p.delta_ < 1.0 - kDeltaMargin))
        throw InadmissibleError("T(c) = " + std::to_string(p.delta_) + " >= 1 for phi_star=" +
                                std::to_string(phi_star) + ", omega=" + std::to_string(omega));
    return p;
}

bool admissible(double phi_star, double omega) {
    if (!(phi_star > 0.0 && phi_star < 1.0 && omega > 0.0 && omega < 1.0)) return false;
    const double b = b_of(phi_star, omega);
    const double c = 1.0 / (1.0 + std::cbrt(b / omega));
    const double y = 1.0 - c;
    const double delta = c * y / std::sqrt(b * c * c + omega * y * y);
    return delta < 1.0 - kDeltaMargin;
}

double eval_T(const MapParams& p, double x) {
    if (!(x >= -p.gap() && x <= 1.0))
        throw DomainError("eval_T: x = " + std::to_string(x) + " outside [-gap, 1]");
    if (x < 0.0) return T_unit(p, std::min(-x, p.critical()));
    return T_unit(p, x);
}

double eval_T_prime(const MapParams& p, double x) {
    const double y = 1.0 - x;
    const double d = denom_sq(p, x);
    return (p.omega() * y * y * y - p.b() * x * x * x) / (d * std::sqrt(d));
}

double schwarzian(const MapParams& p, double x) {
    constexpr double h = 1e-4;
    if (!(x > 2 * h && x < 1.0 - 2 * h))
        throw DomainError("schwarzian: x must lie in (0, 1) away from the end points");
    const double d1 = eval_T_prime(p, x);
    if (std::abs(x - p.critical()) <= 2 * h || d1 == 0.0)
        throw SingularError("schwarzian is singular at the critical point");
    const double fm2 = eval_T_prime(p, x - 2 * h);
    const double fm1 = eval_T_prime(p, x - h);
    const double fp1 = eval_T_prime(p, x + h);
    const double fp2 = eval_T_prime(p, x + 2 * h);
    const double d2 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h);
    const double d3 = (-fm2 + 16 * fm1 - 30 * d1 + 16 * fp1 - fp2) / (12 * h * h);
    const double r = d2 / d1;
    return d3 / d1 - 1.5 * r * r;
}

double iterate_T(const MapParams& p, double x0, long steps) {
    double x = x0;
    for (long i = 0; i < steps; ++i) x = eval_T(p, x);
    return x;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::C1_FixedPoint: return "C1";
        case Regime::C2_TwoCycle: return "C2";
        case Regime::C3_DynamicalCore: return "C3";
    }
    return "?";
}

std::string regime_tag(const RegimeLabel& label) {
    if (!label.in_dynamical_core()) return to_string(label.regime);
    return label.periodic_attractor.value_or(false) ? "C3-periodic" : "C3-chaotic";
}

std::optional<int> find_attracting_cycle(const MapParams& p, const CycleSearch& search) {
    double x = iterate_T(p, p.critical(), search.transient);
    std::vector<double> orbit(static_cast<std::size_t>(search.max_period) + 1);
    orbit[0] = x;
    for (int k = 1; k <= search.max_period; ++k) orbit[k] = eval_T(p, orbit[k - 1]);
    for (int period = 1; period <= search.max_period; ++period) {
        if (std::abs(orbit[period] - orbit[0]) >= search.tolerance) continue;
        double log_multiplier = 0.0;
        for (int k = 0; k < period; ++k) log_multiplier += std::log(std::abs(eval_T_prime(p, orbit[k])));
        if (log_multiplier < 0.0) return period;
    }
    return std::nullopt;
}

RegimeLabel classify(const MapParams& p, const CycleSearch& search) {
    RegimeLabel label;
    const double c = p.critical();
    const double delta = p.delta();
    // phi* = omega puts the fixed point on c, so Delta = c up to rounding.
    if (delta <= c * (1.0 + 1e-12)) {
        label.regime = Regime::C1_FixedPoint;
    } else if (eval_T(p, delta) >= c) {
        label.regime = Regime::C2_TwoCycle;
    } else {
        label.regime = Regime::C3_DynamicalCore;
        label.period = find_attracting_cycle(p, search);
        label.periodic_attractor = label.period.has_value();
    }
    return label;
}

}  // namespace levdyn
