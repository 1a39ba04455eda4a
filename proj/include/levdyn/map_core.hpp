#pragma once

#include <limits>
#include <optional>
#include <string>

namespace levdyn {

/// Parameters of the leverage map
///
///     T(x) = |x (1 - x)| / sqrt(b x^2 + omega (1 - x)^2),
///     b    = (1 - omega) ((1 - phi_star) / phi_star)^2,
///
/// together with the derived critical geometry. Instances are immutable and
/// can only be obtained from make_params(), which rejects inadmissible points
/// (max T >= 1). An infinite n_rebalance denotes the noiseless limit.
class MapParams {
public:
    double phi_star() const { return phi_star_; }
    double omega() const { return omega_; }
    double n_rebalance() const { return n_rebalance_; }
    double b() const { return b_; }
    /// Critical point c = 1 / (1 + (b / omega)^(1/3)).
    double critical() const { return critical_; }
    /// Maximum value T(c).
    double delta() const { return delta_; }
    /// Gap 1 - T(c).
    double gap() const { return 1.0 - delta_; }
    std::optional<double> gamma_liq() const { return gamma_liq_; }
    bool noiseless() const { return n_rebalance_ == std::numeric_limits<double>::infinity(); }

    /// Same map, different rebalance time.
    MapParams with_n(double n_rebalance) const;

private:
    friend MapParams make_params(double, double, double, std::optional<double>);
    MapParams() = default;

    double phi_star_ = 0.0;
    double omega_ = 0.0;
    double n_rebalance_ = 1.0;
    double b_ = 0.0;
    double critical_ = 0.0;
    double delta_ = 0.0;
    std::optional<double> gamma_liq_;
};

/// Admissibility margin: parameters with T(c) >= 1 - kDeltaMargin are rejected.
inline constexpr double kDeltaMargin = 1e-12;

/// b as a function of (phi_star, omega).
double b_of(double phi_star, double omega);

/// Throws DomainError for phi_star, omega outside (0, 1) or n_rebalance < 1,
/// InadmissibleError when T(c) >= 1.
MapParams make_params(double phi_star, double omega, double n_rebalance = 1.0,
                      std::optional<double> gamma_liq = std::nullopt);

/// True iff make_params would accept (phi_star, omega).
bool admissible(double phi_star, double omega);

/// T on [-gap, 1]. For x < 0 the mirror extension T(min(-x, c)) is used.
double eval_T(const MapParams& p, double x);

/// Signed derivative of T on [0, 1]; closed form
///     T'(x) = (omega (1 - x)^3 - b x^3) / (b x^2 + omega (1 - x)^2)^(3/2).
double eval_T_prime(const MapParams& p, double x);

/// Schwarzian derivative T'''/T' - 1.5 (T''/T')^2. The higher derivatives are
/// five-point central differences (step 1e-4) of the closed-form T'.
/// Throws SingularError at (or within one stencil width of) the critical point.
double schwarzian(const MapParams& p, double x);

/// Applies T `steps` times.
double iterate_T(const MapParams& p, double x0, long steps);

enum class Regime { C1_FixedPoint, C2_TwoCycle, C3_DynamicalCore };

struct RegimeLabel {
    Regime regime = Regime::C1_FixedPoint;
    /// Set only for C3: whether an attracting cycle was found inside the core.
    std::optional<bool> periodic_attractor;
    /// Period of the detected cycle (C3 with periodic_attractor == true).
    std::optional<int> period;

    bool in_dynamical_core() const { return regime == Regime::C3_DynamicalCore; }
    /// Non-core regimes are always periodic.
    bool periodic() const { return !in_dynamical_core() || periodic_attractor.value_or(false); }
};

std::string to_string(Regime r);
/// Short label used in CSV output: C1, C2, C3-periodic, C3-chaotic.
std::string regime_tag(const RegimeLabel& label);

struct CycleSearch {
    long transient = 10'000;
    int max_period = 64;
    double tolerance = 1e-9;
};

/// C1 if T(c) <= c; C2 if c <= T(T(c)) < T(c); C3 otherwise. C3 points are
/// probed for an attracting cycle along the orbit of c.
RegimeLabel classify(const MapParams& p, const CycleSearch& search = {});

/// Attracting cycle of the noiseless map reached from the orbit of c, if any.
std::optional<int> find_attracting_cycle(const MapParams& p, const CycleSearch& search = {});

}  // namespace levdyn
