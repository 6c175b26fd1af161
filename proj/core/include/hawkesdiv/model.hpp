#pragma once

#include <optional>
#include <utility>

#include "hawkesdiv/rng.hpp"

namespace hawkesdiv {

/**
 * Claim-size distribution behind a small closed interface: density, CDF,
 * mean, sampler, and an optional closed form for the surplus-zero boundary
 * integral.  Only the exponential family is shipped; the tag leaves room for
 * other distributions (the quadrature path of the solver works for any
 * density, the closed form is an optimization).
 */
class ClaimDist {
public:
    enum class Kind { Exponential };

    /// Exponential claims with rate beta > 0 (mean 1/beta).
    static ClaimDist exponential(double beta);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double beta() const { return beta_; }

    /// Density f(z) for z >= 0 (0 for z < 0).
    [[nodiscard]] double density(double z) const;
    /// Distribution function F(z) = P(Y <= z).
    [[nodiscard]] double cdf(double z) const;
    [[nodiscard]] double mean() const;

    /// One claim draw; strictly positive.
    double sample(RngStream& rng) const;

    /**
     * Closed form of the boundary integral
     *   I(v0) = integral_0^{v0/delta} (v0 - delta z) f(z) dz,
     * i.e. the expected post-claim value at surplus zero when the value below
     * zero is max(0, v0 + delta x).  For exponential claims,
     *   I(v0) = v0 - (delta/beta) (1 - e^{-beta v0 / delta}).
     * Returns nullopt for distributions without a closed form.
     */
    [[nodiscard]] std::optional<double> boundary_integral(double v0, double delta) const;

private:
    ClaimDist(Kind kind, double beta) : kind_(kind), beta_(beta) {}

    Kind kind_;
    double beta_;
};

/**
 * Economic and process constants of the dividend / capital-injection model.
 *
 * Intensity dynamics: d lambda = a (b - lambda) dt + eta dN, lambda_0 >= b.
 * Surplus dynamics:   dX = c dt - dS - dZ + dK with claim flow S.
 * Objective: expected discounted dividends minus delta times injections,
 * discounted at rate rho, up to ruin.
 *
 * Units are documented, not enforced: a, b, eta, rho carry 1/time; c carries
 * cash/time; delta is dimensionless.  All fields are immutable in spirit:
 * instances are safe to share across concurrent workers.
 */
struct ModelParams {
    double a = 2.0;       ///< intensity mean-reversion rate (1/time, > 0)
    double b = 2.0;       ///< baseline intensity (1/time, > 0)
    double eta = 0.4;     ///< excitation jump size (1/time, >= 0)
    double rho = 0.1;     ///< discount rate (1/time, > 0)
    double c = 1.0;       ///< premium rate (cash/time, > 0)
    double delta = 1.8;   ///< injection penalty factor (dimensionless, > 1)
    ClaimDist claim = ClaimDist::exponential(3.0);

    /// Throws ConfigError unless a, b, c, rho > 0, eta >= 0, delta > 1.
    void validate() const;

    /// The intensity has a finite stationary mean iff a > eta.
    [[nodiscard]] bool subcritical() const { return a > eta; }
};

/// Joint state of the controlled system: surplus x and intensity y >= b.
struct State {
    double x = 0.0;  ///< surplus (cash)
    double y = 0.0;  ///< claim-arrival intensity (1/time)
};

/**
 * Intensity at time t given no claim since time 0 and lambda_0 = y:
 * the mean-reversion ODE integrates to b - (b - y) e^{-a t}.
 * Requires y >= b and t >= 0.
 */
[[nodiscard]] double pre_claim_intensity(const ModelParams& p, double y, double t);

/**
 * Probability that no claim occurs within [0, h] starting from intensity y:
 * exp(-b h - ((y - b)/a)(1 - e^{-a h})).  Requires y >= b and h >= 0.
 */
[[nodiscard]] double survival_probability(const ModelParams& p, double y, double h);

/**
 * Long-run mean of the intensity, a b / (a - eta), from the stationarity
 * balance a (b - mean) + eta mean = 0.  Throws NumericalError when a <= eta
 * (supercritical: no finite stationary mean).
 */
[[nodiscard]] double stationary_mean_intensity(const ModelParams& p);

/**
 * Value on the negative-surplus region given the value v0 at surplus zero:
 * max(0, v0 + delta x) for x <= 0.  Zero exactly when x <= -v0/delta, the
 * injection/ruin threshold.
 */
[[nodiscard]] double injection_region_value(double v0, double x, double delta);

/// A-priori corridor for the value function: (x^+, x^+ + c/rho).
[[nodiscard]] std::pair<double, double> value_bounds(double x, const ModelParams& p);

}  // namespace hawkesdiv
