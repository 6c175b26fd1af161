#include "hawkesdiv/model.hpp"

#include <cmath>
#include <stdexcept>

#include "hawkesdiv/errors.hpp"

namespace hawkesdiv {

ClaimDist ClaimDist::exponential(double beta) {
    if (!(beta > 0.0)) throw ConfigError("ClaimDist: exponential rate beta must be > 0");
    return ClaimDist(Kind::Exponential, beta);
}

double ClaimDist::density(double z) const {
    if (z < 0.0) return 0.0;
    return beta_ * std::exp(-beta_ * z);
}

double ClaimDist::cdf(double z) const {
    if (z <= 0.0) return 0.0;
    return -std::expm1(-beta_ * z);
}

double ClaimDist::mean() const { return 1.0 / beta_; }

double ClaimDist::sample(RngStream& rng) const { return rng.exponential(beta_); }

std::optional<double> ClaimDist::boundary_integral(double v0, double delta) const {
    // integral_0^{v0/delta} (v0 - delta z) beta e^{-beta z} dz
    //   = v0 - (delta/beta) (1 - e^{-beta v0 / delta})
    return v0 - (delta / beta_) * (-std::expm1(-beta_ * v0 / delta));
}

void ModelParams::validate() const {
    if (!(a > 0.0)) throw ConfigError("ModelParams: a must be > 0");
    if (!(b > 0.0)) throw ConfigError("ModelParams: b must be > 0");
    if (!(eta >= 0.0)) throw ConfigError("ModelParams: eta must be >= 0");
    if (!(rho > 0.0)) throw ConfigError("ModelParams: rho must be > 0");
    if (!(c > 0.0)) throw ConfigError("ModelParams: c must be > 0");
    if (!(delta > 1.0)) throw ConfigError("ModelParams: delta must be > 1");
}

double pre_claim_intensity(const ModelParams& p, double y, double t) {
    if (y < p.b) throw std::invalid_argument("pre_claim_intensity: requires y >= b");
    if (t < 0.0) throw std::invalid_argument("pre_claim_intensity: requires t >= 0");
    return p.b - (p.b - y) * std::exp(-p.a * t);
}

double survival_probability(const ModelParams& p, double y, double h) {
    if (y < p.b) throw std::invalid_argument("survival_probability: requires y >= b");
    if (h < 0.0) throw std::invalid_argument("survival_probability: requires h >= 0");
    // integral of the decayed intensity over [0, h]
    const double integral = p.b * h + ((y - p.b) / p.a) * (-std::expm1(-p.a * h));
    return std::exp(-integral);
}

double stationary_mean_intensity(const ModelParams& p) {
    if (!p.subcritical())
        throw NumericalError("stationary_mean_intensity: supercritical model (a <= eta)");
    return p.a * p.b / (p.a - p.eta);
}

double injection_region_value(double v0, double x, double delta) {
    return std::max(0.0, v0 + delta * x);
}

std::pair<double, double> value_bounds(double x, const ModelParams& p) {
    const double xplus = std::max(x, 0.0);
    return {xplus, xplus + p.c / p.rho};
}

}  // namespace hawkesdiv
