#include "hawkesdiv/hawkes_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "hawkesdiv/errors.hpp"

namespace hawkesdiv {

double Trajectory::total_reward() const {
    double total = 0.0;
    for (double r : discounted_rewards) total += r;
    return total;
}

double next_claim_time(const ModelParams& p, double y, RngStream& rng) {
    if (y < p.b) throw std::invalid_argument("next_claim_time: requires y >= b");
    double t = 0.0;
    double lam = y;  // exact intensity at t; valid envelope since the decay is downward
    for (;;) {
        const double gap = rng.exponential(lam);
        const double lam_at = p.b - (p.b - lam) * std::exp(-p.a * gap);
        t += gap;
        if (rng.uniform() * lam <= lam_at) return t;
        lam = lam_at;  // rejection: tighten the envelope and continue from t
    }
}

StepResult step(const ModelParams& p, State s, double h, double net_action, RngStream& rng) {
    if (!(h > 0.0)) throw std::invalid_argument("step: requires h > 0");

    double x = s.x - net_action + p.c * h;
    double claims_total = 0.0;
    int n_claims = 0;

    // Claims within (0, h] by thinning; (t, lam) is the last point where the
    // intensity is known exactly, and lam dominates the decayed intensity.
    double t = 0.0;
    double lam = s.y;
    for (;;) {
        const double gap = rng.exponential(lam);
        if (t + gap >= h) break;
        t += gap;
        const double lam_at = p.b - (p.b - lam) * std::exp(-p.a * gap);
        if (rng.uniform() * lam <= lam_at) {
            const double z = p.claim.sample(rng);
            claims_total += z;
            ++n_claims;
            lam = lam_at + p.eta;  // excitation jump at the claim
        } else {
            lam = lam_at;
        }
    }
    const double lam_end = p.b - (p.b - lam) * std::exp(-p.a * (h - t));

    x -= claims_total;
    return {State{x, lam_end}, claims_total, n_claims};
}

Trajectory simulate_barrier_trajectory(const ModelParams& p, State s0, double h, double horizon_T,
                                       const BarrierFn& barriers, RngStream& rng) {
    if (!(h > 0.0)) throw std::invalid_argument("simulate_barrier_trajectory: requires h > 0");
    const double steps_real = horizon_T / h;
    const auto n_steps = static_cast<std::size_t>(std::llround(steps_real));
    if (std::abs(steps_real - static_cast<double>(n_steps)) > 1e-9 * std::max(1.0, steps_real))
        throw std::invalid_argument("simulate_barrier_trajectory: horizon_T must be a multiple of h");

    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.surplus.reserve(n_steps + 1);
    traj.intensity.reserve(n_steps + 1);
    traj.actions.reserve(n_steps + 1);
    traj.discounted_rewards.reserve(n_steps + 1);

    State s = s0;
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * h;
        const BarrierDecision dec = barriers(s.y);
        if (!(dec.x_star >= 0.0) || !(dec.kappa_star <= 0.0))
            throw NumericalError("barrier policy contract violated: requires x_star >= 0 and kappa_star <= 0");

        if (s.x < dec.kappa_star) {
            // Ruin: record the ruined pre-action surplus, no action, no reward.
            traj.times.push_back(t);
            traj.surplus.push_back(s.x);
            traj.intensity.push_back(s.y);
            traj.actions.push_back(0.0);
            traj.discounted_rewards.push_back(0.0);
            traj.exit_index = i;
            traj.exit_kind = ExitKind::Ruin;
            return traj;
        }

        double action = 0.0;
        double reward = 0.0;
        if (s.x >= dec.x_star) {
            action = s.x - dec.x_star;
            reward = std::exp(-p.rho * t) * action;
        } else if (s.x < 0.0) {
            action = s.x;  // inject to zero: net action is the (negative) surplus
            reward = std::exp(-p.rho * t) * p.delta * action;
        }

        traj.times.push_back(t);
        traj.surplus.push_back(s.x - action);
        traj.intensity.push_back(s.y);
        traj.actions.push_back(action);
        traj.discounted_rewards.push_back(reward);

        if (i == n_steps) {
            traj.exit_index = i;
            traj.exit_kind = ExitKind::HorizonT;
            return traj;
        }

        const StepResult res = step(p, s, h, action, rng);
        s = res.state;
    }
}

}  // namespace hawkesdiv
