#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hawkesdiv/model.hpp"
#include "hawkesdiv/rng.hpp"

namespace hawkesdiv {

/// How a simulated episode ended.
enum class ExitKind { Ruin, HorizonT };

/**
 * One simulated controlled path on the uniform time grid t_i = i h.
 *
 * Per step i the vectors record: the grid time, the post-action surplus, the
 * intensity, the net cash action (dividend > 0, injection < 0), and the
 * discounted step reward e^{-rho t_i} (action for dividends, delta * action
 * for injections).  Invariants: intensity >= b at every step; surplus is
 * negative only at exit_index and only when exit_kind == Ruin (the ruined
 * pre-action surplus is recorded there, with zero action and reward).
 */
struct Trajectory {
    std::vector<double> times;
    std::vector<double> surplus;
    std::vector<double> intensity;
    std::vector<double> actions;
    std::vector<double> discounted_rewards;
    std::size_t exit_index = 0;
    ExitKind exit_kind = ExitKind::HorizonT;

    /// Total discounted reward of the episode.
    [[nodiscard]] double total_reward() const;
};

/// Barrier pair returned by a policy queried at intensity y.
struct BarrierDecision {
    double x_star;      ///< dividend barrier, >= 0
    double kappa_star;  ///< ruin/injection threshold, <= 0
};

/// Any callable mapping intensity to barriers can drive the simulator.
using BarrierFn = std::function<BarrierDecision(double y)>;

/**
 * First claim time of a Hawkes process started at intensity y >= b, sampled
 * exactly by thinning: between claims the intensity decays monotonically
 * toward b, so the current intensity always dominates and serves as the
 * proposal envelope (tightened at every proposal).  The resulting law
 * satisfies P(tau_1 >= h) = survival_probability(p, y, h).
 */
[[nodiscard]] double next_claim_time(const ModelParams& p, double y, RngStream& rng);

/// Result of advancing the uncontrolled-plus-action dynamics over one step.
struct StepResult {
    State state;           ///< state at the end of the step
    double claims_total;   ///< sum of claim sizes within the step
    int n_claims;          ///< number of claims within the step
};

/**
 * Advances (X, lambda) over a step of length h > 0.  The net cash action is
 * settled first (dividend > 0 decreases X, injection < 0 increases it); then
 * claims are generated in continuous time within the step by thinning, the
 * intensity decaying in closed form between claims and jumping by eta at each
 * claim; the surplus gains c h and loses the sampled claim sizes.
 */
StepResult step(const ModelParams& p, State s, double h, double net_action, RngStream& rng);

/**
 * Simulates one barrier-controlled episode from s0 over the grid t_i = i h,
 * i = 0..N with N h = horizon_T.  At each grid time the policy is queried at
 * the current intensity; then, writing X for the pre-action surplus:
 *
 *   - X <  kappa_star           -> ruin: episode ends, zero reward;
 *   - kappa_star <= X < 0       -> inject to zero, reward e^{-rho t} delta X;
 *   - X >= x_star               -> pay dividend X - x_star, reward
 *                                  e^{-rho t} (X - x_star);
 *   - otherwise                 -> no action.
 *
 * The horizon acts as truncation with no terminal reward: if still alive at
 * t_N the final barrier action is settled and the episode ends.  Barrier
 * outputs with x_star < 0 or kappa_star > 0 raise NumericalError (policy
 * contract violation).  Requires h > 0 and horizon_T a multiple of h.
 */
[[nodiscard]] Trajectory simulate_barrier_trajectory(const ModelParams& p, State s0, double h,
                                                     double horizon_T, const BarrierFn& barriers,
                                                     RngStream& rng);

}  // namespace hawkesdiv
