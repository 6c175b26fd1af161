#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hawkesdiv/hawkes_sim.hpp"
#include "hawkesdiv/hjb.hpp"
#include "hawkesdiv/model.hpp"
#include "hawkesdiv/neural.hpp"
#include "hawkesdiv/rng.hpp"

namespace hawkesdiv::eval {

/// Which strategy produced a Monte Carlo estimate.
enum class PolicySource { PdeBarriers, LearnedActor };

/// Sample mean with the standard asymptotic 95% interval mean +- 1.96 SE.
struct MeanCi {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double se = 0.0;
};

/// Requires at least two samples.
[[nodiscard]] MeanCi mean_ci95(const std::vector<double>& xs);

/**
 * A policy factory builds one simulator-facing barrier function per path.
 * Deterministic policies ignore the path's random stream; the stochastic
 * actor mode samples from the policy head through it (the same stream also
 * drives the claims, keeping runs reproducible per path index).
 */
using PolicyFactory = std::function<BarrierFn(RngStream& path_rng)>;

/// Tabulated PDE barriers as a (deterministic) policy.
[[nodiscard]] PolicyFactory pde_policy(const hjb::BarrierPolicy& barriers);

/**
 * A learned actor as a policy.  Deterministic mode (the default for
 * reporting) plugs the head means into the positivity maps:
 * x* = softplus(mu1), kappa* = -softplus(mu2); stochastic mode samples the
 * raw pair per decision.
 */
[[nodiscard]] PolicyFactory actor_policy(const nn::Mlp& actor, double sigma_min, bool stochastic);

struct McOptions {
    double h = 1.0 / 50.0;
    double horizon_T = 50.0;
    int n_paths = 4096;
    std::uint64_t seed = 0;
};

/// One evaluated initial state.
struct EvalRow {
    double x0 = 0.0;
    double y0 = 0.0;
    std::optional<double> pde_value;     ///< benchmark, when available
    double mc_mean = 0.0;
    double mc_lo = 0.0;                  ///< 95% CI bounds
    double mc_hi = 0.0;
    std::optional<double> rel_err_pct;   ///< (mc_mean - pde)/pde * 100
    int n_paths = 0;
    PolicySource source = PolicySource::PdeBarriers;
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

/// Benchmark value lookup (x, y) -> v; empty when no PDE reference exists.
using PdeRef = std::function<double(double x, double y)>;

/**
 * Monte Carlo value of the policy from each initial state: n_paths episodes
 * per state (path rng streams indexed by state and path, so results are
 * independent of evaluation order), sample mean with 95% CI, and the
 * relative error against the benchmark when one is supplied.
 */
[[nodiscard]] EvalReport mc_value(const PolicyFactory& policy, PolicySource source,
                                  const ModelParams& p, const McOptions& opt,
                                  const std::vector<State>& states, const PdeRef& pde_ref = {});

/// One line of the PDE / MC(Opt) / MC(RL) comparison.
struct CompareRow {
    double x0 = 0.0;
    double y0 = 0.0;
    double pde = 0.0;
    double opt_mean = 0.0, opt_lo = 0.0, opt_hi = 0.0, opt_rel_pct = 0.0;
    std::optional<double> rl_mean, rl_lo, rl_hi, rl_rel_pct;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    std::string text;  ///< aligned human-readable table
};

/**
 * The benchmark comparison: per initial state the PDE value, the Monte Carlo
 * value under the extracted PDE barriers, and (when an actor is given) the
 * Monte Carlo value under the learned policy in deterministic mode.  Both
 * Monte Carlo columns share the seed, so identical policies give identical
 * estimates.
 */
[[nodiscard]] CompareResult compare_table(const Grid& g, const hjb::HowardResult& pde,
                                          const nn::Mlp* actor, double sigma_min,
                                          const ModelParams& p, const McOptions& opt,
                                          const std::vector<State>& states);

}  // namespace hawkesdiv::eval
