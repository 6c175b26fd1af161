#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hawkesdiv/hawkes_sim.hpp"
#include "hawkesdiv/model.hpp"
#include "hawkesdiv/neural.hpp"
#include "hawkesdiv/rng.hpp"

namespace hawkesdiv::rl {

enum class Algo { Reinforce, ActorCritic };

/// Hyper-parameters of the policy-gradient trainers.  Defaults follow the
/// reference experiment: h = 1/50, horizon 50, batches of 2048 episodes,
/// 200 epochs, learning rates of order 1e-3.
struct TrainConfig {
    double h = 1.0 / 50.0;
    double horizon_T = 50.0;
    int batch_size = 2048;  ///< episodes per epoch (K)
    int epochs = 200;       ///< E
    double lr_actor = 1e-3;
    double lr_critic = 1e-3;
    double entropy_coef = 1e-3;  ///< exploration bonus weight at epoch 0
    bool anneal_entropy = true;  ///< linear decay of the bonus to 0 over epochs
    double sigma_min = 1e-3;     ///< floor of the policy scales
    /// Exploration scale at the start of training: train() zeroes the raw
    /// sigma rows of the freshly built actor and biases them so both policy
    /// scales start at exactly this value (must exceed sigma_min).  Kept
    /// small relative to the barrier magnitudes so the batch return curve
    /// tracks the value of the learned barriers instead of the cost of the
    /// exploration noise.
    double sigma_init = 0.2;
    std::uint64_t seed = 0;
    double x0 = 1.0;  ///< initial surplus
    double y0 = 2.8;  ///< initial intensity
    std::vector<int> hidden = {64, 64};
    bool freeze_kappa = false;        ///< learn x* only; kappa* from a supplied map
    bool critic_full_returns = false; ///< regress the critic on suffix returns
    nn::OptimizerConfig::Kind optimizer = nn::OptimizerConfig::Kind::Adam;

    /// Throws ConfigError on invalid combinations (horizon not a multiple of
    /// h, nonpositive rates, ...).
    void validate() const;

    /// Number of evolution steps N = horizon_T / h; decisions happen at
    /// t_0..t_N inclusive.
    [[nodiscard]] int n_steps() const;

    /// Entropy bonus in force at the given 0-based epoch.
    [[nodiscard]] double entropy_coef_at(int epoch) const;
};

/// One draw from the barrier policy at intensity y: raw Gaussian samples, the
/// positively mapped barriers, and the log-density of the raw pair.
struct BarrierSample {
    double x_star = 0.0;      ///< softplus(g1) >= 0
    double kappa_star = 0.0;  ///< -softplus(g2) <= 0
    double a1_raw = 0.0;
    double a2_raw = 0.0;
    double logp = 0.0;
};

/// Forward pass + two Gaussian draws + positivity maps.  The log-density is
/// that of the raw draws; the deterministic maps are applied after sampling
/// and therefore leave the score identity untouched.
[[nodiscard]] BarrierSample sample_barriers(const nn::Mlp& actor, double y, double sigma_min,
                                            RngStream& rng);

/// Replaces the learned kappa* with an externally supplied map y -> kappa*.
using KappaFn = std::function<double(double y)>;

/// One decision step of an episode: pre-action state, sampled raw pair, its
/// log-density, and the discounted step reward.
struct StepRecord {
    double x_pre = 0.0;
    double y = 0.0;
    double a1_raw = 0.0;
    double a2_raw = 0.0;
    double logp = 0.0;
    double reward = 0.0;
};

/// A full episode: per-step records plus summary statistics.  total_reward
/// always equals the sum of recorded step rewards.
struct Episode {
    std::vector<StepRecord> steps;
    double total_reward = 0.0;
    double entropy_sum = 0.0;  ///< sum of per-step policy entropies
    ExitKind exit = ExitKind::HorizonT;
};

/**
 * Simulates one episode from (cfg.x0, cfg.y0) under the stochastic barrier
 * policy.  At each grid time t_i (i = 0..N): observe the intensity, sample
 * barriers, then
 *
 *   X < kappa*          -> ruin, zero reward, episode ends;
 *   X >= x*             -> dividend X - x*, reward e^{-rho t_i} (X - x*);
 *   kappa* <= X < 0     -> inject to zero, reward e^{-rho t_i} delta X;
 *
 * and advance the dynamics by h (except after the final decision at t_N).
 * Every sampled decision is recorded, including the one at the ruin step:
 * the kappa* draw decides termination there, so dropping its score would
 * bias the gradient estimator.
 *
 * With frozen_kappa set (cfg.freeze_kappa), only g1 is drawn; kappa* comes
 * from the map and logp/entropy cover the single sampled component.
 */
[[nodiscard]] Episode run_episode(const nn::Mlp& actor, const ModelParams& p,
                                  const TrainConfig& cfg, RngStream& rng,
                                  const KappaFn* frozen_kappa = nullptr);

/**
 * Policy-gradient estimate from a batch (forward passes are recomputed from
 * the records; the actor must be unchanged since generation):
 *
 *   (1/K) sum_k (G_k - b) Lambda_k  +  entropy_coef * grad(mean entropy),
 *
 * where Lambda_k is the per-episode score sum and b the batch-mean baseline
 * (0 when subtract_baseline is false).  Mean entropy averages over all
 * recorded steps in the batch.
 */
[[nodiscard]] std::vector<double> reinforce_gradient(const nn::Mlp& actor,
                                                     const std::vector<Episode>& batch,
                                                     const TrainConfig& cfg, double entropy_coef,
                                                     bool subtract_baseline = true);

/// Gradient estimate + one ascent step on the actor.
void reinforce_update(nn::Mlp& actor, const std::vector<Episode>& batch, const TrainConfig& cfg,
                      double entropy_coef, nn::Optimizer& opt);

struct AcGradients {
    std::vector<double> actor;
    std::vector<double> critic;
};

/**
 * Actor and critic ascent directions from a batch.  Per episode,
 *
 *   actor:  sum_i (r_i + vhat(s_{i+1}) - vhat(s_i)) grad log p_i
 *   critic: sum_i (target_i - vhat(s_i)) grad vhat(s_i),
 *
 * with vhat = 0 after the last decision (no terminal reward) and
 * target_i = r_i + vhat(s_{i+1}) (temporal differences) or the suffix return
 * sum_{j>=i} r_j when cfg.critic_full_returns is set.  Both sums are averaged
 * over the batch; the actor direction carries the entropy bonus.
 */
[[nodiscard]] AcGradients actor_critic_gradients(const nn::Mlp& actor, const nn::Mlp& critic,
                                                 const std::vector<Episode>& batch,
                                                 const TrainConfig& cfg, double entropy_coef);

/// Gradients + one ascent step each.
void actor_critic_update(nn::Mlp& actor, nn::Mlp& critic, const std::vector<Episode>& batch,
                         const TrainConfig& cfg, double entropy_coef, nn::Optimizer& actor_opt,
                         nn::Optimizer& critic_opt);

/// Per-epoch training statistics (computed on the pre-update batch).
struct EpochMetrics {
    int epoch = 0;
    double mean_G = 0.0;
    double std_G = 0.0;
    double mean_entropy = 0.0;
    double wall_time_s = 0.0;  ///< seconds since training start
    double ruin_frac = 0.0;    ///< fraction of episodes ended by ruin
};

struct TrainResult {
    nn::Mlp actor;
    std::optional<nn::Mlp> critic;
    std::vector<EpochMetrics> metrics;
    bool diverged = false;   ///< a non-finite gradient aborted training
    std::string error;       ///< divergence message when diverged
};

/**
 * Full training loop: epochs of batch_size episodes, one update per epoch.
 * Episodes use per-index random streams, so batch statistics are independent
 * of generation order; the whole run is deterministic in cfg.seed.  A
 * non-finite gradient stops training and returns the last finite parameters
 * with diverged = true.  cfg.freeze_kappa requires frozen_kappa.
 */
TrainResult train(const ModelParams& p, const TrainConfig& cfg, Algo algo,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {},
                  const KappaFn* frozen_kappa = nullptr);

}  // namespace hawkesdiv::rl
