#include "hawkesdiv/rl.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "hawkesdiv/errors.hpp"

namespace hawkesdiv::rl {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

/// One policy draw with the forward pass done into the caller's workspace.
struct Draw {
    BarrierSample sample;
    double entropy = 0.0;
};

Draw draw_barriers(const nn::Mlp& actor, nn::Mlp::Workspace& ws, std::vector<double>& input,
                   double y, double sigma_min, RngStream& rng, const KappaFn* frozen_kappa) {
    input[0] = y;
    actor.forward(input, ws);
    const double* raw = ws.pre.back().data();
    const nn::GaussianPolicyHead head = nn::head_from_raw(raw, sigma_min);
    Draw d;
    d.sample.a1_raw = head.mu1 + head.sigma1 * rng.normal();
    d.sample.x_star = nn::softplus(d.sample.a1_raw);
    if (frozen_kappa != nullptr) {
        d.sample.kappa_star = (*frozen_kappa)(y);
        if (d.sample.kappa_star > 0.0) {
            throw NumericalError("draw_barriers: frozen kappa map returned a positive threshold");
        }
        const double z1 = (d.sample.a1_raw - head.mu1) / head.sigma1;
        d.sample.logp = -0.5 * z1 * z1 - std::log(head.sigma1) - kHalfLog2Pi;
        d.entropy = 0.5 + kHalfLog2Pi + std::log(head.sigma1);
    } else {
        d.sample.a2_raw = head.mu2 + head.sigma2 * rng.normal();
        d.sample.kappa_star = -nn::softplus(d.sample.a2_raw);
        d.sample.logp = nn::gaussian_log_prob(head, d.sample.a1_raw, d.sample.a2_raw);
        d.entropy = nn::gaussian_entropy(head);
    }
    if (!std::isfinite(d.sample.logp)) {
        throw NumericalError("draw_barriers: non-finite log-probability");
    }
    return d;
}

/// Score gradient w.r.t. the raw network outputs for one recorded step; the
/// kappa components are masked out in frozen-kappa mode.
std::array<double, 4> score_upstream(const double* raw, const TrainConfig& cfg,
                                     const StepRecord& rec) {
    std::array<double, 4> g = nn::logp_grad_raw(raw, cfg.sigma_min, rec.a1_raw, rec.a2_raw);
    if (cfg.freeze_kappa) {
        g[2] = 0.0;
        g[3] = 0.0;
    }
    return g;
}

std::array<double, 4> entropy_upstream(const double* raw, const TrainConfig& cfg) {
    std::array<double, 4> g = nn::entropy_grad_raw(raw, cfg.sigma_min);
    if (cfg.freeze_kappa) g[3] = 0.0;
    return g;
}

std::size_t batch_step_count(const std::vector<Episode>& batch) {
    std::size_t n = 0;
    for (const Episode& ep : batch) n += ep.steps.size();
    return n;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(h > 0.0)) throw ConfigError("TrainConfig: h must be positive");
    if (!(horizon_T > 0.0)) throw ConfigError("TrainConfig: horizon_T must be positive");
    const double ratio = horizon_T / h;
    const long long n = std::llround(ratio);
    if (n < 1 || std::fabs(static_cast<double>(n) * h - horizon_T) > 1e-9 * horizon_T) {
        throw ConfigError("TrainConfig: horizon_T must be an integer multiple of h");
    }
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("TrainConfig: epochs must be >= 0");
    if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) {
        throw ConfigError("TrainConfig: learning rates must be positive");
    }
    if (entropy_coef < 0.0) throw ConfigError("TrainConfig: entropy_coef must be >= 0");
    if (!(sigma_min > 0.0)) throw ConfigError("TrainConfig: sigma_min must be positive");
    if (!(sigma_init > sigma_min)) {
        throw ConfigError("TrainConfig: sigma_init must exceed sigma_min");
    }
    if (hidden.empty()) throw ConfigError("TrainConfig: need at least one hidden layer");
    for (int w : hidden) {
        if (w <= 0) throw ConfigError("TrainConfig: hidden widths must be positive");
    }
}

int TrainConfig::n_steps() const {
    return static_cast<int>(std::llround(horizon_T / h));
}

double TrainConfig::entropy_coef_at(int epoch) const {
    if (!anneal_entropy || epochs <= 0) return entropy_coef;
    const double frac = static_cast<double>(epochs - epoch) / static_cast<double>(epochs);
    return entropy_coef * (frac > 0.0 ? frac : 0.0);
}

BarrierSample sample_barriers(const nn::Mlp& actor, double y, double sigma_min, RngStream& rng) {
    nn::Mlp::Workspace ws;
    std::vector<double> input(1);
    return draw_barriers(actor, ws, input, y, sigma_min, rng, nullptr).sample;
}

Episode run_episode(const nn::Mlp& actor, const ModelParams& p, const TrainConfig& cfg,
                    RngStream& rng, const KappaFn* frozen_kappa) {
    if (cfg.freeze_kappa && frozen_kappa == nullptr) {
        throw ConfigError("run_episode: freeze_kappa set but no kappa map supplied");
    }
    if (cfg.y0 < p.b) throw ConfigError("run_episode: initial intensity below the baseline b");
    const KappaFn* frozen = cfg.freeze_kappa ? frozen_kappa : nullptr;
    const int n = cfg.n_steps();
    Episode ep;
    State s{cfg.x0, cfg.y0};
    nn::Mlp::Workspace ws;
    std::vector<double> input(1);
    for (int i = 0;; ++i) {
        const double disc = std::exp(-p.rho * (i * cfg.h));
        const Draw d = draw_barriers(actor, ws, input, s.y, cfg.sigma_min, rng, frozen);
        StepRecord rec;
        rec.x_pre = s.x;
        rec.y = s.y;
        rec.a1_raw = d.sample.a1_raw;
        rec.a2_raw = d.sample.a2_raw;
        rec.logp = d.sample.logp;
        double net_action = 0.0;
        bool ruined = false;
        if (s.x < d.sample.kappa_star) {
            ruined = true;  // below the injection threshold: abandon, no reward
        } else if (s.x >= d.sample.x_star) {
            net_action = s.x - d.sample.x_star;
            rec.reward = disc * net_action;
        } else if (s.x < 0.0) {
            net_action = s.x;  // inject back to zero
            rec.reward = disc * p.delta * s.x;
        }
        ep.steps.push_back(rec);
        ep.total_reward += rec.reward;
        ep.entropy_sum += d.entropy;
        if (ruined) {
            ep.exit = ExitKind::Ruin;
            break;
        }
        if (i == n) {
            ep.exit = ExitKind::HorizonT;
            break;
        }
        s = step(p, s, cfg.h, net_action, rng).state;
    }
    return ep;
}

std::vector<double> reinforce_gradient(const nn::Mlp& actor, const std::vector<Episode>& batch,
                                       const TrainConfig& cfg, double entropy_coef,
                                       bool subtract_baseline) {
    if (batch.empty()) throw std::invalid_argument("reinforce_gradient: empty batch");
    const std::size_t n = actor.n_params();
    std::vector<double> grad(n, 0.0);
    double baseline = 0.0;
    if (subtract_baseline) {
        for (const Episode& ep : batch) baseline += ep.total_reward;
        baseline /= static_cast<double>(batch.size());
    }
    const std::size_t total_steps = batch_step_count(batch);
    const double ent_scale =
        entropy_coef > 0.0 ? entropy_coef / static_cast<double>(total_steps) : 0.0;
    const double inv_k = 1.0 / static_cast<double>(batch.size());
    nn::Mlp::Workspace ws;
    std::vector<double> input(1), up(4), lambda(n);
    for (const Episode& ep : batch) {
        std::fill(lambda.begin(), lambda.end(), 0.0);
        for (const StepRecord& rec : ep.steps) {
            input[0] = rec.y;
            actor.forward(input, ws);
            const double* raw = ws.pre.back().data();
            const std::array<double, 4> gs = score_upstream(raw, cfg, rec);
            up.assign(gs.begin(), gs.end());
            actor.backward(ws, up, 1.0, lambda);
            if (ent_scale > 0.0) {
                const std::array<double, 4> ge = entropy_upstream(raw, cfg);
                up.assign(ge.begin(), ge.end());
                actor.backward(ws, up, ent_scale, grad);
            }
        }
        const double w = (ep.total_reward - baseline) * inv_k;
        for (std::size_t i = 0; i < n; ++i) grad[i] += w * lambda[i];
    }
    return grad;
}

void reinforce_update(nn::Mlp& actor, const std::vector<Episode>& batch, const TrainConfig& cfg,
                      double entropy_coef, nn::Optimizer& opt) {
    const std::vector<double> grad = reinforce_gradient(actor, batch, cfg, entropy_coef);
    opt.step(actor.params(), grad);
}

AcGradients actor_critic_gradients(const nn::Mlp& actor, const nn::Mlp& critic,
                                   const std::vector<Episode>& batch, const TrainConfig& cfg,
                                   double entropy_coef) {
    if (batch.empty()) throw std::invalid_argument("actor_critic_gradients: empty batch");
    AcGradients g;
    g.actor.assign(actor.n_params(), 0.0);
    g.critic.assign(critic.n_params(), 0.0);
    const std::size_t total_steps = batch_step_count(batch);
    const double ent_scale =
        entropy_coef > 0.0 ? entropy_coef / static_cast<double>(total_steps) : 0.0;
    const double inv_k = 1.0 / static_cast<double>(batch.size());
    nn::Mlp::Workspace wsa, wsc;
    std::vector<double> input(1), up(4);
    const std::vector<double> up_scalar{1.0};
    std::vector<double> values, suffix;
    for (const Episode& ep : batch) {
        const std::size_t m = ep.steps.size();
        values.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            input[0] = ep.steps[i].y;
            critic.forward(input, wsc);
            values[i] = wsc.pre.back()[0];
        }
        if (cfg.critic_full_returns) {
            suffix.resize(m);
            double acc = 0.0;
            for (std::size_t i = m; i-- > 0;) {
                acc += ep.steps[i].reward;
                suffix[i] = acc;
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            const StepRecord& rec = ep.steps[i];
            const double v_next = (i + 1 < m) ? values[i + 1] : 0.0;  // no terminal reward
            const double delta = rec.reward + v_next - values[i];
            input[0] = rec.y;
            actor.forward(input, wsa);
            const double* raw = wsa.pre.back().data();
            const std::array<double, 4> gs = score_upstream(raw, cfg, rec);
            up.assign(gs.begin(), gs.end());
            actor.backward(wsa, up, delta * inv_k, g.actor);
            if (ent_scale > 0.0) {
                const std::array<double, 4> ge = entropy_upstream(raw, cfg);
                up.assign(ge.begin(), ge.end());
                actor.backward(wsa, up, ent_scale, g.actor);
            }
            const double target = cfg.critic_full_returns ? suffix[i] : rec.reward + v_next;
            critic.forward(input, wsc);
            critic.backward(wsc, up_scalar, (target - values[i]) * inv_k, g.critic);
        }
    }
    return g;
}

void actor_critic_update(nn::Mlp& actor, nn::Mlp& critic, const std::vector<Episode>& batch,
                         const TrainConfig& cfg, double entropy_coef, nn::Optimizer& actor_opt,
                         nn::Optimizer& critic_opt) {
    const AcGradients g = actor_critic_gradients(actor, critic, batch, cfg, entropy_coef);
    actor_opt.step(actor.params(), g.actor);
    critic_opt.step(critic.params(), g.critic);
}

TrainResult train(const ModelParams& p, const TrainConfig& cfg, Algo algo,
                  const std::function<void(const EpochMetrics&)>& on_epoch,
                  const KappaFn* frozen_kappa) {
    p.validate();
    cfg.validate();
    if (cfg.freeze_kappa && frozen_kappa == nullptr) {
        throw ConfigError("train: freeze_kappa set but no kappa map supplied");
    }
    std::vector<int> actor_arch{1};
    actor_arch.insert(actor_arch.end(), cfg.hidden.begin(), cfg.hidden.end());
    actor_arch.push_back(4);
    std::vector<int> critic_arch{1};
    critic_arch.insert(critic_arch.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_arch.push_back(1);

    TrainResult res;
    res.actor = nn::Mlp(actor_arch, cfg.seed + 1);
    {
        // Start both policy scales at exactly sigma_init: zero the raw sigma
        // rows of the head and bias them to softplus^{-1}(sigma_init -
        // sigma_min).  The means keep their generic initialization.
        const std::size_t in = static_cast<std::size_t>(cfg.hidden.back());
        const std::size_t head = res.actor.n_params() - (4 * in + 4);
        const double bias = std::log(std::expm1(cfg.sigma_init - cfg.sigma_min));
        for (const std::size_t o : {std::size_t{1}, std::size_t{3}}) {
            for (std::size_t i = 0; i < in; ++i) res.actor.params()[head + o * in + i] = 0.0;
            res.actor.params()[head + 4 * in + o] = bias;
        }
    }
    nn::OptimizerConfig actor_oc;
    actor_oc.kind = cfg.optimizer;
    actor_oc.lr = cfg.lr_actor;
    nn::Optimizer actor_opt(actor_oc, res.actor.n_params());
    std::optional<nn::Optimizer> critic_opt;
    if (algo == Algo::ActorCritic) {
        res.critic = nn::Mlp(critic_arch, cfg.seed + 2);
        nn::OptimizerConfig critic_oc;
        critic_oc.kind = cfg.optimizer;
        critic_oc.lr = cfg.lr_critic;
        critic_opt.emplace(critic_oc, res.critic->n_params());
    }

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed_s = [&t_start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };
    const std::uint64_t k = static_cast<std::uint64_t>(cfg.batch_size);
    std::vector<Episode> batch;
    res.metrics.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int e = 0; e < cfg.epochs; ++e) {
        batch.clear();
        batch.reserve(k);
        for (std::uint64_t i = 0; i < k; ++i) {
            // Stream ids 0..2 are reserved for network initialization.
            RngStream rng(cfg.seed, 3 + static_cast<std::uint64_t>(e) * k + i);
            batch.push_back(run_episode(res.actor, p, cfg, rng, frozen_kappa));
        }
        EpochMetrics m;
        m.epoch = e;
        double sum = 0.0, ent = 0.0;
        std::size_t steps = 0, ruins = 0;
        for (const Episode& ep : batch) {
            sum += ep.total_reward;
            ent += ep.entropy_sum;
            steps += ep.steps.size();
            if (ep.exit == ExitKind::Ruin) ++ruins;
        }
        m.mean_G = sum / static_cast<double>(batch.size());
        double ss = 0.0;
        for (const Episode& ep : batch) {
            const double d = ep.total_reward - m.mean_G;
            ss += d * d;
        }
        m.std_G = batch.size() > 1 ? std::sqrt(ss / static_cast<double>(batch.size() - 1)) : 0.0;
        m.mean_entropy = ent / static_cast<double>(steps);
        m.ruin_frac = static_cast<double>(ruins) / static_cast<double>(batch.size());
        try {
            const double coef = cfg.entropy_coef_at(e);
            if (algo == Algo::Reinforce) {
                reinforce_update(res.actor, batch, cfg, coef, actor_opt);
            } else {
                actor_critic_update(res.actor, *res.critic, batch, cfg, coef, actor_opt,
                                    *critic_opt);
            }
        } catch (const NumericalError& ex) {
            res.diverged = true;
            res.error = ex.what();
            m.wall_time_s = elapsed_s();
            res.metrics.push_back(m);
            if (on_epoch) on_epoch(m);
            break;
        }
        m.wall_time_s = elapsed_s();
        res.metrics.push_back(m);
        if (on_epoch) on_epoch(m);
    }
    return res;
}

}  // namespace hawkesdiv::rl
