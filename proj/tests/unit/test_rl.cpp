#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hawkesdiv/errors.hpp"
#include "hawkesdiv/hawkes_sim.hpp"
#include "hawkesdiv/model.hpp"
#include "hawkesdiv/neural.hpp"
#include "hawkesdiv/rl.hpp"
#include "hawkesdiv/rng.hpp"
#include "support/toy_game.hpp"

using namespace hawkesdiv;
using toy::toy_batch;
using toy::toy_episode;
using toy::toy_exact_gradient;
using toy::toy_exact_return;

TEST_SUITE_BEGIN("rl");

TEST_CASE("TrainConfig: n_steps and the entropy schedule") {
    rl::TrainConfig cfg;
    CHECK(cfg.n_steps() == 2500);  // default h = 1/50, horizon 50
    cfg.h = 0.25;
    cfg.horizon_T = 1.0;
    CHECK(cfg.n_steps() == 4);

    cfg.entropy_coef = 0.01;
    cfg.epochs = 10;
    cfg.anneal_entropy = true;
    CHECK(cfg.entropy_coef_at(0) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(cfg.entropy_coef_at(5) == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(cfg.entropy_coef_at(9) == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(cfg.entropy_coef_at(10) == 0.0);
    CHECK(cfg.entropy_coef_at(15) == 0.0);

    cfg.anneal_entropy = false;
    CHECK(cfg.entropy_coef_at(7) == 0.01);

    cfg.anneal_entropy = true;
    cfg.epochs = 0;
    CHECK(cfg.entropy_coef_at(0) == 0.01);
}

TEST_CASE("TrainConfig: validation rejects broken settings") {
    const rl::TrainConfig base;
    CHECK_NOTHROW(base.validate());

    auto expect_reject = [&](auto&& mutate) {
        rl::TrainConfig cfg = base;
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    expect_reject([](rl::TrainConfig& c) { c.h = 0.0; });
    expect_reject([](rl::TrainConfig& c) { c.h = -0.1; });
    expect_reject([](rl::TrainConfig& c) { c.horizon_T = 0.0; });
    expect_reject([](rl::TrainConfig& c) {
        c.h = 0.3;
        c.horizon_T = 1.0;  // 1.0 / 0.3 is not an integer
    });
    expect_reject([](rl::TrainConfig& c) { c.batch_size = 0; });
    expect_reject([](rl::TrainConfig& c) { c.epochs = -1; });
    expect_reject([](rl::TrainConfig& c) { c.lr_actor = 0.0; });
    expect_reject([](rl::TrainConfig& c) { c.lr_critic = -1.0; });
    expect_reject([](rl::TrainConfig& c) { c.entropy_coef = -1e-3; });
    expect_reject([](rl::TrainConfig& c) { c.sigma_min = 0.0; });
    expect_reject([](rl::TrainConfig& c) { c.hidden.clear(); });
    expect_reject([](rl::TrainConfig& c) { c.hidden = {8, 0}; });
}

TEST_CASE("run_episode: first-step decision rules and bookkeeping") {
    const ModelParams p;
    const nn::Mlp actor({1, 4, 4}, 21);
    rl::TrainConfig cfg;
    cfg.h = 0.1;
    cfg.horizon_T = 1.0;
    cfg.y0 = 2.8;

    // The first draw of an episode consumes the same stream values as a
    // standalone sample at y0, so a cloned stream reveals the barriers the
    // episode saw before it acted.
    const auto first_sample = [&](std::uint64_t stream) {
        RngStream r(123, stream);
        return rl::sample_barriers(actor, cfg.y0, cfg.sigma_min, r);
    };

    SUBCASE("surplus far above the dividend barrier pays out immediately") {
        const rl::BarrierSample s = first_sample(7);
        cfg.x0 = 50.0;
        RngStream r(123, 7);
        const rl::Episode ep = rl::run_episode(actor, p, cfg, r);
        REQUIRE(!ep.steps.empty());
        CHECK(ep.steps[0].x_pre == 50.0);
        CHECK(ep.steps[0].y == 2.8);
        CHECK(ep.steps[0].a1_raw == s.a1_raw);
        CHECK(ep.steps[0].a2_raw == s.a2_raw);
        CHECK(ep.steps[0].logp == s.logp);
        // t = 0, so the discount factor is exactly 1.
        CHECK(ep.steps[0].reward == 50.0 - s.x_star);
    }

    SUBCASE("surplus inside [0, x*) neither pays nor injects") {
        const rl::BarrierSample s = first_sample(8);
        REQUIRE(s.x_star > 0.0);
        cfg.x0 = 0.5 * s.x_star;
        RngStream r(123, 8);
        const rl::Episode ep = rl::run_episode(actor, p, cfg, r);
        CHECK(ep.steps[0].reward == 0.0);
    }

    SUBCASE("slightly negative surplus injects or abandons, by the threshold") {
        const rl::BarrierSample s = first_sample(9);
        cfg.x0 = -0.05;
        RngStream r(123, 9);
        const rl::Episode ep = rl::run_episode(actor, p, cfg, r);
        if (cfg.x0 < s.kappa_star) {
            CHECK(ep.exit == ExitKind::Ruin);
            CHECK(ep.steps.size() == 1);
            CHECK(ep.total_reward == 0.0);
        } else {
            CHECK(ep.steps[0].reward == p.delta * cfg.x0);
        }
    }

    SUBCASE("hopelessly negative surplus is abandoned with zero reward") {
        const rl::BarrierSample s = first_sample(10);
        REQUIRE(s.kappa_star > -50.0);
        cfg.x0 = -50.0;
        RngStream r(123, 10);
        const rl::Episode ep = rl::run_episode(actor, p, cfg, r);
        CHECK(ep.exit == ExitKind::Ruin);
        CHECK(ep.steps.size() == 1);
        CHECK(ep.steps[0].reward == 0.0);
        CHECK(ep.total_reward == 0.0);
    }
}

TEST_CASE("run_episode: length, totals, and determinism") {
    const ModelParams p;
    const nn::Mlp actor({1, 6, 4}, 33);
    rl::TrainConfig cfg;
    cfg.h = 0.1;
    cfg.horizon_T = 2.0;  // 20 evolution steps, 21 decisions
    cfg.x0 = 1.0;
    cfg.y0 = 2.8;

    for (std::uint64_t stream = 0; stream < 40; ++stream) {
        RngStream r(77, stream);
        const rl::Episode ep = rl::run_episode(actor, p, cfg, r);
        REQUIRE(!ep.steps.empty());
        CHECK(ep.steps.size() <= static_cast<std::size_t>(cfg.n_steps()) + 1);
        if (ep.exit == ExitKind::HorizonT) {
            CHECK(ep.steps.size() == static_cast<std::size_t>(cfg.n_steps()) + 1);
        } else {
            CHECK(ep.exit == ExitKind::Ruin);
            CHECK(ep.steps.back().reward == 0.0);
        }
        double total = 0.0;
        for (const rl::StepRecord& rec : ep.steps) total += rec.reward;
        CHECK(ep.total_reward == total);
        CHECK(std::isfinite(ep.entropy_sum));
    }

    RngStream ra(555, 4), rb(555, 4);
    const rl::Episode a = rl::run_episode(actor, p, cfg, ra);
    const rl::Episode b = rl::run_episode(actor, p, cfg, rb);
    REQUIRE(a.steps.size() == b.steps.size());
    CHECK(a.exit == b.exit);
    CHECK(a.total_reward == b.total_reward);
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        CHECK(a.steps[i].x_pre == b.steps[i].x_pre);
        CHECK(a.steps[i].y == b.steps[i].y);
        CHECK(a.steps[i].a1_raw == b.steps[i].a1_raw);
        CHECK(a.steps[i].a2_raw == b.steps[i].a2_raw);
        CHECK(a.steps[i].logp == b.steps[i].logp);
        CHECK(a.steps[i].reward == b.steps[i].reward);
    }

    cfg.y0 = 1.5;  // below the baseline intensity b = 2
    RngStream rc(1, 1);
    CHECK_THROWS_AS((void)rl::run_episode(actor, p, cfg, rc), ConfigError);
}

TEST_CASE("run_episode: frozen injection threshold") {
    const ModelParams p;
    const nn::Mlp actor({1, 4, 4}, 5);
    rl::TrainConfig cfg;
    cfg.h = 0.1;
    cfg.horizon_T = 1.0;
    cfg.x0 = -0.3;
    cfg.y0 = 2.8;
    cfg.freeze_kappa = true;

    RngStream r0(9, 0);
    CHECK_THROWS_AS((void)rl::run_episode(actor, p, cfg, r0), ConfigError);  // no map

    SUBCASE("a deep threshold turns negative surplus into an injection") {
        const rl::KappaFn deep = [](double) { return -0.5; };
        RngStream r(9, 1);
        const rl::Episode ep = rl::run_episode(actor, p, cfg, r, &deep);
        REQUIRE(!ep.steps.empty());
        CHECK(ep.steps[0].reward == p.delta * cfg.x0);
        for (const rl::StepRecord& rec : ep.steps) CHECK(rec.a2_raw == 0.0);

        // The log-density covers only the sampled dividend component.
        const std::vector<double> raw = actor.forward({cfg.y0});
        const nn::GaussianPolicyHead head = nn::head_from_raw(raw.data(), cfg.sigma_min);
        const double z = (ep.steps[0].a1_raw - head.mu1) / head.sigma1;
        const double expected =
            -0.5 * z * z - std::log(head.sigma1) - 0.5 * std::log(2.0 * M_PI);
        CHECK(ep.steps[0].logp == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("a shallow threshold abandons the same surplus immediately") {
        const rl::KappaFn shallow = [](double) { return -0.01; };
        RngStream r(9, 2);
        const rl::Episode ep = rl::run_episode(actor, p, cfg, r, &shallow);
        CHECK(ep.exit == ExitKind::Ruin);
        CHECK(ep.steps.size() == 1);
        CHECK(ep.total_reward == 0.0);
    }

    SUBCASE("a positive threshold map is rejected") {
        const rl::KappaFn bad = [](double) { return 0.1; };
        RngStream r(9, 3);
        CHECK_THROWS_AS((void)rl::run_episode(actor, p, cfg, r, &bad), NumericalError);
    }
}

TEST_CASE("reinforce_gradient: unbiased on the quadratic toy game") {
    const nn::Mlp actor({1, 3, 4}, 17);
    rl::TrainConfig cfg;
    cfg.sigma_min = 0.05;
    const std::size_t n = actor.n_params();
    REQUIRE(n == 22);
    const std::vector<double> exact = toy_exact_gradient(actor, cfg.sigma_min);

    const int n_batches = 4000;
    const int k = 8;
    std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
    std::vector<double> score_sum(n, 0.0), score_sumsq(n, 0.0);
    RngStream rng(20240915u, 0);
    for (int b = 0; b < n_batches; ++b) {
        std::vector<rl::Episode> batch = toy_batch(actor, cfg.sigma_min, k, rng);
        const std::vector<double> g =
            rl::reinforce_gradient(actor, batch, cfg, 0.0, /*subtract_baseline=*/false);
        // The same batch with every return forced to a constant isolates the
        // score function, whose expectation is the zero vector.
        for (rl::Episode& ep : batch) ep.total_reward = 1.0;
        const std::vector<double> s =
            rl::reinforce_gradient(actor, batch, cfg, 0.0, /*subtract_baseline=*/false);
        for (std::size_t j = 0; j < n; ++j) {
            sum[j] += g[j];
            sumsq[j] += g[j] * g[j];
            score_sum[j] += s[j];
            score_sumsq[j] += s[j] * s[j];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        CAPTURE(j);
        const double mean = sum[j] / n_batches;
        const double var = (sumsq[j] - n_batches * mean * mean) / (n_batches - 1);
        const double se = std::sqrt(std::max(var, 0.0) / n_batches);
        CHECK(std::fabs(mean - exact[j]) <= 3.5 * se + 1e-12);

        const double smean = score_sum[j] / n_batches;
        const double svar = (score_sumsq[j] - n_batches * smean * smean) / (n_batches - 1);
        const double sse = std::sqrt(std::max(svar, 0.0) / n_batches);
        CHECK(std::fabs(smean) <= 3.5 * sse + 1e-12);
    }
}

TEST_CASE("reinforce_gradient: baseline invariance and exact zero on equal returns") {
    const nn::Mlp actor({1, 3, 4}, 11);
    rl::TrainConfig cfg;
    cfg.sigma_min = 0.05;
    RngStream rng(7, 1);
    const std::vector<rl::Episode> batch = toy_batch(actor, cfg.sigma_min, 8, rng);

    const std::vector<double> g = rl::reinforce_gradient(actor, batch, cfg, 0.0, true);
    std::vector<rl::Episode> shifted = batch;
    for (rl::Episode& ep : shifted) ep.total_reward += 1000.0;
    const std::vector<double> g2 = rl::reinforce_gradient(actor, shifted, cfg, 0.0, true);
    for (std::size_t j = 0; j < g.size(); ++j) {
        CAPTURE(j);
        CHECK(std::fabs(g2[j] - g[j]) <= 1e-9 * std::max(1.0, std::fabs(g[j])));
    }

    std::vector<rl::Episode> equal = batch;
    for (rl::Episode& ep : equal) ep.total_reward = 5.0;
    const std::vector<double> g0 = rl::reinforce_gradient(actor, equal, cfg, 0.0, true);
    for (double v : g0) CHECK(v == 0.0);

    CHECK_THROWS_AS((void)rl::reinforce_gradient(actor, {}, cfg, 0.0), std::invalid_argument);
}

TEST_CASE("reinforce_gradient: entropy bonus adds coef * grad(mean entropy)") {
    const nn::Mlp actor({1, 3, 4}, 5);
    rl::TrainConfig cfg;
    cfg.sigma_min = 0.05;
    RngStream rng(31, 2);
    const std::vector<rl::Episode> batch = toy_batch(actor, cfg.sigma_min, 4, rng);

    const double coef = 0.4;
    const std::vector<double> g0 = rl::reinforce_gradient(actor, batch, cfg, 0.0, true);
    const std::vector<double> g1 = rl::reinforce_gradient(actor, batch, cfg, coef, true);

    std::size_t total_steps = 0;
    for (const rl::Episode& ep : batch) total_steps += ep.steps.size();
    const double scale = coef / static_cast<double>(total_steps);
    std::vector<double> ent(actor.n_params(), 0.0);
    nn::Mlp::Workspace ws;
    for (const rl::Episode& ep : batch) {
        for (const rl::StepRecord& rec : ep.steps) {
            actor.forward({rec.y}, ws);
            const std::array<double, 4> ge =
                nn::entropy_grad_raw(ws.pre.back().data(), cfg.sigma_min);
            const std::vector<double> up(ge.begin(), ge.end());
            actor.backward(ws, up, scale, ent);
        }
    }
    for (std::size_t j = 0; j < g0.size(); ++j) {
        CAPTURE(j);
        CHECK(std::fabs(g1[j] - (g0[j] + ent[j])) <= 1e-12 * std::max(1.0, std::fabs(g1[j])));
    }
}

TEST_CASE("actor_critic_gradients: match a hand-built mirror with an affine critic") {
    const nn::Mlp actor({1, 3, 4}, 3);
    nn::Mlp critic({1, 1}, 9);
    critic.params() = {0.5, -0.2};  // vhat(y) = 0.5 y - 0.2
    rl::TrainConfig cfg;
    cfg.sigma_min = 0.05;
    RngStream rng(99, 2);
    const std::vector<rl::Episode> batch = toy_batch(actor, cfg.sigma_min, 5, rng);
    const double coef = 0.3;

    std::size_t total_steps = 0;
    for (const rl::Episode& ep : batch) total_steps += ep.steps.size();
    const double ent_scale = coef / static_cast<double>(total_steps);
    const double inv_k = 1.0 / static_cast<double>(batch.size());
    const auto vhat = [&critic](double y) { return critic.params()[0] * y + critic.params()[1]; };

    for (const bool full_returns : {false, true}) {
        CAPTURE(full_returns);
        cfg.critic_full_returns = full_returns;
        const rl::AcGradients g = rl::actor_critic_gradients(actor, critic, batch, cfg, coef);

        std::vector<double> ga(actor.n_params(), 0.0);
        double gc_w = 0.0, gc_b = 0.0;
        nn::Mlp::Workspace ws;
        for (const rl::Episode& ep : batch) {
            const std::size_t m = ep.steps.size();
            std::vector<double> suffix(m, 0.0);
            double acc = 0.0;
            for (std::size_t i = m; i-- > 0;) {
                acc += ep.steps[i].reward;
                suffix[i] = acc;
            }
            for (std::size_t i = 0; i < m; ++i) {
                const rl::StepRecord& rec = ep.steps[i];
                const double v = vhat(rec.y);
                const double v_next = (i + 1 < m) ? vhat(ep.steps[i + 1].y) : 0.0;
                const double delta = rec.reward + v_next - v;
                actor.forward({rec.y}, ws);
                const std::array<double, 4> gs =
                    nn::logp_grad_raw(ws.pre.back().data(), cfg.sigma_min, rec.a1_raw,
                                      rec.a2_raw);
                std::vector<double> up(gs.begin(), gs.end());
                actor.backward(ws, up, delta * inv_k, ga);
                const std::array<double, 4> ge =
                    nn::entropy_grad_raw(ws.pre.back().data(), cfg.sigma_min);
                up.assign(ge.begin(), ge.end());
                actor.backward(ws, up, ent_scale, ga);

                const double target = full_returns ? suffix[i] : rec.reward + v_next;
                gc_w += (target - v) * inv_k * rec.y;
                gc_b += (target - v) * inv_k;
            }
        }
        REQUIRE(g.actor.size() == ga.size());
        for (std::size_t j = 0; j < ga.size(); ++j) {
            CAPTURE(j);
            CHECK(std::fabs(g.actor[j] - ga[j]) <= 1e-12 * std::max(1.0, std::fabs(ga[j])));
        }
        REQUIRE(g.critic.size() == 2);
        CHECK(g.critic[0] == doctest::Approx(gc_w).epsilon(1e-12));
        CHECK(g.critic[1] == doctest::Approx(gc_b).epsilon(1e-12));
    }

    CHECK_THROWS_AS((void)rl::actor_critic_gradients(actor, critic, {}, cfg, 0.0),
                    std::invalid_argument);
}

TEST_CASE("actor_critic_gradients: zero critic reduces to per-step reward weighting") {
    const nn::Mlp actor({1, 3, 4}, 13);
    nn::Mlp critic({1, 1}, 1);
    critic.params() = {0.0, 0.0};
    rl::TrainConfig cfg;
    cfg.sigma_min = 0.05;
    RngStream rng(12, 6);
    const std::vector<rl::Episode> batch = toy_batch(actor, cfg.sigma_min, 6, rng);

    const rl::AcGradients g = rl::actor_critic_gradients(actor, critic, batch, cfg, 0.0);

    // With vhat = 0 the temporal difference collapses to the raw step reward.
    const double inv_k = 1.0 / static_cast<double>(batch.size());
    std::vector<double> ga(actor.n_params(), 0.0);
    double gc_w = 0.0, gc_b = 0.0;
    nn::Mlp::Workspace ws;
    for (const rl::Episode& ep : batch) {
        for (const rl::StepRecord& rec : ep.steps) {
            actor.forward({rec.y}, ws);
            const std::array<double, 4> gs = nn::logp_grad_raw(ws.pre.back().data(),
                                                               cfg.sigma_min, rec.a1_raw,
                                                               rec.a2_raw);
            const std::vector<double> up(gs.begin(), gs.end());
            actor.backward(ws, up, rec.reward * inv_k, ga);
            gc_w += rec.reward * inv_k * rec.y;
            gc_b += rec.reward * inv_k;
        }
    }
    for (std::size_t j = 0; j < ga.size(); ++j) {
        CAPTURE(j);
        CHECK(std::fabs(g.actor[j] - ga[j]) <= 1e-12 * std::max(1.0, std::fabs(ga[j])));
    }
    CHECK(g.critic[0] == doctest::Approx(gc_w).epsilon(1e-12));
    CHECK(g.critic[1] == doctest::Approx(gc_b).epsilon(1e-12));
}

TEST_CASE("reinforce_update: ascends the toy objective") {
    nn::Mlp actor({1, 3, 4}, 17);
    rl::TrainConfig cfg;
    cfg.sigma_min = 0.05;
    nn::OptimizerConfig oc;
    oc.lr = 0.05;
    nn::Optimizer opt(oc, actor.n_params());

    const double j0 = toy_exact_return(actor, cfg.sigma_min);
    RngStream rng(314, 5);
    for (int e = 0; e < 60; ++e) {
        const std::vector<rl::Episode> batch = toy_batch(actor, cfg.sigma_min, 64, rng);
        rl::reinforce_update(actor, batch, cfg, 0.0, opt);
    }
    const double j1 = toy_exact_return(actor, cfg.sigma_min);
    CAPTURE(j0);
    CAPTURE(j1);
    CHECK(j1 > j0 + 0.5);
}

TEST_CASE("train: deterministic in the seed, with per-epoch statistics") {
    const ModelParams p;
    rl::TrainConfig cfg;
    cfg.h = 0.25;
    cfg.horizon_T = 1.0;
    cfg.batch_size = 8;
    cfg.epochs = 3;
    cfg.hidden = {4};
    cfg.seed = 42;
    cfg.x0 = 1.0;
    cfg.y0 = 2.8;

    int calls = 0;
    const rl::TrainResult r1 =
        rl::train(p, cfg, rl::Algo::Reinforce, [&calls](const rl::EpochMetrics&) { ++calls; });
    const rl::TrainResult r2 = rl::train(p, cfg, rl::Algo::Reinforce);

    CHECK(calls == 3);
    CHECK_FALSE(r1.diverged);
    CHECK_FALSE(r1.critic.has_value());
    CHECK(r1.actor.layer_sizes() == std::vector<int>{1, 4, 4});
    REQUIRE(r1.metrics.size() == 3);
    REQUIRE(r2.metrics.size() == 3);
    for (std::size_t e = 0; e < 3; ++e) {
        CAPTURE(e);
        CHECK(r1.metrics[e].epoch == static_cast<int>(e));
        CHECK(r1.metrics[e].mean_G == r2.metrics[e].mean_G);
        CHECK(r1.metrics[e].std_G == r2.metrics[e].std_G);
        CHECK(r1.metrics[e].mean_entropy == r2.metrics[e].mean_entropy);
        CHECK(r1.metrics[e].ruin_frac == r2.metrics[e].ruin_frac);
        CHECK(r1.metrics[e].std_G >= 0.0);
        CHECK(r1.metrics[e].ruin_frac >= 0.0);
        CHECK(r1.metrics[e].ruin_frac <= 1.0);
        CHECK(std::isfinite(r1.metrics[e].mean_entropy));
        CHECK(r1.metrics[e].wall_time_s >= 0.0);
    }
    CHECK(r1.actor.params() == r2.actor.params());

    // The first epoch's statistics describe the untrained policy, so they are
    // identical across algorithms; only the updates differ.
    const rl::TrainResult rac = rl::train(p, cfg, rl::Algo::ActorCritic);
    REQUIRE(rac.critic.has_value());
    CHECK(rac.critic->layer_sizes() == std::vector<int>{1, 4, 1});
    REQUIRE(rac.metrics.size() == 3);
    CHECK(rac.metrics[0].mean_G == r1.metrics[0].mean_G);
    CHECK(rac.metrics[0].std_G == r1.metrics[0].std_G);

    cfg.freeze_kappa = true;
    CHECK_THROWS_AS((void)rl::train(p, cfg, rl::Algo::Reinforce), ConfigError);
    const rl::KappaFn frozen = [](double) { return -0.4; };
    const rl::TrainResult rf = rl::train(p, cfg, rl::Algo::Reinforce, {}, &frozen);
    CHECK(rf.metrics.size() == 3);
    CHECK_FALSE(rf.diverged);
}

TEST_SUITE_END();
