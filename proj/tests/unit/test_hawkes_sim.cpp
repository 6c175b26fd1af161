#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hawkesdiv/errors.hpp"
#include "hawkesdiv/hawkes_sim.hpp"
#include "hawkesdiv/model.hpp"
#include "hawkesdiv/rng.hpp"

using namespace hawkesdiv;

namespace {

// One-sample Kolmogorov-Smirnov statistic of draws against a CDF.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double f = cdf(xs[k]);
        d = std::max(d, std::abs(f - static_cast<double>(k) / n));
        d = std::max(d, std::abs(static_cast<double>(k + 1) / n - f));
    }
    return d;
}

}  // namespace

TEST_SUITE("hawkes_sim") {

TEST_CASE("first claim time follows the closed-form survival law") {
    ModelParams p;
    for (double y : {2.0, 3.5, 6.0}) {
        RngStream rng(100, static_cast<std::uint64_t>(y * 10));
        std::vector<double> taus(4000);
        for (auto& t : taus) t = next_claim_time(p, y, rng);
        const double d = ks_statistic(
            std::move(taus), [&](double t) { return 1.0 - survival_probability(p, y, t); });
        // 0.1% critical value 1.949/sqrt(n): loose enough to never flake on a
        // fixed seed, tight enough to catch a wrong intensity envelope.
        CHECK(d < 1.949 / std::sqrt(4000.0));
    }
}

TEST_CASE("step advances surplus by premium minus claims") {
    ModelParams p;
    RngStream rng(55);
    const double h = 0.25;
    for (int rep = 0; rep < 200; ++rep) {
        const State s{1.0 + 0.01 * rep, 2.0 + 0.02 * rep};
        const double action = (rep % 3 == 0) ? 0.3 : 0.0;
        const StepResult r = step(p, s, h, action, rng);
        CHECK(r.state.x ==
              doctest::Approx(s.x - action + p.c * h - r.claims_total).epsilon(1e-12));
        CHECK(r.state.y >= p.b);
        CHECK(r.claims_total >= 0.0);
        if (r.n_claims == 0) {
            CHECK(r.claims_total == 0.0);
            // Intensity decays deterministically when nothing arrives.
            CHECK(r.state.y == doctest::Approx(pre_claim_intensity(p, s.y, h)));
        } else {
            // Each claim bumps the intensity by eta; decay pulls toward b.
            CHECK(r.state.y < s.y + r.n_claims * p.eta + 1e-12);
        }
    }
}

TEST_CASE("step claim count matches the survival law at small h") {
    ModelParams p;
    RngStream rng(77);
    const double y = 3.0, h = 0.05;
    int none = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        if (step(p, State{0.0, y}, h, 0.0, rng).n_claims == 0) ++none;
    }
    const double expect = survival_probability(p, y, h);
    const double se = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::abs(static_cast<double>(none) / n - expect) < 4 * se);
}

TEST_CASE("barrier trajectory respects the decision rules") {
    ModelParams p;
    const BarrierFn policy = [](double) { return BarrierDecision{1.0, -0.4}; };
    const double h = 0.1, T = 20.0;
    int ruined = 0, survived = 0;
    for (int k = 0; k < 50; ++k) {
        RngStream rng(900, k);
        const Trajectory tr = simulate_barrier_trajectory(p, State{0.5, 2.5}, h, T, policy, rng);
        (tr.exit_kind == ExitKind::Ruin ? ruined : survived)++;

        REQUIRE(!tr.times.empty());
        REQUIRE(tr.times.size() == tr.surplus.size());
        REQUIRE(tr.times.size() == tr.actions.size());
        REQUIRE(tr.times.size() == tr.discounted_rewards.size());
        CHECK(tr.exit_index == tr.times.size() - 1);

        double total = 0.0;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            CHECK(tr.times[i] == doctest::Approx(static_cast<double>(i) * h));
            CHECK(tr.intensity[i] >= p.b - 1e-12);
            total += tr.discounted_rewards[i];
            const double disc = std::exp(-p.rho * tr.times[i]);
            if (tr.actions[i] > 0.0) {
                // Dividend: paid down to the barrier, discounted 1:1.
                CHECK(tr.surplus[i] == doctest::Approx(1.0));
                CHECK(tr.discounted_rewards[i] ==
                      doctest::Approx(disc * tr.actions[i]).epsilon(1e-12));
            } else if (tr.actions[i] < 0.0) {
                // Injection: topped up to zero, charged delta per unit.
                CHECK(tr.surplus[i] == doctest::Approx(0.0));
                CHECK(tr.discounted_rewards[i] ==
                      doctest::Approx(disc * p.delta * tr.actions[i]).epsilon(1e-12));
            }
            if (i < tr.exit_index) {
                CHECK(tr.surplus[i] >= -1e-12);  // negative only at a ruin exit
                CHECK(tr.surplus[i] <= 1.0 + 1e-12);
            }
        }
        CHECK(tr.total_reward() == doctest::Approx(total));
        if (tr.exit_kind == ExitKind::Ruin) {
            CHECK(tr.surplus.back() < -0.4);
            CHECK(tr.actions.back() == 0.0);
            CHECK(tr.discounted_rewards.back() == 0.0);
        } else {
            CHECK(tr.times.back() == doctest::Approx(T));
        }
    }
    // The mixed barrier keeps both exits in play at this horizon.
    CHECK(ruined > 0);
    CHECK(survived > 0);
}

TEST_CASE("trajectories replay bit-identically per (seed, stream)") {
    ModelParams p;
    const BarrierFn policy = [](double y) { return BarrierDecision{0.8 + 0.01 * y, -0.5}; };
    RngStream r1(4242, 3), r2(4242, 3);
    const Trajectory a = simulate_barrier_trajectory(p, State{1.0, 2.8}, 0.02, 10.0, policy, r1);
    const Trajectory b = simulate_barrier_trajectory(p, State{1.0, 2.8}, 0.02, 10.0, policy, r2);
    REQUIRE(a.times.size() == b.times.size());
    CHECK(a.exit_kind == b.exit_kind);
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        CHECK(a.surplus[i] == b.surplus[i]);
        CHECK(a.intensity[i] == b.intensity[i]);
        CHECK(a.discounted_rewards[i] == b.discounted_rewards[i]);
    }
}

TEST_CASE("invalid barrier outputs and step sizes are rejected") {
    ModelParams p;
    RngStream rng(1);
    const BarrierFn bad_x = [](double) { return BarrierDecision{-0.2, -0.5}; };
    CHECK_THROWS_AS(
        (void)simulate_barrier_trajectory(p, State{0.5, 2.5}, 0.1, 1.0, bad_x, rng),
        NumericalError);
    const BarrierFn bad_k = [](double) { return BarrierDecision{1.0, 0.3}; };
    CHECK_THROWS_AS(
        (void)simulate_barrier_trajectory(p, State{0.5, 2.5}, 0.1, 1.0, bad_k, rng),
        NumericalError);
    const BarrierFn ok = [](double) { return BarrierDecision{1.0, -0.5}; };
    CHECK_THROWS_AS((void)simulate_barrier_trajectory(p, State{0.5, 2.5}, 0.0, 1.0, ok, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)simulate_barrier_trajectory(p, State{0.5, 2.5}, 0.3, 1.0, ok, rng),
                    std::invalid_argument);  // horizon not a multiple of h
}

}  // TEST_SUITE
