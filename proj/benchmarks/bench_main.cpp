// Microbenchmarks for the solver and simulator hot paths.  Grids here are
// deliberately small so a full run stays under a minute; the relative cost
// of the pieces, not the absolute numbers, is what these track.

#include <benchmark/benchmark.h>

#include "hawkesdiv/grid.hpp"
#include "hawkesdiv/hawkes_sim.hpp"
#include "hawkesdiv/hjb.hpp"
#include "hawkesdiv/model.hpp"
#include "hawkesdiv/neural.hpp"
#include "hawkesdiv/rng.hpp"

namespace {

using namespace hawkesdiv;

const ModelParams& params() {
    static const ModelParams p;
    return p;
}

const Grid& small_grid() {
    static const Grid g = [] {
        GridSpec spec;
        spec.x_min = -2.0;
        spec.x_max = 2.0;
        spec.y_max = 6.0;
        spec.n_eta = 4;
        spec.M = 40;
        spec.z_max = 4.0;
        return build_grid(spec, params());
    }();
    return g;
}

const hjb::HowardResult& small_solution() {
    static const hjb::HowardResult r = hjb::howard_solve(small_grid(), params());
    return r;
}

void BM_JumpQuadratureRow(benchmark::State& state) {
    const Grid& g = small_grid();
    const hjb::ValueGrid& v = small_solution().value;
    const int j = g.ny / 2;
    for (auto _ : state) {
        double acc = 0.0;
        for (int i = g.i0; i <= g.nx; ++i) acc += hjb::jump_quadrature(g, params(), v, i, j);
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * (g.nx - g.i0 + 1));
}
BENCHMARK(BM_JumpQuadratureRow)->Unit(benchmark::kMicrosecond);

void BM_PolicyEvaluationSweep(benchmark::State& state) {
    const Grid& g = small_grid();
    const hjb::HowardResult& r = small_solution();
    for (auto _ : state) {
        // A converged start plus an infinite tolerance times exactly one sweep.
        hjb::ValueGrid v = hjb::policy_evaluation(g, params(), r.policy, r.value, 1e300, 1);
        benchmark::DoNotOptimize(v);
    }
    state.SetItemsProcessed(state.iterations() * (g.nx + 1) * (g.ny + 1));
}
BENCHMARK(BM_PolicyEvaluationSweep)->Unit(benchmark::kMillisecond);

void BM_HowardSolveSmall(benchmark::State& state) {
    for (auto _ : state) {
        hjb::HowardResult r = hjb::howard_solve(small_grid(), params());
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_HowardSolveSmall)->Unit(benchmark::kMillisecond);

void BM_NextClaimTime(benchmark::State& state) {
    RngStream rng(7, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(next_claim_time(params(), 2.8, rng));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NextClaimTime);

void BM_SimulatorSteps(benchmark::State& state) {
    RngStream rng(8, 0);
    const double h = 1.0 / 50.0;
    State s{1.0, 2.8};
    for (auto _ : state) {
        StepResult r = step(params(), s, h, 0.0, rng);
        s = r.state;
        if (s.x < -0.5 || s.x > 3.0) s = State{1.0, s.y};  // keep the path bounded
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatorSteps);

void BM_MlpForwardBackward(benchmark::State& state) {
    const nn::Mlp net({1, 64, 64, 4}, 11);
    nn::Mlp::Workspace ws;
    std::vector<double> grad(net.n_params(), 0.0);
    const std::vector<double> upstream = {1.0, -0.5, 0.25, 0.5};
    double y = 2.8;
    for (auto _ : state) {
        net.forward({y}, ws);
        net.backward(ws, upstream, 1.0, grad);
        benchmark::DoNotOptimize(grad.data());
        y = 2.0 + (y != 2.0 ? 0.0 : 0.8);  // alternate inputs
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MlpForwardBackward);

}  // namespace

BENCHMARK_MAIN();
