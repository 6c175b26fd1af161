#include "hawkesdiv/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hawkesdiv/config.hpp"
#include "hawkesdiv/errors.hpp"
#include "hawkesdiv/eval.hpp"
#include "hawkesdiv/hjb.hpp"
#include "hawkesdiv/io.hpp"
#include "hawkesdiv/neural.hpp"
#include "hawkesdiv/rl.hpp"

namespace hawkesdiv {

namespace {

namespace fs = std::filesystem;

fs::path resolve_output_dir(const RunConfig& cfg, const std::string& flag) {
    std::string dir = cfg.output_dir;
    if (const char* env = std::getenv("HAWKESDIV_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        dir = env;
    }
    if (!flag.empty()) dir = flag;
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

hjb::HowardResult solve_pde(const RunConfig& cfg, Grid& g) {
    g = build_grid(cfg.grid, cfg.model);
    return hjb::howard_solve(g, cfg.model);
}

int run_solve(const RunConfig& cfg, const fs::path& out_dir) {
    Grid g;
    const hjb::HowardResult res = solve_pde(cfg, g);
    const hjb::BarrierPolicy barriers = hjb::extract_barriers(g, cfg.model, res.value, res.policy);

    io::write_value_csv((out_dir / "value.csv").string(), g, res.value);
    io::write_regime_csv((out_dir / "regime.csv").string(), g, res.policy);
    io::write_barriers_csv((out_dir / "barriers.csv").string(), barriers);

    nlohmann::json summary;
    summary["grid"] = {{"dx", g.dx}, {"dy", g.dy}, {"nx", g.nx}, {"ny", g.ny}, {"i0", g.i0}};
    summary["outer_iterations"] = res.outer_iterations;
    summary["final_residual"] = res.final_residual;
    nlohmann::json values = nlohmann::json::array();
    for (const State& s : cfg.eval.states) {
        const double v = hjb::value_at(g, cfg.model, res.value, s.x, s.y);
        values.push_back({{"x", s.x}, {"y", s.y}, {"V", v}});
        std::printf("V(%g, %g) = %.6f\n", s.x, s.y, v);
    }
    summary["values"] = values;
    std::ofstream(out_dir / "solve_summary.json") << summary.dump(2) << "\n";

    std::printf("solve: %d policy iterations, final residual %.3e\n", res.outer_iterations,
                res.final_residual);
    std::printf("wrote %s, %s, %s, %s\n", (out_dir / "value.csv").string().c_str(),
                (out_dir / "regime.csv").string().c_str(),
                (out_dir / "barriers.csv").string().c_str(),
                (out_dir / "solve_summary.json").string().c_str());
    return 0;
}

int run_train(const RunConfig& cfg, const std::string& algo_name, const fs::path& out_dir) {
    const rl::Algo algo =
        algo_name == "reinforce" ? rl::Algo::Reinforce : rl::Algo::ActorCritic;

    std::unique_ptr<rl::KappaFn> frozen;
    if (cfg.train.freeze_kappa) {
        std::printf("freeze_kappa: solving the PDE for the injection threshold map...\n");
        Grid g;
        const hjb::HowardResult res = solve_pde(cfg, g);
        hjb::BarrierPolicy barriers =
            hjb::extract_barriers(g, cfg.model, res.value, res.policy);
        frozen = std::make_unique<rl::KappaFn>(
            [barriers = std::move(barriers)](double y) { return barriers.kappa_star(y); });
    }

    std::ofstream metrics(out_dir / "metrics.jsonl");
    if (!metrics) throw ConfigError("cannot open metrics.jsonl for writing");
    const auto on_epoch = [&metrics, &cfg](const rl::EpochMetrics& m) {
        metrics << io::metrics_json_line(m) << "\n";
        metrics.flush();
        std::printf("epoch %4d/%d  mean_G %8.4f  std_G %7.4f  entropy %7.4f  ruin %.3f  %.1fs\n",
                    m.epoch + 1, cfg.train.epochs, m.mean_G, m.std_G, m.mean_entropy, m.ruin_frac,
                    m.wall_time_s);
        std::fflush(stdout);
    };

    const rl::TrainResult res = rl::train(cfg.model, cfg.train, algo, on_epoch, frozen.get());
    res.actor.save((out_dir / "actor.json").string());
    std::printf("wrote %s\n", (out_dir / "actor.json").string().c_str());
    if (res.critic) {
        res.critic->save((out_dir / "critic.json").string());
        std::printf("wrote %s\n", (out_dir / "critic.json").string().c_str());
    }
    if (res.diverged) {
        // Checkpoints above hold the last finite parameters.
        throw NumericalError("training diverged: " + res.error);
    }
    if (!res.metrics.empty()) {
        const rl::EpochMetrics& last = res.metrics.back();
        std::printf("final epoch mean_G %.4f (std %.4f)\n", last.mean_G, last.std_G);
    }
    return 0;
}

void print_eval_report(const eval::EvalReport& rep) {
    for (const eval::EvalRow& r : rep.rows) {
        std::printf("x0=%g y0=%g: mc %.4f [%.4f, %.4f]", r.x0, r.y0, r.mc_mean, r.mc_lo, r.mc_hi);
        if (r.pde_value) std::printf("  pde %.4f", *r.pde_value);
        if (r.rel_err_pct) std::printf("  rel %+0.2f%%", *r.rel_err_pct);
        std::printf("  (%d paths)\n", r.n_paths);
    }
}

int run_evaluate(const RunConfig& cfg, const std::string& policy_arg, bool stochastic_flag,
                 const fs::path& out_dir) {
    Grid g;
    const hjb::HowardResult pde = solve_pde(cfg, g);
    const eval::PdeRef ref = [&g, &cfg, &pde](double x, double y) {
        return hjb::value_at(g, cfg.model, pde.value, x, y);
    };
    eval::McOptions mc;
    mc.h = cfg.eval.h;
    mc.horizon_T = cfg.eval.horizon_T;
    mc.n_paths = cfg.eval.n_paths;
    mc.seed = cfg.eval.seed;

    eval::EvalReport rep;
    if (policy_arg == "pde") {
        const hjb::BarrierPolicy barriers =
            hjb::extract_barriers(g, cfg.model, pde.value, pde.policy);
        rep = eval::mc_value(eval::pde_policy(barriers), eval::PolicySource::PdeBarriers,
                             cfg.model, mc, cfg.eval.states, ref);
    } else {
        const nn::Mlp actor = nn::Mlp::load(policy_arg);
        const bool stochastic = stochastic_flag || cfg.eval.stochastic_actor;
        rep = eval::mc_value(eval::actor_policy(actor, cfg.train.sigma_min, stochastic),
                             eval::PolicySource::LearnedActor, cfg.model, mc, cfg.eval.states,
                             ref);
    }
    io::write_eval_csv((out_dir / "evaluation.csv").string(), rep);
    print_eval_report(rep);
    std::printf("wrote %s\n", (out_dir / "evaluation.csv").string().c_str());
    return 0;
}

int run_compare(const RunConfig& cfg, const std::string& checkpoint, const fs::path& out_dir) {
    Grid g;
    const hjb::HowardResult pde = solve_pde(cfg, g);
    const nn::Mlp actor = nn::Mlp::load(checkpoint);
    eval::McOptions mc;
    mc.h = cfg.eval.h;
    mc.horizon_T = cfg.eval.horizon_T;
    mc.n_paths = cfg.eval.n_paths;
    mc.seed = cfg.eval.seed;
    const eval::CompareResult res =
        eval::compare_table(g, pde, &actor, cfg.train.sigma_min, cfg.model, mc, cfg.eval.states);
    io::write_compare_csv((out_dir / "compare.csv").string(), res);
    std::fputs(res.text.c_str(), stdout);
    std::printf("wrote %s\n", (out_dir / "compare.csv").string().c_str());
    return 0;
}

int run_sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& values,
              const fs::path& out_dir) {
    if (values.empty()) throw ConfigError("sweep: --values must list at least one value");
    const std::vector<hjb::SweepResult> results =
        hjb::sensitivity_sweep(cfg.model, cfg.grid, param, values);
    for (std::size_t i = 0; i < results.size(); ++i) {
        const hjb::SweepResult& r = results[i];
        char tag[64];
        std::snprintf(tag, sizeof tag, "%s_%g", param.c_str(), values[i]);
        const hjb::BarrierPolicy barriers =
            hjb::extract_barriers(r.grid, r.params, r.value, r.policy);
        const std::string regime = (out_dir / ("sweep_" + std::string(tag) + "_regime.csv")).string();
        const std::string barrier = (out_dir / ("sweep_" + std::string(tag) + "_barriers.csv")).string();
        io::write_regime_csv(regime, r.grid, r.policy);
        io::write_barriers_csv(barrier, barriers);
        std::printf("%s = %g: kappa*(b) = %.4f, x*(b) = %.4f -> %s, %s\n", param.c_str(),
                    values[i], barriers.kappa_star(r.params.b), barriers.x_star(r.params.b),
                    regime.c_str(), barrier.c_str());
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Optimal dividends and capital injections under Hawkes claim arrivals"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir_flag;
    std::uint64_t seed_override = 0;
    bool stochastic_flag = false;
    std::string algo = "actor-critic";
    std::string policy_arg;
    std::string checkpoint;
    std::string sweep_param;
    std::vector<double> sweep_values;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--seed", seed_override, "Overrides the train and eval seeds");
        sub->add_option("--output-dir", output_dir_flag,
                        "Overrides output_dir (and HAWKESDIV_OUTPUT_DIR)");
    };

    CLI::App* solve = app.add_subcommand("solve", "Solve the control problem on the grid");
    add_common(solve);

    CLI::App* train = app.add_subcommand("train", "Train a barrier policy by policy gradients");
    add_common(train);
    train->add_option("--algo", algo, "reinforce or actor-critic")
        ->required()
        ->check(CLI::IsMember({"reinforce", "actor-critic"}));

    CLI::App* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation of a policy");
    add_common(evaluate);
    evaluate->add_option("--policy", policy_arg, "'pde' or a checkpoint file")->required();
    evaluate->add_flag("--stochastic", stochastic_flag,
                       "Sample the learned policy instead of using its means");

    CLI::App* compare = app.add_subcommand("compare", "PDE / MC(Opt) / MC(RL) benchmark table");
    add_common(compare);
    compare->add_option("--checkpoint", checkpoint, "Trained actor checkpoint")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "Re-solve across one parameter's values");
    add_common(sweep);
    sweep->add_option("--param", sweep_param, "One of a, eta, c, beta, rho, delta")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated parameter values")
        ->required()
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = RunConfig::from_file(config_path);
        CLI::App* sub = app.get_subcommands().front();
        if (sub->count("--seed") > 0) {
            cfg.train.seed = seed_override;
            cfg.eval.seed = seed_override;
        }
        const fs::path out_dir = resolve_output_dir(cfg, output_dir_flag);
        if (solve->parsed()) return run_solve(cfg, out_dir);
        if (train->parsed()) return run_train(cfg, algo, out_dir);
        if (evaluate->parsed()) return run_evaluate(cfg, policy_arg, stochastic_flag, out_dir);
        if (compare->parsed()) return run_compare(cfg, checkpoint, out_dir);
        if (sweep->parsed()) return run_sweep(cfg, sweep_param, sweep_values, out_dir);
        return 1;  // unreachable: require_subcommand(1)
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

}  // namespace hawkesdiv
