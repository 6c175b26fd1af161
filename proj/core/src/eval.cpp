#include "hawkesdiv/eval.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "hawkesdiv/errors.hpp"

namespace hawkesdiv::eval {

namespace {

std::vector<double> policy_returns(const PolicyFactory& policy, const ModelParams& p,
                                   const McOptions& opt, const State& s0,
                                   std::uint64_t stream_base) {
    std::vector<double> returns(static_cast<std::size_t>(opt.n_paths));
    for (int j = 0; j < opt.n_paths; ++j) {
        RngStream rng(opt.seed, stream_base + static_cast<std::uint64_t>(j));
        const BarrierFn fn = policy(rng);
        returns[static_cast<std::size_t>(j)] =
            simulate_barrier_trajectory(p, s0, opt.h, opt.horizon_T, fn, rng).total_reward();
    }
    return returns;
}

void append_mc_cell(std::string& out, double mean, double lo, double hi, double rel) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %7.4f [%7.4f, %7.4f] %+6.2f%%", mean, lo, hi, rel);
    out += buf;
}

}  // namespace

MeanCi mean_ci95(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("mean_ci95: need at least two samples");
    MeanCi r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - r.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(xs.size() - 1);
    r.se = std::sqrt(var / static_cast<double>(xs.size()));
    r.lo = r.mean - 1.96 * r.se;
    r.hi = r.mean + 1.96 * r.se;
    return r;
}

PolicyFactory pde_policy(const hjb::BarrierPolicy& barriers) {
    auto shared = std::make_shared<const hjb::BarrierPolicy>(barriers);
    return [shared](RngStream&) -> BarrierFn {
        return [shared](double y) { return (*shared)(y); };
    };
}

PolicyFactory actor_policy(const nn::Mlp& actor, double sigma_min, bool stochastic) {
    auto net = std::make_shared<const nn::Mlp>(actor);
    if (!stochastic) {
        return [net, sigma_min](RngStream&) -> BarrierFn {
            return [net, sigma_min, ws = nn::Mlp::Workspace{},
                    in = std::vector<double>(1)](double y) mutable {
                in[0] = y;
                net->forward(in, ws);
                const nn::GaussianPolicyHead h =
                    nn::head_from_raw(ws.pre.back().data(), sigma_min);
                return BarrierDecision{nn::softplus(h.mu1), -nn::softplus(h.mu2)};
            };
        };
    }
    return [net, sigma_min](RngStream& rng) -> BarrierFn {
        return [net, sigma_min, &rng, ws = nn::Mlp::Workspace{},
                in = std::vector<double>(1)](double y) mutable {
            in[0] = y;
            net->forward(in, ws);
            const nn::GaussianPolicyHead h = nn::head_from_raw(ws.pre.back().data(), sigma_min);
            const double g1 = h.mu1 + h.sigma1 * rng.normal();
            const double g2 = h.mu2 + h.sigma2 * rng.normal();
            return BarrierDecision{nn::softplus(g1), -nn::softplus(g2)};
        };
    };
}

EvalReport mc_value(const PolicyFactory& policy, PolicySource source, const ModelParams& p,
                    const McOptions& opt, const std::vector<State>& states, const PdeRef& pde_ref) {
    if (opt.n_paths < 2) throw ConfigError("mc_value: need at least two paths");
    if (states.empty()) throw ConfigError("mc_value: no initial states given");
    EvalReport rep;
    rep.rows.reserve(states.size());
    for (std::size_t si = 0; si < states.size(); ++si) {
        const State& s0 = states[si];
        const std::uint64_t base = static_cast<std::uint64_t>(si) * opt.n_paths;
        const MeanCi ci = mean_ci95(policy_returns(policy, p, opt, s0, base));
        EvalRow row;
        row.x0 = s0.x;
        row.y0 = s0.y;
        row.mc_mean = ci.mean;
        row.mc_lo = ci.lo;
        row.mc_hi = ci.hi;
        row.n_paths = opt.n_paths;
        row.source = source;
        if (pde_ref) {
            const double ref = pde_ref(s0.x, s0.y);
            row.pde_value = ref;
            row.rel_err_pct = (ci.mean - ref) / ref * 100.0;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

CompareResult compare_table(const Grid& g, const hjb::HowardResult& pde, const nn::Mlp* actor,
                            double sigma_min, const ModelParams& p, const McOptions& opt,
                            const std::vector<State>& states) {
    const hjb::BarrierPolicy barriers = hjb::extract_barriers(g, p, pde.value, pde.policy);
    const PolicyFactory opt_policy = pde_policy(barriers);
    const PdeRef ref = [&g, &p, &pde](double x, double y) {
        return hjb::value_at(g, p, pde.value, x, y);
    };
    const EvalReport opt_rep =
        mc_value(opt_policy, PolicySource::PdeBarriers, p, opt, states, ref);
    std::optional<EvalReport> rl_rep;
    if (actor != nullptr) {
        rl_rep = mc_value(actor_policy(*actor, sigma_min, false), PolicySource::LearnedActor, p,
                          opt, states, ref);
    }

    CompareResult res;
    res.rows.reserve(states.size());
    res.text = "   x0     y0      PDE                      MC (Opt.)";
    if (actor != nullptr) res.text += "                       MC (RL)";
    res.text += "\n";
    for (std::size_t si = 0; si < states.size(); ++si) {
        const EvalRow& o = opt_rep.rows[si];
        CompareRow row;
        row.x0 = o.x0;
        row.y0 = o.y0;
        row.pde = *o.pde_value;
        row.opt_mean = o.mc_mean;
        row.opt_lo = o.mc_lo;
        row.opt_hi = o.mc_hi;
        row.opt_rel_pct = *o.rel_err_pct;
        char head[64];
        std::snprintf(head, sizeof head, " %5.2f  %5.2f   %7.4f", row.x0, row.y0, row.pde);
        res.text += head;
        append_mc_cell(res.text, row.opt_mean, row.opt_lo, row.opt_hi, row.opt_rel_pct);
        if (rl_rep) {
            const EvalRow& r = rl_rep->rows[si];
            row.rl_mean = r.mc_mean;
            row.rl_lo = r.mc_lo;
            row.rl_hi = r.mc_hi;
            row.rl_rel_pct = r.rel_err_pct;
            append_mc_cell(res.text, r.mc_mean, r.mc_lo, r.mc_hi, *r.rel_err_pct);
        }
        res.text += "\n";
        res.rows.push_back(row);
    }
    return res;
}

}  // namespace hawkesdiv::eval
