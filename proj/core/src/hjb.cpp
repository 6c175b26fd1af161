#include "hawkesdiv/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hawkesdiv/errors.hpp"

namespace hawkesdiv::hjb {

namespace {

// Regime-selection tie window: when the continuation and dividend candidate
// values agree to within this margin the label preference is Continuation.
// Keeps barriers well-defined without disturbing values or the residual band.
constexpr double kTieTol = 1e-9;

// Shared solver state: the mesh, the model, and the cached quadrature weights
// w[m] = F((m+1) dx) - F(m dx), m = 0..M: the exact claim probability of each
// cell, applied to the value at the cell midpoint.  Carrying the exact cell
// masses (rather than density * dx) keeps the jump operator's total mass at
// F((M+1) dx), so no artificial killing rate creeps into the scheme.
struct Scheme {
    const Grid& g;
    const ModelParams& p;
    std::vector<double> w;  // w[m] = F((m+1) dx) - F(m dx)

    Scheme(const Grid& g_, const ModelParams& p_, int M) : g(g_), p(p_) {
        w.resize(M + 1);
        for (int m = 0; m <= M; ++m) {
            w[m] = p.claim.cdf((m + 1) * g.dx) - p.claim.cdf(m * g.dx);
        }
    }

    // Midpoint claim quadrature at (i, j), x_i >= 0.  Positive midpoints
    // interpolate between the two flanking nodes of the jump-target row;
    // negative midpoints use the injection-region closed form.
    [[nodiscard]] double quad(const ValueGrid& v, int i, int j) const {
        const int jt = g.jump_row(j);
        const double* rt = v.row(jt);
        const double v0 = rt[g.i0];
        const int M = static_cast<int>(w.size()) - 1;
        const int m_pos = std::min(M, i - g.i0 - 1);
        double q = 0.0;
        for (int m = 0; m <= m_pos; ++m) {
            q += w[m] * 0.5 * (rt[i - m - 1] + rt[i - m]);
        }
        for (int m = m_pos + 1; m <= M; ++m) {
            const double x_mid = (i - g.i0 - m - 0.5) * g.dx;
            q += w[m] * injection_region_value(v0, x_mid, p.delta);
        }
        return q;
    }

    [[nodiscard]] double continuation(const ValueGrid& v, int i, int j) const {
        const double y = g.ys[j];
        const double adv = p.a * (y - p.b) / g.dy;
        const double cdx = p.c / g.dx;
        const double num = cdx * v(i + 1, j) + (j > 0 ? adv * v(i, j - 1) : 0.0) + y * quad(v, i, j);
        return num / (p.rho + y + cdx + adv);
    }

    [[nodiscard]] double boundary_x0(const ValueGrid& v, int j) const {
        const double y = g.ys[j];
        const double adv = p.a * (y - p.b) / g.dy;
        const double cdx = p.c / g.dx;
        const double v0_post = v(g.i0, g.jump_row(j));
        const double ih = p.claim.boundary_integral(v0_post, p.delta)
                              .value_or(quad(v, g.i0, j));
        const double num = cdx * v(g.i0 + 1, j) + (j > 0 ? adv * v(g.i0, j - 1) : 0.0) + y * ih;
        return num / (p.rho + y + cdx + adv);
    }

    [[nodiscard]] double generator(const ValueGrid& v, int i, int j) const {
        const double y = g.ys[j];
        const double dxp = (v(i + 1, j) - v(i, j)) / g.dx;
        const double dym = j > 0 ? (v(i, j) - v(i, j - 1)) / g.dy : 0.0;
        return (p.rho + y) * v(i, j) - p.c * dxp - p.a * (p.b - y) * dym - y * quad(v, i, j);
    }

    // One Gauss-Seidel sweep for the given policy; returns the sup-norm change.
    double sweep(const PolicyGrid& policy, ValueGrid& v) const {
        double change = 0.0;
        auto update = [&change](double& slot, double value) {
            change = std::max(change, std::abs(value - slot));
            slot = value;
        };
        for (int j = 0; j < g.ny; ++j) {
            // Rightward-to-leftward pass: the x-advection and y-advection
            // neighbors are already fresh; dividend nodes are finished by the
            // chain pass below.
            for (int i = g.nx; i > g.i0; --i) {
                if (i == g.nx || policy(i, j) == Regime::Dividend) {
                    update(v(i, j), v(i - 1, j) + g.dx);
                } else {
                    update(v(i, j), continuation(v, i, j));
                }
            }
            update(v(g.i0, j), boundary_x0(v, j));
            const double v0 = v(g.i0, j);
            for (int i = g.i0 - 1; i >= 0; --i) {
                update(v(i, j), injection_region_value(v0, g.xs[i], p.delta));
            }
            // Dividend chains read leftward, so resolve them left to right.
            for (int i = g.i0 + 1; i <= g.nx; ++i) {
                if (i == g.nx || policy(i, j) == Regime::Dividend) {
                    update(v(i, j), v(i - 1, j) + g.dx);
                }
            }
        }
        return change;
    }

    // Pointwise regime selection from the current values: the regime whose
    // variational-inequality term is smallest, ties preferring Continuation.
    // Fixed labels: boundary column Dividend, surplus-zero column
    // Continuation, negative columns by the sign of V_{i0,j} + delta x_i.
    // Returns the number of interior label changes.
    int improve(const ValueGrid& v, PolicyGrid& policy) const {
        int changed = 0;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = g.i0 + 1; i < g.nx; ++i) {
                const double cont = continuation(v, i, j);
                const double div = v(i - 1, j) + g.dx;
                const Regime want =
                    cont >= div - kTieTol ? Regime::Continuation : Regime::Dividend;
                if (policy(i, j) != want) {
                    policy(i, j) = want;
                    ++changed;
                }
            }
            policy(g.nx, j) = Regime::Dividend;
            policy(g.i0, j) = Regime::Continuation;
            for (int i = 0; i < g.i0; ++i) {
                policy(i, j) = v(g.i0, j) + p.delta * g.xs[i] >= 0.0 ? Regime::Injection
                                                                     : Regime::Ruin;
            }
        }
        // Top row is Dirichlet (V = x^+): slope one on the right, labels fixed.
        for (int i = 0; i <= g.nx; ++i) {
            if (i > g.i0)
                policy(i, g.ny) = Regime::Dividend;
            else if (i == g.i0)
                policy(i, g.ny) = Regime::Continuation;
            else
                policy(i, g.ny) =
                    v(g.i0, g.ny) + p.delta * g.xs[i] >= 0.0 ? Regime::Injection : Regime::Ruin;
        }
        return changed;
    }
};

ValueGrid lower_bound_init(const Grid& g) {
    ValueGrid v(g.nx, g.ny, 0.0);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) v(i, j) = std::max(g.xs[i], 0.0);
    return v;
}

}  // namespace

// The free-function operations rebuild the (small) weight table on each call;
// the solver proper reuses one Scheme for all sweeps.

double jump_quadrature(const Grid& g, const ModelParams& p, const ValueGrid& v, int i, int j) {
    if (i < g.i0 || i > g.nx || j < 0 || j > g.ny)
        throw std::out_of_range("jump_quadrature: node outside the x >= 0 region");
    Scheme s(g, p, g.quad_M);
    return s.quad(v, i, j);
}

double discrete_generator(const Grid& g, const ModelParams& p, const ValueGrid& v, int i, int j) {
    if (i < g.i0 || i >= g.nx || j < 0 || j >= g.ny)
        throw std::out_of_range("discrete_generator: node outside the interior");
    Scheme s(g, p, g.quad_M);
    return s.generator(v, i, j);
}

double continuation_update(const Grid& g, const ModelParams& p, const ValueGrid& v, int i, int j) {
    if (i < g.i0 || i >= g.nx || j < 0 || j >= g.ny)
        throw std::out_of_range("continuation_update: node outside the interior");
    Scheme s(g, p, g.quad_M);
    return s.continuation(v, i, j);
}

double dividend_update(const Grid& g, const ValueGrid& v, int i, int j) {
    if (i <= g.i0 || i > g.nx || j < 0 || j > g.ny)
        throw std::out_of_range("dividend_update: requires a node right of the origin");
    return v(i - 1, j) + g.dx;
}

void apply_negative_region(const Grid& g, const ModelParams& p, ValueGrid& v) {
    for (int j = 0; j <= g.ny; ++j) {
        const double v0 = v(g.i0, j);
        for (int i = 0; i < g.i0; ++i) v(i, j) = injection_region_value(v0, g.xs[i], p.delta);
    }
}

double boundary_x0_update(const Grid& g, const ModelParams& p, const ValueGrid& v, int j) {
    if (j < 0 || j >= g.ny)
        throw std::out_of_range("boundary_x0_update: requires 0 <= j < ny (top row is Dirichlet)");
    Scheme s(g, p, g.quad_M);
    return s.boundary_x0(v, j);
}

void boundary_ymax(const Grid& g, const ModelParams& p, ValueGrid& v) {
    for (int i = g.i0; i <= g.nx; ++i) v(i, g.ny) = g.xs[i];
    const double v0 = v(g.i0, g.ny);
    for (int i = 0; i < g.i0; ++i) v(i, g.ny) = injection_region_value(v0, g.xs[i], p.delta);
}

ValueGrid policy_evaluation(const Grid& g, const ModelParams& p, const PolicyGrid& policy,
                            const ValueGrid& v_init, double tol, int max_iter) {
    Scheme s(g, p, g.quad_M);
    ValueGrid v = v_init;
    boundary_ymax(g, p, v);
    double change = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        change = s.sweep(policy, v);
        if (change < tol) return v;
    }
    std::ostringstream msg;
    msg << "policy_evaluation: no convergence after " << max_iter
        << " sweeps (residual " << change << ", tol " << tol << ")";
    throw NumericalError(msg.str());
}

HowardResult howard_solve(const Grid& g, const ModelParams& p, const HowardOptions& opts) {
    p.validate();
    const double tol = opts.inner_tol > 0 ? opts.inner_tol : 1e-8 * (p.c / p.rho);
    Scheme s(g, p, g.quad_M);

    HowardResult res;
    res.value = lower_bound_init(g);
    boundary_ymax(g, p, res.value);
    res.policy = PolicyGrid(g.nx, g.ny, Regime::Continuation);
    s.improve(res.value, res.policy);

    ValueGrid prev;
    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        res.value = policy_evaluation(g, p, res.policy, res.value, tol, opts.max_inner);

        // On fine meshes the regime labels can keep flipping among exact ties
        // without moving the values; a sup-norm stall is as good a fixed point
        // as an unchanged policy.
        double outer_change = std::numeric_limits<double>::infinity();
        if (outer > 1) {
            outer_change = 0.0;
            for (int j = 0; j <= g.ny; ++j)
                for (int i = 0; i <= g.nx; ++i)
                    outer_change = std::max(outer_change, std::abs(res.value(i, j) - prev(i, j)));
        }
        prev = res.value;

        const int changed = s.improve(res.value, res.policy);
        res.improved_counts.push_back(changed);
        res.outer_iterations = outer;
        if (changed == 0 || outer_change < tol) {
            // Polish: drive equation residuals well below the value tolerance.
            res.value = policy_evaluation(g, p, res.policy, res.value,
                                          tol * opts.polish_factor, opts.max_inner);
            res.final_residual = tol * opts.polish_factor;
            return res;
        }
    }
    throw NumericalError("howard_solve: policy not fixed after max_outer iterations");
}

BarrierPolicy::BarrierPolicy(std::vector<double> ys, std::vector<double> kappa,
                             std::vector<double> xstar, std::vector<int> inner_islands)
    : ys_(std::move(ys)), kappa_(std::move(kappa)), xstar_(std::move(xstar)),
      islands_(std::move(inner_islands)) {
    if (ys_.size() < 2 || ys_.size() != kappa_.size() || ys_.size() != xstar_.size())
        throw std::invalid_argument("BarrierPolicy: mismatched or too-short tables");
}

namespace {
double interp_clamped(const std::vector<double>& ys, const std::vector<double>& vals, double y) {
    if (y <= ys.front()) return vals.front();
    if (y >= ys.back()) return vals.back();
    const auto it = std::upper_bound(ys.begin(), ys.end(), y);
    const std::size_t hi = static_cast<std::size_t>(it - ys.begin());
    const std::size_t lo = hi - 1;
    const double t = (y - ys[lo]) / (ys[hi] - ys[lo]);
    return vals[lo] + t * (vals[hi] - vals[lo]);
}
}  // namespace

double BarrierPolicy::kappa_star(double y) const { return interp_clamped(ys_, kappa_, y); }
double BarrierPolicy::x_star(double y) const { return interp_clamped(ys_, xstar_, y); }

BarrierPolicy extract_barriers(const Grid& g, const ModelParams& p, const ValueGrid& v,
                               const PolicyGrid& policy) {
    std::vector<double> kappa(g.ny + 1), xstar(g.ny + 1);
    std::vector<int> islands(g.ny + 1, 0);
    for (int j = 0; j <= g.ny; ++j) {
        kappa[j] = -v(g.i0, j) / p.delta;
        int first = g.nx;
        while (first > g.i0 && policy(first - 1, j) == Regime::Dividend) --first;
        xstar[j] = g.xs[first];
        bool in_run = false;
        for (int i = g.i0; i < first; ++i) {
            const bool d = policy(i, j) == Regime::Dividend;
            if (d && !in_run) ++islands[j];
            in_run = d;
        }
    }
    return BarrierPolicy(g.ys, std::move(kappa), std::move(xstar), std::move(islands));
}

double value_at(const Grid& g, const ModelParams& p, const ValueGrid& v, double x, double y) {
    const double yc = std::clamp(y, g.ys.front(), g.ys.back());
    const int jlo = std::min(g.ny - 1, static_cast<int>((yc - g.ys.front()) / g.dy));
    const double ty = std::clamp((yc - g.ys[jlo]) / g.dy, 0.0, 1.0);
    auto column = [&](int i) { return (1.0 - ty) * v(i, jlo) + ty * v(i, jlo + 1); };

    if (x < 0.0) return injection_region_value(column(g.i0), x, p.delta);
    if (x >= g.xs[g.nx]) return column(g.nx) + (x - g.xs[g.nx]);  // slope-one extension
    const int ilo = std::min(g.nx - 1, g.i0 + static_cast<int>(x / g.dx));
    const double tx = std::clamp((x - g.xs[ilo]) / g.dx, 0.0, 1.0);
    return (1.0 - tx) * column(ilo) + tx * column(ilo + 1);
}

std::vector<SweepResult> sensitivity_sweep(const ModelParams& base, const GridSpec& spec,
                                           const std::string& param_name,
                                           const std::vector<double>& values,
                                           const HowardOptions& opts) {
    std::vector<SweepResult> out;
    out.reserve(values.size());
    for (double value : values) {
        ModelParams p = base;
        if (param_name == "a")
            p.a = value;
        else if (param_name == "eta")
            p.eta = value;
        else if (param_name == "c")
            p.c = value;
        else if (param_name == "beta")
            p.claim = ClaimDist::exponential(value);
        else if (param_name == "rho")
            p.rho = value;
        else if (param_name == "delta")
            p.delta = value;
        else
            throw ConfigError("sensitivity_sweep: unknown parameter '" + param_name +
                              "' (expected a, eta, c, beta, rho, delta)");
        p.validate();
        SweepResult r;
        r.params = p;
        r.grid = build_grid(spec, p);
        HowardResult h = howard_solve(r.grid, p, opts);
        r.value = std::move(h.value);
        r.policy = std::move(h.policy);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace hawkesdiv::hjb
