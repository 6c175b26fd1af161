#pragma once

#include <string>
#include <vector>

#include "hawkesdiv/grid.hpp"
#include "hawkesdiv/hawkes_sim.hpp"
#include "hawkesdiv/model.hpp"

namespace hawkesdiv::hjb {

/// Discrete value function V_{i,j} ~ v(x_i, y_j) on a Grid.
class ValueGrid {
public:
    ValueGrid() = default;
    ValueGrid(int nx, int ny, double fill = 0.0)
        : nx_(nx), ny_(ny), v_(static_cast<std::size_t>(nx + 1) * (ny + 1), fill) {}

    [[nodiscard]] double operator()(int i, int j) const { return v_[idx(i, j)]; }
    double& operator()(int i, int j) { return v_[idx(i, j)]; }

    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }

    /// Row j as a contiguous span of nx+1 values (fixed j, varying i).
    [[nodiscard]] const double* row(int j) const { return v_.data() + static_cast<std::size_t>(j) * (nx_ + 1); }
    double* row(int j) { return v_.data() + static_cast<std::size_t>(j) * (nx_ + 1); }

private:
    [[nodiscard]] std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * (nx_ + 1) + i;
    }

    int nx_ = -1;
    int ny_ = -1;
    std::vector<double> v_;
};

/// Per-node regime label.  The numeric values are the CSV encoding.
enum class Regime : unsigned char { Ruin = 0, Injection = 1, Continuation = 2, Dividend = 3 };

/// Regime map: for x_i < 0 the label is Injection or Ruin (sign of
/// V_{i0,j} + delta x_i); for x_i >= 0 it is Dividend or Continuation.
class PolicyGrid {
public:
    PolicyGrid() = default;
    PolicyGrid(int nx, int ny, Regime fill = Regime::Continuation)
        : nx_(nx), ny_(ny), r_(static_cast<std::size_t>(nx + 1) * (ny + 1), fill) {}

    [[nodiscard]] Regime operator()(int i, int j) const { return r_[idx(i, j)]; }
    Regime& operator()(int i, int j) { return r_[idx(i, j)]; }

    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }

private:
    [[nodiscard]] std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * (nx_ + 1) + i;
    }

    int nx_ = -1;
    int ny_ = -1;
    std::vector<Regime> r_;
};

/**
 * Barrier strategy tabulated on the intensity nodes, with linear
 * interpolation between nodes and clamping beyond the table.
 *
 * kappa_star(y) = -V(0, y)/delta <= 0 is the injection/ruin threshold;
 * x_star(y) >= 0 is the outermost dividend barrier.  x_star need not be
 * monotone in y: the continuation region can be layered, and any dividend
 * islands strictly inside it are reported per row as diagnostics.
 */
class BarrierPolicy {
public:
    BarrierPolicy() = default;
    BarrierPolicy(std::vector<double> ys, std::vector<double> kappa, std::vector<double> xstar,
                  std::vector<int> inner_islands = {});

    [[nodiscard]] double kappa_star(double y) const;
    [[nodiscard]] double x_star(double y) const;

    /// Simulator-compatible query.
    [[nodiscard]] BarrierDecision operator()(double y) const {
        return BarrierDecision{x_star(y), kappa_star(y)};
    }

    [[nodiscard]] const std::vector<double>& ys() const { return ys_; }
    [[nodiscard]] const std::vector<double>& kappa_table() const { return kappa_; }
    [[nodiscard]] const std::vector<double>& x_star_table() const { return xstar_; }
    /// Number of dividend islands per row that are not part of the outermost run.
    [[nodiscard]] const std::vector<int>& inner_dividend_islands() const { return islands_; }

private:
    std::vector<double> ys_, kappa_, xstar_;
    std::vector<int> islands_;
};

// ---------------------------------------------------------------------------
// Local scheme operations.  x-derivatives are one-sided against the premium
// drift (forward D+x), y-derivatives against the downward intensity drift
// (backward D-y); claim jumps are midpoint-quadrature sums over the
// truncated support.  All operations read the grid as-is; none mutate.
// ---------------------------------------------------------------------------

/**
 * Midpoint quadrature of the claim integral at node (i, j) with x_i >= 0:
 *   sum_{m=0}^{M} w_m V(x_i - (m+1/2) dx, y_j + eta),
 * where w_m = F((m+1) dx) - F(m dx) is the exact claim probability of cell m
 * (mass-preserving: the weights sum to F((M+1) dx)).  The intensity target
 * row is exact by mesh construction (clamped to the top row, whose values
 * follow the asymptotic V = x^+, when it would overflow).  Positive midpoint
 * arguments interpolate linearly in x (the midpoints fall exactly between
 * nodes, so the stencil weights are 1/2, 1/2); negative arguments use the
 * closed-form injection-region value based on V(0, y_j + eta).
 */
[[nodiscard]] double jump_quadrature(const Grid& g, const ModelParams& p, const ValueGrid& v,
                                     int i, int j);

/**
 * Negative discrete generator -L_h V at an interior node with x_i > 0:
 *   (rho + y_j) V_{i,j} - c D+x V - a (b - y_j) D-y V - y_j Q_h[V].
 */
[[nodiscard]] double discrete_generator(const Grid& g, const ModelParams& p, const ValueGrid& v,
                                        int i, int j);

/// Fixed-point value of the continuation equation -L_h V = 0 at (i, j):
/// [ (c/dx) V_{i+1,j} + (a (y_j - b)/dy) V_{i,j-1} + y_j Q_h ] / (rho + y_j + c/dx + a (y_j - b)/dy).
[[nodiscard]] double continuation_update(const Grid& g, const ModelParams& p, const ValueGrid& v,
                                         int i, int j);

/// Dividend first-order condition D-x V = 1: V_{i,j} = V_{i-1,j} + dx.  Requires i > i0.
[[nodiscard]] double dividend_update(const Grid& g, const ValueGrid& v, int i, int j);

/// Imposes V_{i,j} = max(0, V_{i0,j} + delta x_i) on every column left of the origin.
void apply_negative_region(const Grid& g, const ModelParams& p, ValueGrid& v);

/**
 * Fixed-point value of the surplus-zero boundary equation at row j < ny:
 *   (rho + y_j) V = c D+x V + a (b - y_j) D-y V + y_j I_h,
 * where I_h is the claim integral in closed form (ClaimDist::boundary_integral)
 * evaluated at v0 = V_{i0, j + jump}.  Rearranged like continuation_update.
 */
[[nodiscard]] double boundary_x0_update(const Grid& g, const ModelParams& p, const ValueGrid& v,
                                        int j);

/// Imposes the asymptotic top row: V_{i,ny} = x_i for i >= i0, and the
/// negative-region closed form left of the origin.
void boundary_ymax(const Grid& g, const ModelParams& p, ValueGrid& v);

// ---------------------------------------------------------------------------
// Solver.
// ---------------------------------------------------------------------------

struct HowardOptions {
    /// Sup-norm tolerance of one evaluation sweep; < 0 means 1e-8 * (c/rho).
    double inner_tol = -1.0;
    int max_outer = 100;   ///< policy-iteration limit
    int max_inner = 20000;   ///< evaluation sweeps per policy
    /// The final evaluation is re-run at inner_tol * polish_factor so that
    /// equation residuals (not just value changes) are driven down.
    double polish_factor = 1e-2;
};

/**
 * Policy evaluation: Gauss-Seidel sweeps (rows upward, columns rightward to
 * leftward, then a dividend chain pass) applying at each node the update of
 * its prescribed regime, until the sup-norm change falls below tol.
 * Throws NumericalError after max_iter sweeps (message carries the residual).
 */
[[nodiscard]] ValueGrid policy_evaluation(const Grid& g, const ModelParams& p,
                                          const PolicyGrid& policy, const ValueGrid& v_init,
                                          double tol, int max_iter);

struct HowardResult {
    ValueGrid value;
    PolicyGrid policy;
    int outer_iterations = 0;
    std::vector<int> improved_counts;  ///< regime changes per improvement step
    double final_residual = 0.0;       ///< last evaluation sup-norm change
};

/**
 * Howard policy iteration: alternates policy evaluation with pointwise
 * improvement (the regime whose variational-inequality term is smallest,
 * ties preferring Continuation, then Dividend) until the policy is fixed.
 * Initialization: V = x^+, policy improved from it.  The surplus-zero column
 * always follows the boundary equation, the rightmost column always pays
 * dividends, and the negative region and top row are reimposed every sweep.
 */
[[nodiscard]] HowardResult howard_solve(const Grid& g, const ModelParams& p,
                                        const HowardOptions& opts = {});

/// kappa_star row = -V_{i0,j}/delta; x_star row = left edge of the outermost
/// all-dividend run (x_max when a row has no such run beyond its last column).
[[nodiscard]] BarrierPolicy extract_barriers(const Grid& g, const ModelParams& p,
                                             const ValueGrid& v, const PolicyGrid& policy);

/**
 * Value read off the converged grid at an arbitrary state: bilinear between
 * nodes; slope-one extrapolation beyond x_max (dividend region); the exact
 * injection-region closed form for x < 0; intensity clamped to the table.
 */
[[nodiscard]] double value_at(const Grid& g, const ModelParams& p, const ValueGrid& v, double x,
                              double y);

struct SweepResult {
    ModelParams params;
    Grid grid;
    ValueGrid value;
    PolicyGrid policy;
};

/**
 * One howard_solve per value of the named parameter
 * (one of "a", "eta", "c", "beta", "rho", "delta"), holding everything else
 * at the base configuration.  The mesh is rebuilt per run since it is tied
 * to eta.
 */
[[nodiscard]] std::vector<SweepResult> sensitivity_sweep(const ModelParams& base,
                                                         const GridSpec& spec,
                                                         const std::string& param_name,
                                                         const std::vector<double>& values,
                                                         const HowardOptions& opts = {});

}  // namespace hawkesdiv::hjb
