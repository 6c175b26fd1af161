#pragma once

#include <string>

#include "hawkesdiv/eval.hpp"
#include "hawkesdiv/grid.hpp"
#include "hawkesdiv/hjb.hpp"
#include "hawkesdiv/rl.hpp"

namespace hawkesdiv::io {

/// Deterministic numeric formatting shared by all writers ("%.12g"): byte
/// stability across runs is part of the output contract.
[[nodiscard]] std::string format_num(double v);

/// value grid: header x,y,V; rows in row-major (j outer, i inner) order.
void write_value_csv(const std::string& path, const Grid& g, const hjb::ValueGrid& v);

/// regime map: header x,y,regime with 0:Ruin 1:Injection 2:Continuation 3:Dividend.
void write_regime_csv(const std::string& path, const Grid& g, const hjb::PolicyGrid& policy);

/// barriers: header y,kappa_star,x_star, one row per intensity node.
void write_barriers_csv(const std::string& path, const hjb::BarrierPolicy& barriers);

/// evaluation rows: x0,y0,policy,mc_mean,mc_ci_low,mc_ci_high,pde_value,rel_err_pct,n_paths
/// (absent benchmark cells are left empty).
void write_eval_csv(const std::string& path, const eval::EvalReport& report);

/// comparison table: PDE, MC(Opt), MC(RL) columns with CIs and relative errors.
void write_compare_csv(const std::string& path, const eval::CompareResult& result);

/// One JSON-lines record of per-epoch training metrics.
[[nodiscard]] std::string metrics_json_line(const rl::EpochMetrics& m);

}  // namespace hawkesdiv::io
