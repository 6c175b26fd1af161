#include "hawkesdiv/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hawkesdiv::io {

namespace {

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("io: cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_value_csv(const std::string& path, const Grid& g, const hjb::ValueGrid& v) {
    std::ofstream out = open_or_throw(path);
    out << "x,y,V\n";
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            out << format_num(g.xs[static_cast<std::size_t>(i)]) << ','
                << format_num(g.ys[static_cast<std::size_t>(j)]) << ',' << format_num(v(i, j))
                << '\n';
        }
    }
}

void write_regime_csv(const std::string& path, const Grid& g, const hjb::PolicyGrid& policy) {
    std::ofstream out = open_or_throw(path);
    out << "x,y,regime\n";
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            out << format_num(g.xs[static_cast<std::size_t>(i)]) << ','
                << format_num(g.ys[static_cast<std::size_t>(j)]) << ','
                << static_cast<int>(policy(i, j)) << '\n';
        }
    }
}

void write_barriers_csv(const std::string& path, const hjb::BarrierPolicy& barriers) {
    std::ofstream out = open_or_throw(path);
    out << "y,kappa_star,x_star\n";
    const auto& ys = barriers.ys();
    const auto& kappa = barriers.kappa_table();
    const auto& xstar = barriers.x_star_table();
    for (std::size_t j = 0; j < ys.size(); ++j) {
        out << format_num(ys[j]) << ',' << format_num(kappa[j]) << ',' << format_num(xstar[j])
            << '\n';
    }
}

void write_eval_csv(const std::string& path, const eval::EvalReport& report) {
    std::ofstream out = open_or_throw(path);
    out << "x0,y0,policy,mc_mean,mc_ci_low,mc_ci_high,pde_value,rel_err_pct,n_paths\n";
    for (const eval::EvalRow& r : report.rows) {
        out << format_num(r.x0) << ',' << format_num(r.y0) << ','
            << (r.source == eval::PolicySource::PdeBarriers ? "pde" : "rl") << ','
            << format_num(r.mc_mean) << ',' << format_num(r.mc_lo) << ',' << format_num(r.mc_hi)
            << ',' << (r.pde_value ? format_num(*r.pde_value) : std::string{}) << ','
            << (r.rel_err_pct ? format_num(*r.rel_err_pct) : std::string{}) << ',' << r.n_paths
            << '\n';
    }
}

void write_compare_csv(const std::string& path, const eval::CompareResult& result) {
    std::ofstream out = open_or_throw(path);
    out << "x0,y0,pde,mc_opt_mean,mc_opt_ci_low,mc_opt_ci_high,mc_opt_rel_err_pct,"
           "mc_rl_mean,mc_rl_ci_low,mc_rl_ci_high,mc_rl_rel_err_pct\n";
    for (const eval::CompareRow& r : result.rows) {
        out << format_num(r.x0) << ',' << format_num(r.y0) << ',' << format_num(r.pde) << ','
            << format_num(r.opt_mean) << ',' << format_num(r.opt_lo) << ','
            << format_num(r.opt_hi) << ',' << format_num(r.opt_rel_pct) << ','
            << (r.rl_mean ? format_num(*r.rl_mean) : std::string{}) << ','
            << (r.rl_lo ? format_num(*r.rl_lo) : std::string{}) << ','
            << (r.rl_hi ? format_num(*r.rl_hi) : std::string{}) << ','
            << (r.rl_rel_pct ? format_num(*r.rl_rel_pct) : std::string{}) << '\n';
    }
}

std::string metrics_json_line(const rl::EpochMetrics& m) {
    std::string line = "{\"epoch\":" + std::to_string(m.epoch);
    line += ",\"mean_G\":" + format_num(m.mean_G);
    line += ",\"std_G\":" + format_num(m.std_G);
    line += ",\"mean_entropy\":" + format_num(m.mean_entropy);
    line += ",\"wall_time\":" + format_num(m.wall_time_s);
    line += ",\"ruin_frac\":" + format_num(m.ruin_frac);
    line += "}";
    return line;
}

}  // namespace hawkesdiv::io
