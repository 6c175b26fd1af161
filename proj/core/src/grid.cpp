#include "hawkesdiv/grid.hpp"

#include <cmath>

#include "hawkesdiv/errors.hpp"

namespace hawkesdiv {

namespace {

// Smallest integer n with n * step >= span, tolerant of representation noise
// (an exact multiple never gets an extra interval).
int intervals_covering(double span, double step) {
    return static_cast<int>(std::ceil(span / step - 1e-9));
}

}  // namespace

void GridSpec::validate(const ModelParams& p) const {
    if (!(x_min < 0.0) || !(x_max > 0.0))
        throw ConfigError("GridSpec: requires x_min < 0 < x_max");
    if (!(y_max > p.b)) throw ConfigError("GridSpec: requires y_max > b");
    if (n_eta < 1) throw ConfigError("GridSpec: requires n_eta >= 1");
    if (M < 1) throw ConfigError("GridSpec: requires M >= 1");
    if (!(z_max > 0.0)) throw ConfigError("GridSpec: requires z_max > 0");
    const double dy = p.eta > 0.0 ? p.eta / n_eta : (y_max - p.b) / n_eta;
    if (!(y_max > p.b + dy)) throw ConfigError("GridSpec: requires y_max > b + dy");
}

Grid build_grid(const GridSpec& spec, const ModelParams& p) {
    spec.validate(p);

    Grid g;
    g.quad_M = spec.M;
    g.dx = spec.z_max / (spec.M + 0.5);
    if (p.eta > 0.0) {
        g.dy = p.eta / spec.n_eta;
        g.jump_offset = spec.n_eta;
    } else {
        g.dy = (spec.y_max - p.b) / spec.n_eta;
        g.jump_offset = 0;
    }

    g.i0 = intervals_covering(-spec.x_min, g.dx);
    const int n_right = intervals_covering(spec.x_max, g.dx);
    g.nx = g.i0 + n_right;
    g.ny = intervals_covering(spec.y_max - p.b, g.dy);

    g.xs.resize(g.nx + 1);
    for (int i = 0; i <= g.nx; ++i) g.xs[i] = (i - g.i0) * g.dx;
    g.xs[g.i0] = 0.0;

    g.ys.resize(g.ny + 1);
    for (int j = 0; j <= g.ny; ++j) g.ys[j] = p.b + j * g.dy;

    return g;
}

}  // namespace hawkesdiv
