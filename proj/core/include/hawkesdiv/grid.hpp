#pragma once

#include <vector>

#include "hawkesdiv/model.hpp"

namespace hawkesdiv {

/**
 * Requested computational domain and mesh resolution.
 *
 * The mesh is tied to the model: dy = eta / n_eta so that an excitation jump
 * moves exactly n_eta rows, and dx = z_max / (M + 1/2) so that the M + 1
 * midpoints (m + 1/2) dx of the claim quadrature tile [0, z_max] exactly.
 * x_min / x_max / y_max are adjusted outward to the nearest node.
 */
struct GridSpec {
    double x_min = -5.0;  ///< left surplus bound (< 0)
    double x_max = 4.0;   ///< right surplus bound (> 0)
    double y_max = 25.0;  ///< intensity truncation (> b)
    int n_eta = 8;        ///< mesh steps per excitation jump (>= 1)
    int M = 80;           ///< claim-quadrature intervals (>= 1)
    double z_max = 5.0;   ///< claim-support truncation (> 0)

    /// Throws ConfigError on an invalid specification.
    void validate(const ModelParams& p) const;
};

/**
 * Realized mesh.  Node coordinates are xs[i] = (i - i0) dx (so xs[i0] == 0
 * exactly) and ys[j] = b + j dy.  nx and ny are the largest node indices
 * (interval counts); xs.size() == nx + 1, ys.size() == ny + 1.
 *
 * jump_offset is the row displacement of one excitation jump: n_eta when
 * eta > 0.  The degenerate case eta == 0 keeps a usable mesh by taking
 * dy = (y_max - b) / n_eta and jump_offset = 0.
 */
struct Grid {
    double dx = 0.0;
    double dy = 0.0;
    std::vector<double> xs;
    std::vector<double> ys;
    int i0 = 0;           ///< index of the surplus-zero column
    int nx = 0;           ///< last x index
    int ny = 0;           ///< last y index
    int jump_offset = 0;  ///< rows per excitation jump
    int quad_M = 0;       ///< claim-quadrature intervals (midpoints quad_M + 1)

    /// Row index reached by one excitation jump from row j, clamped to the top.
    [[nodiscard]] int jump_row(int j) const { return j + jump_offset > ny ? ny : j + jump_offset; }
};

/// Builds the mesh for the given spec; reports effective bounds via Grid.
[[nodiscard]] Grid build_grid(const GridSpec& spec, const ModelParams& p);

}  // namespace hawkesdiv
