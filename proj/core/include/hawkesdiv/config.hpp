#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hawkesdiv/grid.hpp"
#include "hawkesdiv/model.hpp"
#include "hawkesdiv/rl.hpp"

namespace hawkesdiv {

/// Monte Carlo evaluation settings (the `eval` config section).
struct EvalConfig {
    int n_paths = 4096;
    std::uint64_t seed = 1234;
    double h = 1.0 / 50.0;
    double horizon_T = 50.0;
    bool stochastic_actor = false;  ///< sample the learned policy instead of using means
    /// Initial states; defaults to the benchmark nine
    /// x in {0, 0.5, 1} x y in {2, 3, 4}.
    std::vector<State> states = default_states();

    [[nodiscard]] static std::vector<State> default_states();
    /// Throws ConfigError on invalid settings (needs the model for y >= b).
    void validate(const ModelParams& p) const;
};

/**
 * One JSON document with sections model / grid / train / eval plus
 * output_dir.  Every field is optional (defaults above and in the section
 * types); unknown keys are rejected with the offending path in the message.
 */
struct RunConfig {
    ModelParams model;
    GridSpec grid;
    rl::TrainConfig train;
    EvalConfig eval;
    std::string output_dir = "out";

    /// Cross-validates all sections; throws ConfigError.
    void validate() const;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
};

}  // namespace hawkesdiv
