#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hawkesdiv/rng.hpp"

namespace hawkesdiv::nn {

/// Numerically stable softplus log(1 + e^x) and its derivative (logistic).
[[nodiscard]] double softplus(double x);
[[nodiscard]] double softplus_prime(double x);

/**
 * Small fully-connected network: affine layers with rectified-linear hidden
 * activations and an affine output layer.  Parameters live in one flat
 * vector (per layer: weight matrix row-major, then bias), which is what the
 * optimizer, the checkpoints, and the finite-difference tests manipulate.
 *
 * Instances are cheap value types; a trainer mutates its own copy while
 * workers evaluate forward passes on read-only snapshots.
 */
class Mlp {
public:
    /// Scratch space for one forward/backward pair (reusable across calls).
    struct Workspace {
        std::vector<std::vector<double>> act;    ///< act[l]: activations entering layer l
        std::vector<std::vector<double>> pre;    ///< pre[l]: affine outputs of layer l
        std::vector<double> dact;                ///< backward scratch
        std::vector<double> dact_next;
    };

    Mlp() = default;

    /// Builds the given architecture with weights and biases drawn uniformly
    /// from (-1/sqrt(fan_in), 1/sqrt(fan_in)); deterministic in the seed.
    Mlp(std::vector<int> layer_sizes, std::uint64_t seed);

    [[nodiscard]] const std::vector<int>& layer_sizes() const { return sizes_; }
    [[nodiscard]] std::size_t n_params() const { return params_.size(); }
    [[nodiscard]] const std::vector<double>& params() const { return params_; }
    std::vector<double>& params() { return params_; }

    /// Affine-rectify chain; the final layer is affine.  Returns the output.
    std::vector<double> forward(const std::vector<double>& input) const;

    /// Forward pass recording activations for a subsequent backward call.
    /// The output lives in ws.pre.back().
    void forward(const std::vector<double>& input, Workspace& ws) const;

    /**
     * Reverse-mode gradients of  scale * (output . upstream)  with respect to
     * every parameter, accumulated into grad (size n_params).  Requires the
     * workspace of the matching forward pass.
     */
    void backward(const Workspace& ws, const std::vector<double>& upstream, double scale,
                  std::vector<double>& grad) const;

    /// Checkpoint round-trip: JSON with layer sizes and the flat parameter
    /// array, bit-exact for doubles.
    void save(const std::string& path) const;
    static Mlp load(const std::string& path);

private:
    std::vector<int> sizes_;
    std::vector<double> params_;
};

/// Parameters of the two-component Gaussian policy: locations mu1, mu2 and
/// scales sigma1, sigma2 >= sigma_min (after the softplus positivity map).
struct GaussianPolicyHead {
    double mu1 = 0.0;
    double sigma1 = 1.0;
    double mu2 = 0.0;
    double sigma2 = 1.0;
};

/// Maps the network's raw 4-vector (mu1, s1, mu2, s2) to a head with
/// sigma_k = softplus(s_k) + sigma_min.
[[nodiscard]] GaussianPolicyHead head_from_raw(const double* raw4, double sigma_min);

/// Sum of the two univariate normal log-densities at (a1, a2).
[[nodiscard]] double gaussian_log_prob(const GaussianPolicyHead& head, double a1, double a2);

/// Differential entropy: sum_k (1/2) log(2 pi e sigma_k^2).
[[nodiscard]] double gaussian_entropy(const GaussianPolicyHead& head);

/// d log p / d raw-outputs at the sampled pair (chain rule through the
/// positivity map); feeds Mlp::backward as the upstream gradient.
[[nodiscard]] std::array<double, 4> logp_grad_raw(const double* raw4, double sigma_min, double a1,
                                                  double a2);

/// d entropy / d raw-outputs.
[[nodiscard]] std::array<double, 4> entropy_grad_raw(const double* raw4, double sigma_min);

/// First-order ascent stepper: plain SGD or Adam with bias-corrected moments.
struct OptimizerConfig {
    enum class Kind { Adam, Sgd };
    Kind kind = Kind::Adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Optimizer {
public:
    Optimizer(OptimizerConfig cfg, std::size_t n_params);

    /// One maximization step: params += direction(gradient).  Deterministic
    /// given state; throws NumericalError on a non-finite gradient.
    void step(std::vector<double>& params, const std::vector<double>& grad);

private:
    OptimizerConfig cfg_;
    std::vector<double> m_, v_;
    long t_ = 0;
};

}  // namespace hawkesdiv::nn
