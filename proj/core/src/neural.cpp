#include "hawkesdiv/neural.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hawkesdiv/errors.hpp"

namespace hawkesdiv::nn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // (1/2) log(2 pi)

/// Offset of layer l's weight block in the flat parameter vector.
std::size_t layer_offset(const std::vector<int>& sizes, std::size_t l) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < l; ++k) {
        off += static_cast<std::size_t>(sizes[k]) * sizes[k + 1] + sizes[k + 1];
    }
    return off;
}

}  // namespace

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double softplus_prime(double x) {
    if (x > 30.0) return 1.0;
    if (x < -30.0) return std::exp(x);
    return 1.0 / (1.0 + std::exp(-x));
}

Mlp::Mlp(std::vector<int> layer_sizes, std::uint64_t seed) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) {
        throw std::invalid_argument("Mlp: need at least an input and an output layer");
    }
    for (int s : sizes_) {
        if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
    }
    params_.resize(layer_offset(sizes_, sizes_.size() - 1));
    RngStream rng(seed, 0);
    std::size_t p = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        const std::size_t n = static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
        for (std::size_t k = 0; k < n; ++k) {
            params_[p++] = (2.0 * rng.uniform() - 1.0) * bound;
        }
    }
}

std::vector<double> Mlp::forward(const std::vector<double>& input) const {
    Workspace ws;
    forward(input, ws);
    return ws.pre.back();
}

void Mlp::forward(const std::vector<double>& input, Workspace& ws) const {
    const std::size_t n_layers = sizes_.size() - 1;
    if (input.size() != static_cast<std::size_t>(sizes_.front())) {
        throw std::invalid_argument("Mlp::forward: input size mismatch");
    }
    ws.act.resize(n_layers);
    ws.pre.resize(n_layers);
    const double* x = input.data();
    std::size_t x_len = input.size();
    std::size_t p = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        ws.act[l].assign(x, x + x_len);
        ws.pre[l].resize(out);
        const double* W = params_.data() + p;
        const double* b = W + static_cast<std::size_t>(in) * out;
        for (int o = 0; o < out; ++o) {
            const double* row = W + static_cast<std::size_t>(o) * in;
            double s = b[o];
            for (int i = 0; i < in; ++i) s += row[i] * x[i];
            ws.pre[l][o] = s;
        }
        if (l + 1 < n_layers) {
            for (double& v : ws.pre[l]) v = v > 0.0 ? v : 0.0;  // rectify in place
        }
        x = ws.pre[l].data();
        x_len = ws.pre[l].size();
        p += static_cast<std::size_t>(in) * out + out;
    }
}

void Mlp::backward(const Workspace& ws, const std::vector<double>& upstream, double scale,
                   std::vector<double>& grad) const {
    const std::size_t n_layers = sizes_.size() - 1;
    if (grad.size() != params_.size()) {
        throw std::invalid_argument("Mlp::backward: gradient buffer size mismatch");
    }
    if (upstream.size() != static_cast<std::size_t>(sizes_.back())) {
        throw std::invalid_argument("Mlp::backward: upstream size mismatch");
    }
    auto& d = const_cast<Workspace&>(ws).dact;
    auto& d_next = const_cast<Workspace&>(ws).dact_next;
    d.assign(upstream.begin(), upstream.end());
    for (double& v : d) v *= scale;
    for (std::size_t l = n_layers; l-- > 0;) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        const std::size_t p = layer_offset(sizes_, l);
        const double* W = params_.data() + p;
        const double* x = ws.act[l].data();
        double* gW = grad.data() + p;
        double* gb = gW + static_cast<std::size_t>(in) * out;
        // Hidden layers were rectified in place, so ws.pre[l][o] == 0 exactly
        // where the unit was clamped; the affine output layer passes through.
        d_next.assign(in, 0.0);
        for (int o = 0; o < out; ++o) {
            double dz = d[o];
            if (l + 1 < n_layers && ws.pre[l][o] <= 0.0) dz = 0.0;
            if (dz == 0.0) continue;
            gb[o] += dz;
            const double* row = W + static_cast<std::size_t>(o) * in;
            double* grow = gW + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) {
                grow[i] += dz * x[i];
                d_next[i] += dz * row[i];
            }
        }
        std::swap(d, d_next);
    }
}

void Mlp::save(const std::string& path) const {
    nlohmann::json j;
    j["layer_sizes"] = sizes_;
    j["params"] = params_;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Mlp::save: cannot open " + path);
    out << j.dump(2) << "\n";
}

Mlp Mlp::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("Mlp::load: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("Mlp::load: invalid JSON in " + path + ": " + e.what());
    }
    Mlp net;
    try {
        net.sizes_ = j.at("layer_sizes").get<std::vector<int>>();
        net.params_ = j.at("params").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("Mlp::load: malformed checkpoint " + path + ": " + e.what());
    }
    if (net.sizes_.size() < 2 || net.params_.size() != layer_offset(net.sizes_, net.sizes_.size() - 1)) {
        throw ConfigError("Mlp::load: checkpoint shape mismatch in " + path);
    }
    return net;
}

GaussianPolicyHead head_from_raw(const double* raw4, double sigma_min) {
    GaussianPolicyHead h;
    h.mu1 = raw4[0];
    h.sigma1 = softplus(raw4[1]) + sigma_min;
    h.mu2 = raw4[2];
    h.sigma2 = softplus(raw4[3]) + sigma_min;
    return h;
}

double gaussian_log_prob(const GaussianPolicyHead& head, double a1, double a2) {
    const double z1 = (a1 - head.mu1) / head.sigma1;
    const double z2 = (a2 - head.mu2) / head.sigma2;
    return -0.5 * (z1 * z1 + z2 * z2) - std::log(head.sigma1) - std::log(head.sigma2) -
           2.0 * kHalfLog2Pi;
}

double gaussian_entropy(const GaussianPolicyHead& head) {
    return 1.0 + 2.0 * kHalfLog2Pi + std::log(head.sigma1) + std::log(head.sigma2);
}

std::array<double, 4> logp_grad_raw(const double* raw4, double sigma_min, double a1, double a2) {
    const GaussianPolicyHead h = head_from_raw(raw4, sigma_min);
    const double z1 = (a1 - h.mu1) / h.sigma1;
    const double z2 = (a2 - h.mu2) / h.sigma2;
    // d logp / d sigma = (z^2 - 1) / sigma, then through softplus.
    return {z1 / h.sigma1, (z1 * z1 - 1.0) / h.sigma1 * softplus_prime(raw4[1]), z2 / h.sigma2,
            (z2 * z2 - 1.0) / h.sigma2 * softplus_prime(raw4[3])};
}

std::array<double, 4> entropy_grad_raw(const double* raw4, double sigma_min) {
    const GaussianPolicyHead h = head_from_raw(raw4, sigma_min);
    return {0.0, softplus_prime(raw4[1]) / h.sigma1, 0.0, softplus_prime(raw4[3]) / h.sigma2};
}

Optimizer::Optimizer(OptimizerConfig cfg, std::size_t n_params) : cfg_(cfg) {
    if (cfg_.kind == OptimizerConfig::Kind::Adam) {
        m_.assign(n_params, 0.0);
        v_.assign(n_params, 0.0);
    }
}

void Optimizer::step(std::vector<double>& params, const std::vector<double>& grad) {
    if (params.size() != grad.size()) {
        throw std::invalid_argument("Optimizer::step: size mismatch");
    }
    for (double g : grad) {
        if (!std::isfinite(g)) {
            throw NumericalError("Optimizer::step: non-finite gradient component");
        }
    }
    if (cfg_.kind == OptimizerConfig::Kind::Sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] += cfg_.lr * grad[i];
        return;
    }
    if (m_.size() != params.size()) {
        throw std::invalid_argument("Optimizer::step: optimizer built for a different model size");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
        params[i] += cfg_.lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + cfg_.eps);
    }
}

}  // namespace hawkesdiv::nn
