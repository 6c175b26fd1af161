#include "hawkesdiv/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hawkesdiv/errors.hpp"

namespace hawkesdiv {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::string& section,
                         std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ConfigError("config: section '" + section + "' must be a JSON object");
    }
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("config: unknown key '" + section + "." + item.key() + "'");
        }
    }
}

template <typename T>
void read_field(const json& j, const std::string& section, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + section + "." + key + "': " + e.what());
    }
}

void parse_model(const json& j, ModelParams& m) {
    reject_unknown_keys(j, "model", {"a", "b", "eta", "rho", "c", "delta", "claim"});
    read_field(j, "model", "a", m.a);
    read_field(j, "model", "b", m.b);
    read_field(j, "model", "eta", m.eta);
    read_field(j, "model", "rho", m.rho);
    read_field(j, "model", "c", m.c);
    read_field(j, "model", "delta", m.delta);
    if (j.contains("claim")) {
        const json& c = j.at("claim");
        reject_unknown_keys(c, "model.claim", {"kind", "beta"});
        std::string kind = "exponential";
        read_field(c, "model.claim", "kind", kind);
        if (kind != "exponential") {
            throw ConfigError("config: unsupported claim kind '" + kind + "'");
        }
        double beta = m.claim.beta();
        read_field(c, "model.claim", "beta", beta);
        m.claim = ClaimDist::exponential(beta);
    }
}

void parse_grid(const json& j, GridSpec& g) {
    reject_unknown_keys(j, "grid", {"x_min", "x_max", "y_max", "n_eta", "M", "z_max"});
    read_field(j, "grid", "x_min", g.x_min);
    read_field(j, "grid", "x_max", g.x_max);
    read_field(j, "grid", "y_max", g.y_max);
    read_field(j, "grid", "n_eta", g.n_eta);
    read_field(j, "grid", "M", g.M);
    read_field(j, "grid", "z_max", g.z_max);
}

void parse_train(const json& j, rl::TrainConfig& t) {
    reject_unknown_keys(j, "train",
                        {"h", "horizon_T", "batch_size", "epochs", "lr_actor", "lr_critic",
                         "entropy_coef", "anneal_entropy", "sigma_min", "sigma_init", "seed",
                         "x0", "y0", "hidden", "freeze_kappa", "critic_full_returns",
                         "optimizer"});
    read_field(j, "train", "h", t.h);
    read_field(j, "train", "horizon_T", t.horizon_T);
    read_field(j, "train", "batch_size", t.batch_size);
    read_field(j, "train", "epochs", t.epochs);
    read_field(j, "train", "lr_actor", t.lr_actor);
    read_field(j, "train", "lr_critic", t.lr_critic);
    read_field(j, "train", "entropy_coef", t.entropy_coef);
    read_field(j, "train", "anneal_entropy", t.anneal_entropy);
    read_field(j, "train", "sigma_min", t.sigma_min);
    read_field(j, "train", "sigma_init", t.sigma_init);
    read_field(j, "train", "seed", t.seed);
    read_field(j, "train", "x0", t.x0);
    read_field(j, "train", "y0", t.y0);
    read_field(j, "train", "hidden", t.hidden);
    read_field(j, "train", "freeze_kappa", t.freeze_kappa);
    read_field(j, "train", "critic_full_returns", t.critic_full_returns);
    if (j.contains("optimizer")) {
        std::string name;
        read_field(j, "train", "optimizer", name);
        if (name == "adam") {
            t.optimizer = nn::OptimizerConfig::Kind::Adam;
        } else if (name == "sgd") {
            t.optimizer = nn::OptimizerConfig::Kind::Sgd;
        } else {
            throw ConfigError("config: train.optimizer must be 'adam' or 'sgd', got '" + name +
                              "'");
        }
    }
}

void parse_eval(const json& j, EvalConfig& e) {
    reject_unknown_keys(j, "eval",
                        {"n_paths", "seed", "h", "horizon_T", "stochastic_actor", "states"});
    read_field(j, "eval", "n_paths", e.n_paths);
    read_field(j, "eval", "seed", e.seed);
    read_field(j, "eval", "h", e.h);
    read_field(j, "eval", "horizon_T", e.horizon_T);
    read_field(j, "eval", "stochastic_actor", e.stochastic_actor);
    if (j.contains("states")) {
        const json& s = j.at("states");
        if (!s.is_array()) throw ConfigError("config: eval.states must be an array of [x, y]");
        e.states.clear();
        for (const json& pair : s) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
                !pair[1].is_number()) {
                throw ConfigError("config: each eval.states entry must be a numeric pair [x, y]");
            }
            e.states.push_back(State{pair[0].get<double>(), pair[1].get<double>()});
        }
    }
}

}  // namespace

std::vector<State> EvalConfig::default_states() {
    std::vector<State> s;
    for (double x : {0.0, 0.5, 1.0}) {
        for (double y : {2.0, 3.0, 4.0}) s.push_back(State{x, y});
    }
    return s;
}

void EvalConfig::validate(const ModelParams& p) const {
    if (n_paths < 2) throw ConfigError("config: eval.n_paths must be >= 2");
    if (!(h > 0.0)) throw ConfigError("config: eval.h must be positive");
    if (!(horizon_T > 0.0)) throw ConfigError("config: eval.horizon_T must be positive");
    const double ratio = horizon_T / h;
    if (std::fabs(std::llround(ratio) * h - horizon_T) > 1e-9 * horizon_T) {
        throw ConfigError("config: eval.horizon_T must be an integer multiple of eval.h");
    }
    if (states.empty()) throw ConfigError("config: eval.states must not be empty");
    for (const State& s : states) {
        if (s.y < p.b) {
            throw ConfigError("config: eval state intensity below the baseline b");
        }
    }
}

void RunConfig::validate() const {
    model.validate();
    grid.validate(model);
    train.validate();
    eval.validate(model);
    if (train.y0 < model.b) {
        throw ConfigError("config: train.y0 must be >= model.b");
    }
    if (output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    reject_unknown_keys(j, "<top>", {"model", "grid", "train", "eval", "output_dir"});
    RunConfig cfg;
    if (j.contains("model")) parse_model(j.at("model"), cfg.model);
    if (j.contains("grid")) parse_grid(j.at("grid"), cfg.grid);
    if (j.contains("train")) parse_train(j.at("train"), cfg.train);
    if (j.contains("eval")) parse_eval(j.at("eval"), cfg.eval);
    read_field(j, "<top>", "output_dir", cfg.output_dir);
    cfg.validate();
    return cfg;
}

}  // namespace hawkesdiv
