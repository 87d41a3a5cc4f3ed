#include "qmarket/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qmarket/market/io.hpp"

namespace qmarket::app {

using nlohmann::json;

namespace {

std::string join(const std::string &path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

/// Reads known keys out of one JSON object and rejects the rest.
class Section {
  public:
    Section(const json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object())
            throw ConfigError(path_, "expected an object");
    }

    void read(const char *key, double &out) {
        if (const json *v = find(key)) {
            if (!v->is_number())
                throw ConfigError(join(path_, key), "expected a number");
            out = v->get<double>();
        }
    }
    void read(const char *key, std::size_t &out) {
        if (const json *v = find(key)) {
            if (!v->is_number_unsigned())
                throw ConfigError(join(path_, key), "expected a non-negative integer");
            out = v->get<std::size_t>();
        }
    }
    void read(const char *key, std::uint64_t &out, int) {
        if (const json *v = find(key)) {
            if (!v->is_number_unsigned())
                throw ConfigError(join(path_, key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void read(const char *key, bool &out) {
        if (const json *v = find(key)) {
            if (!v->is_boolean())
                throw ConfigError(join(path_, key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void read(const char *key, std::string &out) {
        if (const json *v = find(key)) {
            if (v->is_null()) {
                out.clear();
                return;
            }
            if (!v->is_string())
                throw ConfigError(join(path_, key), "expected a string or null");
            out = v->get<std::string>();
        }
    }
    void read(const char *key, std::vector<std::size_t> &out) {
        if (const json *v = find(key)) {
            if (!v->is_array())
                throw ConfigError(join(path_, key), "expected an array of integers");
            out.clear();
            for (const auto &e : *v) {
                if (!e.is_number_unsigned())
                    throw ConfigError(join(path_, key), "expected an array of integers");
                out.push_back(e.get<std::size_t>());
            }
        }
    }
    void read(const char *key, rl::Bounds &out) {
        if (const json *v = find(key)) {
            Section s(*v, join(path_, key));
            s.read("lo", out.lo);
            s.read("hi", out.hi);
            s.finish();
        }
    }
    void read(const char *key, market::MechanismParams &out) {
        if (const json *v = find(key)) {
            Section s(*v, join(path_, key));
            s.read("price_cap", out.price_cap);
            std::string rule(market::to_string(out.settlement));
            s.read("settlement", rule);
            try {
                out.settlement = market::settlement_from_string(rule);
            } catch (const InputError &e) {
                throw ConfigError(join(s.path_, "settlement"), e.what());
            }
            s.read("penalty_coeff", out.penalty_coeff);
            s.finish();
        }
    }

    /// Nested object, or nullptr when absent.
    const json *child(const char *key) { return find(key); }
    const std::string &path() const { return path_; }

    void finish() const {
        for (const auto &[key, _] : obj_.items())
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
                throw ConfigError(join(path_, key), "unknown key");
    }

  private:
    const json *find(const char *key) {
        seen_.emplace_back(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    const json &obj_;
    std::string path_;
    std::vector<std::string> seen_;
};

std::string resolve(const std::string &p, const std::filesystem::path &base) {
    if (p.empty() || base.empty())
        return p;
    std::filesystem::path path(p);
    if (path.is_absolute())
        return p;
    return (base / path).lexically_normal().string();
}

template <class F> void rethrow_as(const std::string &field, F &&f) {
    try {
        f();
    } catch (const ConfigError &) {
        throw;
    } catch (const InputError &e) {
        throw ConfigError(field, e.what());
    }
}

} // namespace

void validate(const ExperimentConfig &c) {
    if (c.days == 0)
        throw ConfigError("days", "must be >= 1");
    const auto &lower = c.lower;
    rethrow_as("agent", [&] { rl::validate(lower.agent); });
    if (!(lower.agent.learning_rate > 0.0))
        throw ConfigError("agent.learning_rate", "must be > 0");
    if (lower.agent.epsilon.decay_steps == 0)
        throw ConfigError("agent.epsilon.decay_steps", "must be >= 1");

    // The agent observation has six features; both backends must accept it.
    if (lower.vqc.n_qubits != 6)
        throw ConfigError("vqc.n_qubits", "must equal the 6 bidding features");
    if (lower.vqc.n_actions != lower.agent.n_actions())
        throw ConfigError("vqc.n_actions", "must equal agent.n_bid_levels + 1");
    rethrow_as("vqc", [&] { qfunc::validate(lower.vqc); });
    if (lower.mlp.n_inputs != 6)
        throw ConfigError("mlp.n_inputs", "must equal the 6 bidding features");
    if (lower.mlp.n_actions != lower.agent.n_actions())
        throw ConfigError("mlp.n_actions", "must equal agent.n_bid_levels + 1");
    rethrow_as("mlp", [&] { qfunc::validate(lower.mlp); });

    if (!(lower.valuation > 0.0) || !std::isfinite(lower.valuation))
        throw ConfigError("lower_level.valuation", "must be a finite number > 0");
    if (!(lower.price_cap_max > 0.0) || !std::isfinite(lower.price_cap_max))
        throw ConfigError("lower_level.price_cap_max", "must be a finite number > 0");

    const auto &s = c.settings;
    const auto &ppo = s.ppo;
    if (!(ppo.penalty.lo >= 0.0 && ppo.penalty.hi <= 1.0 && ppo.penalty.lo < ppo.penalty.hi))
        throw ConfigError("ppo.penalty", "bounds must satisfy 0 <= lo < hi <= 1");
    if (!(ppo.price_cap.lo > 0.0 && ppo.price_cap.lo < ppo.price_cap.hi))
        throw ConfigError("ppo.price_cap", "bounds must satisfy 0 < lo < hi");
    if (ppo.price_cap.hi > lower.price_cap_max)
        throw ConfigError("ppo.price_cap", "hi must not exceed lower_level.price_cap_max");
    rethrow_as("ppo", [&] { rl::validate(ppo); });

    const auto &m = s.initial_mechanism;
    if (!(m.price_cap > 0.0) || m.price_cap > lower.price_cap_max)
        throw ConfigError("initial_mechanism.price_cap",
                          "must be in (0, lower_level.price_cap_max]");
    if (!(m.penalty_coeff >= 0.0 && m.penalty_coeff <= 1.0))
        throw ConfigError("initial_mechanism.penalty_coeff", "must be in [0, 1]");

    rethrow_as("reward_weights", [&] { bilevel::validate(s.weights); });
    rethrow_as("stop_rule", [&] { bilevel::validate(s.stop); });
}

ExperimentConfig parse_config(const json &doc, const std::filesystem::path &base_dir) {
    ExperimentConfig c;
    Section root(doc, "");

    root.read("fleet", c.fleet_path);
    root.read("demand", c.demand_path);
    c.fleet_path = resolve(c.fleet_path, base_dir);
    c.demand_path = resolve(c.demand_path, base_dir);
    root.read("days", c.days);
    root.read("seed", c.settings.seed, 0);
    root.read("write_hourly", c.write_hourly);

    std::string backend(bilevel::to_string(c.lower.backend));
    root.read("backend", backend);
    try {
        c.lower.backend = bilevel::backend_from_string(backend);
    } catch (const InputError &e) {
        throw ConfigError("backend", e.what());
    }

    if (const json *j = root.child("agent")) {
        Section s(*j, "agent");
        auto &a = c.lower.agent;
        s.read("gamma", a.gamma);
        s.read("learning_rate", a.learning_rate);
        if (const json *e = s.child("epsilon")) {
            Section se(*e, "agent.epsilon");
            se.read("start", a.epsilon.start);
            se.read("end", a.epsilon.end);
            se.read("decay_steps", a.epsilon.decay_steps);
            se.finish();
        }
        s.read("replay_capacity", a.replay_capacity);
        s.read("batch_size", a.batch_size);
        s.read("target_sync_period", a.target_sync_period);
        s.read("n_bid_levels", a.n_bid_levels);
        s.read("reward_scale", a.reward_scale);
        s.finish();
    }
    c.lower.vqc.n_actions = c.lower.agent.n_actions();
    c.lower.mlp.n_actions = c.lower.agent.n_actions();

    if (const json *j = root.child("vqc")) {
        Section s(*j, "vqc");
        s.read("n_qubits", c.lower.vqc.n_qubits);
        s.read("n_layers", c.lower.vqc.n_layers);
        s.read("tie_ry_rz", c.lower.vqc.tie_ry_rz);
        s.finish();
        c.lower.vqc.feature_ranges.assign(c.lower.vqc.n_qubits, qfunc::FeatureRange{});
    }
    if (const json *j = root.child("mlp")) {
        Section s(*j, "mlp");
        s.read("n_inputs", c.lower.mlp.n_inputs);
        s.read("hidden", c.lower.mlp.hidden);
        s.finish();
    }
    if (const json *j = root.child("lower_level")) {
        Section s(*j, "lower_level");
        s.read("valuation", c.lower.valuation);
        s.read("price_cap_max", c.lower.price_cap_max);
        s.read("warm_start", c.lower.warm_start);
        s.finish();
    }
    if (const json *j = root.child("ppo")) {
        Section s(*j, "ppo");
        auto &p = c.settings.ppo;
        s.read("clip", p.clip);
        s.read("entropy_coeff", p.entropy_coeff);
        s.read("c1", p.c1);
        s.read("c2", p.c2);
        s.read("gamma", p.gamma);
        s.read("actor_lr", p.actor_lr);
        s.read("critic_lr", p.critic_lr);
        s.read("epochs", p.epochs);
        s.read("minibatch_size", p.minibatch_size);
        s.read("hidden", p.hidden);
        s.read("price_cap", p.price_cap);
        s.read("penalty", p.penalty);
        s.read("init_log_std_pc", p.init_log_std_pc);
        s.read("init_log_std_penalty", p.init_log_std_penalty);
        s.finish();
    }
    if (const json *j = root.child("reward_weights")) {
        Section s(*j, "reward_weights");
        s.read("w1", c.settings.weights.w1);
        s.read("w2", c.settings.weights.w2);
        s.read("sw_normalizer", c.settings.weights.sw_normalizer);
        s.finish();
    }
    if (const json *j = root.child("stop_rule")) {
        Section s(*j, "stop_rule");
        s.read("threshold", c.settings.stop.threshold);
        s.read("window", c.settings.stop.window);
        s.read("max_steps", c.settings.stop.max_steps);
        s.finish();
    }
    root.read("initial_mechanism", c.settings.initial_mechanism);
    root.finish();

    validate(c);
    return c;
}

ExperimentConfig parse_config_text(std::string_view text, const std::filesystem::path &base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        // Translate the byte offset into a line/column pair and quote the line.
        const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const std::size_t line_start = text.rfind('\n', pos == 0 ? 0 : pos - 1);
        const std::size_t begin = line_start == std::string_view::npos ? 0 : line_start + 1;
        const std::size_t line =
            1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + begin, '\n'));
        std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos)
            end = text.size();
        std::ostringstream msg;
        msg << "parse error at line " << line << ", column " << (pos - begin + 1) << ": "
            << e.what() << "\n  | " << text.substr(begin, end - begin);
        throw ConfigError("", msg.str());
    }
    return parse_config(doc, base_dir);
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("", "cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.parent_path());
}

json config_to_json(const ExperimentConfig &c) {
    const auto &a = c.lower.agent;
    const auto &p = c.settings.ppo;
    auto bounds = [](const rl::Bounds &b) { return json{{"lo", b.lo}, {"hi", b.hi}}; };
    auto nullable = [](const std::string &s) { return s.empty() ? json(nullptr) : json(s); };
    return json{
        {"fleet", nullable(c.fleet_path)},
        {"demand", nullable(c.demand_path)},
        {"days", c.days},
        {"seed", c.settings.seed},
        {"write_hourly", c.write_hourly},
        {"backend", bilevel::to_string(c.lower.backend)},
        {"agent",
         {{"gamma", a.gamma},
          {"learning_rate", a.learning_rate},
          {"epsilon",
           {{"start", a.epsilon.start},
            {"end", a.epsilon.end},
            {"decay_steps", a.epsilon.decay_steps}}},
          {"replay_capacity", a.replay_capacity},
          {"batch_size", a.batch_size},
          {"target_sync_period", a.target_sync_period},
          {"n_bid_levels", a.n_bid_levels},
          {"reward_scale", a.reward_scale}}},
        {"vqc",
         {{"n_qubits", c.lower.vqc.n_qubits},
          {"n_layers", c.lower.vqc.n_layers},
          {"tie_ry_rz", c.lower.vqc.tie_ry_rz}}},
        {"mlp", {{"n_inputs", c.lower.mlp.n_inputs}, {"hidden", c.lower.mlp.hidden}}},
        {"lower_level",
         {{"valuation", c.lower.valuation},
          {"price_cap_max", c.lower.price_cap_max},
          {"warm_start", c.lower.warm_start}}},
        {"ppo",
         {{"clip", p.clip},
          {"entropy_coeff", p.entropy_coeff},
          {"c1", p.c1},
          {"c2", p.c2},
          {"gamma", p.gamma},
          {"actor_lr", p.actor_lr},
          {"critic_lr", p.critic_lr},
          {"epochs", p.epochs},
          {"minibatch_size", p.minibatch_size},
          {"hidden", p.hidden},
          {"price_cap", bounds(p.price_cap)},
          {"penalty", bounds(p.penalty)},
          {"init_log_std_pc", p.init_log_std_pc},
          {"init_log_std_penalty", p.init_log_std_penalty}}},
        {"reward_weights",
         {{"w1", c.settings.weights.w1},
          {"w2", c.settings.weights.w2},
          {"sw_normalizer", c.settings.weights.sw_normalizer}}},
        {"stop_rule",
         {{"threshold", c.settings.stop.threshold},
          {"window", c.settings.stop.window},
          {"max_steps", c.settings.stop.max_steps}}},
        {"initial_mechanism", c.settings.initial_mechanism},
    };
}

void apply_smoke(ExperimentConfig &config) {
    config.days = std::min<std::size_t>(config.days, 2);
    config.settings.stop.max_steps = std::min<std::size_t>(config.settings.stop.max_steps, 2);
}

Scenario load_scenario(const ExperimentConfig &config) {
    Scenario s;
    try {
        s.fleet = config.fleet_path.empty() ? bilevel::default_fleet()
                                            : market::load_fleet(config.fleet_path);
    } catch (const InputError &e) {
        throw ConfigError("fleet", e.what());
    }
    try {
        if (config.demand_path.empty()) {
            s.demand = bilevel::default_demand(s.fleet, config.days);
        } else {
            auto profile = bilevel::load_demand_csv(config.demand_path);
            if (profile.days() < config.days)
                throw InputError("demand profile '" + config.demand_path + "' has " +
                                 std::to_string(profile.days()) + " days, config needs " +
                                 std::to_string(config.days));
            s.demand = profile.truncated(config.days);
        }
    } catch (const ConfigError &) {
        throw;
    } catch (const InputError &e) {
        throw ConfigError("demand", e.what());
    }
    return s;
}

} // namespace qmarket::app
