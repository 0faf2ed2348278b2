#include "beamsim/config.hpp"

#include <fstream>
#include <set>

namespace beamsim {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object, remembering which were consumed so that
// leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    std::string key_path(const std::string& key) const { return path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json* take(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) {
                throw ConfigError(key_path(key), "expected a number");
            }
            out = v->get<double>();
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) {
                throw ConfigError(key_path(key), "expected an integer");
            }
            if constexpr (std::is_unsigned_v<Int>) {
                if (!v->is_number_unsigned()) {
                    throw ConfigError(key_path(key), "expected a non-negative integer");
                }
            }
            out = v->get<Int>();
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) {
                throw ConfigError(key_path(key), "expected true or false");
            }
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) {
                throw ConfigError(key_path(key), "expected a string");
            }
            out = v->get<std::string>();
        }
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.contains(item.key())) {
                throw ConfigError(key_path(item.key()), "unknown key");
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& message) {
    if (!ok) {
        throw ConfigError(path, message);
    }
}

std::optional<ScenarioKind> scenario_kind_from_string(const std::string& s) {
    for (ScenarioKind k : {ScenarioKind::static_channel, ScenarioKind::noisy, ScenarioKind::churn,
                           ScenarioKind::time_varying}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    return std::nullopt;
}

ScenarioSpec parse_scenario(const json& j) {
    ObjectReader r(j, ".scenario");
    ScenarioSpec s;
    std::string kind = "static";
    r.string("kind", kind);
    const auto parsed = scenario_kind_from_string(kind);
    require(parsed.has_value(), r.key_path("kind"),
            "must be one of static, noisy, churn, time_varying");
    s.kind = *parsed;

    r.boolean("rayleigh", s.rayleigh);
    r.number("equal_gain_value", s.equal_gain_value);
    if (r.has("noise_power_db")) {
        double db = 0.0;
        r.number("noise_power_db", db);
        s.noise_power_db = db;
    }
    r.number("p_add", s.p_add);
    r.number("p_remove", s.p_remove);
    r.number("sigma_xi", s.sigma_xi);
    r.integer("n_nodes_initial", s.n_nodes_initial);
    r.number("tx_power", s.tx_power);
    r.finish();

    require(s.p_add >= 0.0 && s.p_add <= 1.0, r.key_path("p_add"), "must be in [0, 1]");
    require(s.p_remove >= 0.0 && s.p_remove <= 1.0, r.key_path("p_remove"), "must be in [0, 1]");
    require(s.sigma_xi >= 0.0, r.key_path("sigma_xi"), "must be >= 0");
    require(s.n_nodes_initial >= 1, r.key_path("n_nodes_initial"), "must be >= 1");
    require(s.tx_power > 0.0, r.key_path("tx_power"), "must be > 0");
    require(s.rayleigh || s.equal_gain_value > 0.0, r.key_path("equal_gain_value"), "must be > 0");
    if (s.noise_power_db) {
        require(std::isfinite(*s.noise_power_db), r.key_path("noise_power_db"), "must be finite");
    }

    const std::string used_by = "not used by scenario kind '" + kind + "'";
    if (s.kind != ScenarioKind::noisy) {
        require(!s.noise_power_db, r.key_path("noise_power_db"), used_by);
    } else {
        require(s.noise_power_db.has_value(), r.key_path("noise_power_db"),
                "required for scenario kind 'noisy'");
    }
    if (s.kind != ScenarioKind::churn) {
        require(s.p_add == 0.0, r.key_path("p_add"), used_by);
        require(s.p_remove == 0.0, r.key_path("p_remove"), used_by);
    }
    if (s.kind != ScenarioKind::time_varying) {
        require(s.sigma_xi == 0.0, r.key_path("sigma_xi"), used_by);
    }
    return s;
}

FeedbackResolution parse_feedback(const json& j) {
    ObjectReader r(j, ".feedback");
    FeedbackResolution out;
    if (const json* bits = r.take("bits")) {
        if (bits->is_string()) {
            require(bits->get<std::string>() == "exact", r.key_path("bits"),
                    "expected an integer or \"exact\"");
        } else {
            require(bits->is_number_integer(), r.key_path("bits"),
                    "expected an integer or \"exact\"");
            const auto k = bits->get<std::int64_t>();
            require(k >= 1 && k <= 30, r.key_path("bits"), "must be in [1, 30]");
            out.bits = static_cast<int>(k);
        }
    }
    r.finish();
    return out;
}

void parse_algorithm_params(const json& j, AlgorithmParams& p) {
    ObjectReader r(j, ".algorithm_params");
    if (const json* v = r.take("dbsa")) {
        ObjectReader d(*v, ".algorithm_params.dbsa");
        d.number("alpha_init", p.dbsa.alpha_init);
        d.number("alpha_min", p.dbsa.alpha_min);
        d.finish();
        require(p.dbsa.alpha_init > 0.0 && p.dbsa.alpha_init <= kPi, d.key_path("alpha_init"),
                "must be in (0, pi]");
        require(p.dbsa.alpha_min > 0.0, d.key_path("alpha_min"), "must be > 0");
    }
    if (const json* v = r.take("dqesa")) {
        ObjectReader d(*v, ".algorithm_params.dqesa");
        std::string mode(to_string(p.dqesa.sign_mode));
        d.string("sign_mode", mode);
        const auto parsed = sign_mode_from_string(mode);
        require(parsed.has_value(), d.key_path("sign_mode"),
                "must be one of probe, optimistic, deferred");
        p.dqesa.sign_mode = *parsed;
        d.number("dead_zone_factor", p.dqesa.dead_zone_factor);
        d.number("exact_dead_zone", p.dqesa.exact_dead_zone);
        d.finish();
        require(p.dqesa.dead_zone_factor >= 0.0, d.key_path("dead_zone_factor"), "must be >= 0");
        require(p.dqesa.exact_dead_zone >= 0.0, d.key_path("exact_dead_zone"), "must be >= 0");
    }
    if (const json* v = r.take("biorarsa2")) {
        ObjectReader d(*v, ".algorithm_params.biorarsa2");
        BiorarsaParams& b = p.biorarsa;
        d.number("delta0", b.delta0);
        d.integer("trials_per_block", b.trials_per_block);
        d.integer("swim_limit", b.swim_limit);
        d.integer("failure_limit", b.failure_limit);
        d.number("delta_reset", b.delta_reset);
        d.number("rho", b.rho);
        d.number("rho_reset", b.rho_reset);
        d.number("delta_max", b.delta_max);
        d.finish();
        require(b.delta0 > 0.0, d.key_path("delta0"), "must be > 0");
        require(b.trials_per_block >= 1, d.key_path("trials_per_block"), "must be >= 1");
        require(b.swim_limit >= 1, d.key_path("swim_limit"), "must be >= 1");
        require(b.failure_limit >= 0, d.key_path("failure_limit"), "must be >= 0");
        require(b.delta_reset > 0.0, d.key_path("delta_reset"), "must be > 0");
        require(b.rho > 0.0, d.key_path("rho"), "must be > 0");
        require(b.rho_reset > 0.0 && b.rho_reset <= 1.0, d.key_path("rho_reset"), "must be in (0, 1]");
        require(b.delta_max > 0.0, d.key_path("delta_max"), "must be > 0");
    }
    if (const json* v = r.take("one_bit_random")) {
        ObjectReader d(*v, ".algorithm_params.one_bit_random");
        d.number("delta0", p.one_bit.delta0);
        d.finish();
        require(p.one_bit.delta0 > 0.0, d.key_path("delta0"), "must be > 0");
    }
    r.finish();
}

std::string default_series_name(const AlgorithmParams& a) {
    std::string name(to_string(a.kind));
    switch (a.kind) {
    case AlgorithmKind::dqesa:
    case AlgorithmKind::dqesa_e:
    case AlgorithmKind::hybrid:
        return name + "_" + a.feedback.label();
    default:
        return name;
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    require(n_trials >= 1, ".n_trials", "must be >= 1");
    require(slot_budget >= 1, ".slot_budget", "must be >= 1");
    try {
        scenario.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(".scenario", e.what());
    }
}

ExperimentConfig parse_experiment(const json& j) {
    ObjectReader r(j, "");
    ExperimentConfig c;
    if (const json* v = r.take("algorithm")) {
        require(v->is_string(), ".algorithm", "expected a string");
        const auto kind = algorithm_from_string(v->get<std::string>());
        require(kind.has_value(), ".algorithm",
                "must be one of dbsa, dqesa, dqesa_e, hybrid, one_bit_random, biorarsa2");
        c.algorithm.kind = *kind;
    } else {
        throw ConfigError(".algorithm", "required");
    }
    if (const json* v = r.take("scenario")) {
        c.scenario = parse_scenario(*v);
    } else {
        throw ConfigError(".scenario", "required");
    }
    if (const json* v = r.take("feedback")) {
        c.algorithm.feedback = parse_feedback(*v);
    }
    if (const json* v = r.take("algorithm_params")) {
        parse_algorithm_params(*v, c.algorithm);
    }
    r.integer("n_trials", c.n_trials);
    r.integer("slot_budget", c.slot_budget);
    r.integer("master_seed", c.master_seed);
    r.string("output_dir", c.output_dir);
    r.string("series_name", c.series_name);
    r.finish();
    c.algorithm.dqesa.feedback = c.algorithm.feedback;
    if (c.series_name.empty()) {
        c.series_name = default_series_name(c.algorithm);
    }
    c.validate();
    return c;
}

ConfigFile parse_config_file(const json& j) {
    ConfigFile file;
    if (!j.is_object() || !j.contains("preset")) {
        file.series.push_back(parse_experiment(j));
        return file;
    }
    ObjectReader r(j, "");
    r.string("preset", file.preset);
    r.string("description", file.description);
    json common = json::object();
    if (const json* v = r.take("common")) {
        require(v->is_object(), ".common", "expected an object");
        common = *v;
    }
    const json* series = r.take("series");
    require(series && series->is_array() && !series->empty(), ".series",
            "expected a non-empty array");
    r.finish();
    for (std::size_t i = 0; i < series->size(); ++i) {
        json merged = common;
        merged.merge_patch((*series)[i]);
        try {
            file.series.push_back(parse_experiment(merged));
        } catch (const ConfigError& e) {
            throw ConfigError(".series[" + std::to_string(i) + "]" + e.path(), e.message());
        }
        for (std::size_t k = 0; k < i; ++k) {
            const ExperimentConfig& a = file.series[k];
            const ExperimentConfig& b = file.series[i];
            require(a.output_dir != b.output_dir || a.series_name != b.series_name,
                    ".series[" + std::to_string(i) + "].series_name",
                    "duplicates series " + std::to_string(k) + " (both would write the same directory)");
        }
    }
    return file;
}

ConfigFile load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "malformed JSON in " + path.string() + ": " + e.what());
    }
    return parse_config_file(j);
}

json to_json(const ExperimentConfig& c) {
    const AlgorithmParams& a = c.algorithm;
    json scenario{
        {"kind", to_string(c.scenario.kind)},
        {"rayleigh", c.scenario.rayleigh},
        {"equal_gain_value", c.scenario.equal_gain_value},
        {"p_add", c.scenario.p_add},
        {"p_remove", c.scenario.p_remove},
        {"sigma_xi", c.scenario.sigma_xi},
        {"n_nodes_initial", c.scenario.n_nodes_initial},
        {"tx_power", c.scenario.tx_power},
    };
    if (c.scenario.noise_power_db) {
        scenario["noise_power_db"] = *c.scenario.noise_power_db;
    }
    json feedback;
    if (a.feedback.bits) {
        feedback["bits"] = *a.feedback.bits;
    } else {
        feedback["bits"] = "exact";
    }
    json params{
        {"dbsa", {{"alpha_init", a.dbsa.alpha_init}, {"alpha_min", a.dbsa.alpha_min}}},
        {"dqesa",
         {{"sign_mode", to_string(a.dqesa.sign_mode)},
          {"dead_zone_factor", a.dqesa.dead_zone_factor},
          {"exact_dead_zone", a.dqesa.exact_dead_zone}}},
        {"biorarsa2",
         {{"delta0", a.biorarsa.delta0},
          {"trials_per_block", a.biorarsa.trials_per_block},
          {"swim_limit", a.biorarsa.swim_limit},
          {"failure_limit", a.biorarsa.failure_limit},
          {"delta_reset", a.biorarsa.delta_reset},
          {"rho", a.biorarsa.rho},
          {"rho_reset", a.biorarsa.rho_reset},
          {"delta_max", a.biorarsa.delta_max}}},
        {"one_bit_random", {{"delta0", a.one_bit.delta0}}},
    };
    return json{
        {"algorithm", to_string(a.kind)},
        {"feedback", feedback},
        {"scenario", scenario},
        {"n_trials", c.n_trials},
        {"slot_budget", c.slot_budget},
        {"master_seed", c.master_seed},
        {"algorithm_params", params},
        {"output_dir", c.output_dir},
        {"series_name", c.series_name},
    };
}

}  // namespace beamsim
