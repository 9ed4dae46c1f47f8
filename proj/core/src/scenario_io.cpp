#include "hyptrack/scenario_io.hpp"

#include "hyptrack/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace hyptrack {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Strict reader over one JSON object: typed lookups, unknown-key rejection.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[nodiscard]] const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    [[nodiscard]] std::string path(const std::string& key) const { return join(path_, key); }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) out = as_number(*v, path(key));
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = find(key)) out = static_cast<int>(as_integer(*v, path(key)));
    }
    void integer(const std::string& key, std::int64_t& out) {
        if (const json* v = find(key)) out = as_integer(*v, path(key));
    }
    void unsigned_integer(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
                throw ConfigError(path(key), "expected a non-negative integer");
            }
            out = v->get<std::uint64_t>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(path(key), "expected a boolean");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.contains(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
        }
    }

    static double as_number(const json& v, const std::string& path) {
        if (!v.is_number()) throw ConfigError(path, "expected a number");
        return v.get<double>();
    }
    static std::int64_t as_integer(const json& v, const std::string& path) {
        if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
        return v.get<std::int64_t>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <int N>
Eigen::Matrix<double, N, 1> read_vector(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != N) throw ConfigError(path, "expected an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) out(i) = ObjectReader::as_number(v[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
    return out;
}

Eigen::Matrix2d read_matrix2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected a 2x2 array");
    Eigen::Matrix2d out;
    for (int i = 0; i < 2; ++i) {
        out.row(i) = read_vector<2>(v[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]").transpose();
    }
    return out;
}

// Re-raises a validation error under a path prefix.
template <typename Fn>
void validate_under(const std::string& prefix, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        const auto colon = what.find(": ");
        const std::string msg = colon == std::string::npos ? what : what.substr(colon + 2);
        throw ConfigError(join(prefix, e.field()), msg);
    }
}

void read_sensor(const json& j, const std::string& path, SensorModel& s) {
    ObjectReader r(j, path);
    if (const json* v = r.find("origin")) s.origin = read_vector<2>(*v, r.path("origin"));
    r.number("boresight_angle", s.boresight_angle);
    r.number("fov_half_angle", s.fov_half_angle);
    r.number("max_range", s.max_range);
    if (const json* v = r.find("r")) s.r = read_matrix2(*v, r.path("r"));
    r.number("p_d", s.p_d);
    r.finish();
}

void read_dynamics(const json& j, const std::string& path, DynamicsConfig& d) {
    ObjectReader r(j, path);
    r.number("mu", d.mu);
    r.number("q", d.q);
    r.integer("integrator_substeps", d.integrator_substeps);
    r.finish();
}

TrackerConfig read_tracker(const json& j, const std::string& path) {
    TrackerConfig cfg;
    ObjectReader r(j, path);
    std::int64_t h_inf = static_cast<std::int64_t>(cfg.h_inf);
    r.integer("h_inf", h_inf);
    if (h_inf < 1) throw ConfigError(r.path("h_inf"), "must be >= 1");
    cfg.h_inf = static_cast<std::size_t>(h_inf);

    std::string text;
    r.string("prune", text = "top_k");
    if (text == "top_k") cfg.prune_strategy = PruneStrategy::top_k;
    else if (text == "sample") cfg.prune_strategy = PruneStrategy::sample;
    else throw ConfigError(r.path("prune"), "expected 'top_k' or 'sample'");

    r.string("mode", text = "mcmc");
    if (text == "mcmc") cfg.mode = TrackerMode::mcmc;
    else if (text == "exhaustive") cfg.mode = TrackerMode::exhaustive;
    else throw ConfigError(r.path("mode"), "expected 'mcmc' or 'exhaustive'");

    r.boolean("adapt_rates", cfg.adapt_rates);
    int threads = static_cast<int>(cfg.threads);
    r.integer("threads", threads);
    if (threads < 0) throw ConfigError(r.path("threads"), "must be >= 0");
    cfg.threads = static_cast<unsigned>(threads);

    if (const json* v = r.find("birth_death")) {
        ObjectReader b(*v, r.path("birth_death"));
        b.number("alpha", cfg.birth_death.alpha);
        b.number("beta", cfg.birth_death.beta);
        b.integer("n_pixels", cfg.birth_death.n_pixels);
        b.string("mode", text = "per_instance");
        if (text == "per_instance") cfg.birth_death.mode = BirthDeathMode::per_instance;
        else if (text == "normalized") cfg.birth_death.mode = BirthDeathMode::normalized;
        else throw ConfigError(b.path("mode"), "expected 'per_instance' or 'normalized'");
        b.finish();
    }
    if (const json* v = r.find("birth")) {
        ObjectReader b(*v, r.path("birth"));
        b.number("velocity_std", cfg.birth.velocity_std);
        b.number("mu", cfg.birth.mu);
        b.boolean("prograde", cfg.birth.prograde);
        b.finish();
    }
    if (const json* v = r.find("sampler")) {
        ObjectReader s(*v, r.path("sampler"));
        if (const json* x = s.find("burn_in_steps"); x && !x->is_null()) {
            cfg.sampler.burn_in_steps = ObjectReader::as_integer(*x, s.path("burn_in_steps"));
        }
        if (const json* x = s.find("record_steps"); x && !x->is_null()) {
            cfg.sampler.record_steps = ObjectReader::as_integer(*x, s.path("record_steps"));
        }
        s.integer("children_kept", cfg.sampler.children_kept);
        s.integer("chains_per_parent", cfg.sampler.chains_per_parent);
        s.unsigned_integer("seed", cfg.sampler.seed);
        s.string("conflict_rule", text = "swap");
        if (text == "swap") cfg.sampler.conflict_rule = ConflictRule::swap;
        else if (text == "to_clutter") cfg.sampler.conflict_rule = ConflictRule::to_clutter;
        else throw ConfigError(s.path("conflict_rule"), "expected 'swap' or 'to_clutter'");
        s.finish();
    }
    if (const json* v = r.find("limit")) {
        ObjectReader l(*v, r.path("limit"));
        l.integer("max_objects", cfg.limit.max_objects);
        l.integer("max_returns", cfg.limit.max_returns);
        l.integer("max_pixels", cfg.limit.max_pixels);
        l.unsigned_integer("max_grandchildren", cfg.limit.max_grandchildren);
        l.finish();
    }
    r.finish();
    validate_under(path, [&] { cfg.validate(); });
    return cfg;
}

json tracker_json(const TrackerConfig& cfg) {
    json sampler = {
        {"children_kept", cfg.sampler.children_kept},
        {"chains_per_parent", cfg.sampler.chains_per_parent},
        {"seed", cfg.sampler.seed},
        {"conflict_rule", cfg.sampler.conflict_rule == ConflictRule::swap ? "swap" : "to_clutter"},
        {"burn_in_steps", cfg.sampler.burn_in_steps ? json(*cfg.sampler.burn_in_steps) : json(nullptr)},
        {"record_steps", cfg.sampler.record_steps ? json(*cfg.sampler.record_steps) : json(nullptr)},
    };
    return {
        {"h_inf", cfg.h_inf},
        {"prune", cfg.prune_strategy == PruneStrategy::top_k ? "top_k" : "sample"},
        {"mode", cfg.mode == TrackerMode::mcmc ? "mcmc" : "exhaustive"},
        {"adapt_rates", cfg.adapt_rates},
        {"threads", cfg.threads},
        {"birth_death",
         {{"alpha", cfg.birth_death.alpha},
          {"beta", cfg.birth_death.beta},
          {"n_pixels", cfg.birth_death.n_pixels},
          {"mode", cfg.birth_death.mode == BirthDeathMode::per_instance ? "per_instance" : "normalized"}}},
        {"birth",
         {{"velocity_std", cfg.birth.velocity_std}, {"mu", cfg.birth.mu}, {"prograde", cfg.birth.prograde}}},
        {"sampler", sampler},
        {"limit",
         {{"max_objects", cfg.limit.max_objects},
          {"max_returns", cfg.limit.max_returns},
          {"max_pixels", cfg.limit.max_pixels},
          {"max_grandchildren", cfg.limit.max_grandchildren}}},
    };
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

ScenarioFile parse_scenario(const std::string& json_text) {
    const json j = parse_text(json_text);
    ScenarioFile file;
    ScenarioConfig& cfg = file.scenario;
    ObjectReader r(j, "");

    int version = kScenarioSchemaVersion;
    r.integer("schema_version", version);
    if (version != kScenarioSchemaVersion) throw ConfigError("schema_version", "unsupported version");

    r.string("name", cfg.name);
    r.unsigned_integer("seed", cfg.seed);
    r.number("duration", cfg.duration);
    r.number("scan_interval", cfg.scan_interval);
    r.number("initial_position_std", cfg.initial_position_std);
    r.number("initial_velocity_std", cfg.initial_velocity_std);

    if (const json* v = r.find("objects")) {
        if (!v->is_array()) throw ConfigError("objects", "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            cfg.objects.push_back(read_vector<4>((*v)[i], "objects[" + std::to_string(i) + "]"));
        }
    }
    if (const json* v = r.find("spawn_events")) {
        if (!v->is_array()) throw ConfigError("spawn_events", "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            SpawnEvent e;
            ObjectReader s((*v)[i], "spawn_events[" + std::to_string(i) + "]");
            s.number("time", e.time);
            s.integer("parent_id", e.parent_id);
            s.integer("fragment_count", e.fragment_count);
            s.number("velocity_std", e.velocity_std);
            s.finish();
            cfg.spawn_events.push_back(e);
        }
    }
    if (const json* v = r.find("sensor")) read_sensor(*v, "sensor", cfg.sensor);
    if (const json* v = r.find("dynamics")) read_dynamics(*v, "dynamics", cfg.dynamics);

    double expected = 0.0;
    std::optional<double> density;
    if (const json* v = r.find("clutter")) {
        ObjectReader c(*v, "clutter");
        c.number("expected_count", expected);
        if (const json* d = c.find("density_value")) density = ObjectReader::as_number(*d, "clutter.density_value");
        c.finish();
    }
    if (const json* v = r.find("tracker")) file.tracker = read_tracker(*v, "tracker");
    r.finish();

    cfg.validate();
    if (density) {
        cfg.clutter.density_value = *density;
        cfg.clutter.expected_count = expected;
    } else {
        cfg.clutter = ClutterModel::uniform(cfg.sensor, expected);
    }
    cfg.clutter.validate();
    return file;
}

std::string scenario_to_json(const ScenarioFile& file) {
    const ScenarioConfig& cfg = file.scenario;
    json objects = json::array();
    for (const auto& s : cfg.objects) objects.push_back({s(0), s(1), s(2), s(3)});
    json spawns = json::array();
    for (const auto& e : cfg.spawn_events) {
        spawns.push_back({{"time", e.time},
                          {"parent_id", e.parent_id},
                          {"fragment_count", e.fragment_count},
                          {"velocity_std", e.velocity_std}});
    }
    const auto& s = cfg.sensor;
    json sensor = {
        {"origin", {s.origin(0), s.origin(1)}},
        {"boresight_angle", s.boresight_angle},
        {"fov_half_angle", s.fov_half_angle},
        {"r", {{s.r(0, 0), s.r(0, 1)}, {s.r(1, 0), s.r(1, 1)}}},
        {"p_d", s.p_d},
    };
    if (std::isfinite(s.max_range)) sensor["max_range"] = s.max_range;
    json j = {
        {"schema_version", kScenarioSchemaVersion},
        {"name", cfg.name},
        {"seed", cfg.seed},
        {"duration", cfg.duration},
        {"scan_interval", cfg.scan_interval},
        {"initial_position_std", cfg.initial_position_std},
        {"initial_velocity_std", cfg.initial_velocity_std},
        {"objects", objects},
        {"spawn_events", spawns},
        {"sensor", sensor},
        {"dynamics",
         {{"mu", cfg.dynamics.mu}, {"q", cfg.dynamics.q}, {"integrator_substeps", cfg.dynamics.integrator_substeps}}},
        {"clutter", {{"expected_count", cfg.clutter.expected_count}, {"density_value", cfg.clutter.density_value}}},
        {"tracker", tracker_json(file.tracker)},
    };
    return j.dump(2) + "\n";
}

TrackerConfig parse_tracker_config(const std::string& json_text) { return read_tracker(parse_text(json_text), ""); }

std::string tracker_config_to_json(const TrackerConfig& cfg) { return tracker_json(cfg).dump(2) + "\n"; }

ScenarioFile load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scenario file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

ScenarioFile load_scenario_or_preset(const std::string& name_or_path) {
    for (const auto& n : preset_names()) {
        if (n == name_or_path) return preset_file(n);
    }
    return load_scenario(name_or_path);
}

ScenarioFile preset_file(const std::string& name) {
    ScenarioFile f;
    f.scenario = preset(name);
    TrackerConfig& t = f.tracker;
    t.h_inf = 10;
    t.sampler.children_kept = 10;
    t.birth_death.n_pixels = 16;
    t.birth_death.alpha = 0.005;
    t.birth_death.beta = 0.01;
    t.birth.velocity_std = 0.05;
    t.threads = 1;
    return f;
}

}  // namespace hyptrack
