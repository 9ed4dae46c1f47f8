#include "hyptrack/simulator.hpp"

#include "hyptrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hyptrack {

namespace {

std::vector<TruthObject> propagate_all(std::vector<TruthObject> objects, double dt, const ScenarioConfig& cfg) {
    if (dt <= 0.0) return objects;
    DynamicsConfig d = cfg.dynamics;
    d.dt = dt;
    d.integrator_substeps = std::max(
        1, static_cast<int>(std::ceil(cfg.dynamics.integrator_substeps * dt / cfg.scan_interval - 1e-9)));
    for (auto& o : objects) o.state = propagate_state(o.state, d);
    return objects;
}

}  // namespace

void ScenarioConfig::validate() const {
    sensor.validate();
    clutter.validate();
    dynamics.validate();
    if (!(scan_interval > 0.0)) throw ConfigError("scan_interval", "must be > 0");
    if (!(duration > 0.0)) throw ConfigError("duration", "must be > 0");
    if (!(initial_position_std >= 0.0)) throw ConfigError("initial_position_std", "must be >= 0");
    if (!(initial_velocity_std >= 0.0)) throw ConfigError("initial_velocity_std", "must be >= 0");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (!objects[i].allFinite()) throw ConfigError("objects[" + std::to_string(i) + "]", "must be finite");
    }
    for (std::size_t i = 0; i < spawn_events.size(); ++i) {
        const auto& s = spawn_events[i];
        const std::string path = "spawn_events[" + std::to_string(i) + "]";
        if (!(s.time > 0.0 && s.time <= duration)) throw ConfigError(path + ".time", "must lie in (0, duration]");
        if (s.fragment_count < 2) throw ConfigError(path + ".fragment_count", "must be >= 2");
        if (!(s.velocity_std >= 0.0)) throw ConfigError(path + ".velocity_std", "must be >= 0");
        if (s.parent_id < 0) throw ConfigError(path + ".parent_id", "must be >= 0");
    }
}

std::size_t ScenarioConfig::num_scans() const {
    return static_cast<std::size_t>(std::floor(duration / scan_interval + 1e-9));
}

StateVector circular_state(double radius, double phase, double mu) {
    const double speed = std::sqrt(mu / radius);
    StateVector s;
    s << radius * std::cos(phase), radius * std::sin(phase), -speed * std::sin(phase), speed * std::cos(phase);
    return s;
}

TruthHistory generate_truth(const ScenarioConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0x7275746Full));

    std::vector<SpawnEvent> spawns = cfg.spawn_events;
    std::stable_sort(spawns.begin(), spawns.end(), [](const auto& a, const auto& b) { return a.time < b.time; });

    std::vector<TruthObject> objects;
    for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
        objects.push_back({static_cast<std::int64_t>(i), cfg.objects[i]});
    }
    std::int64_t next_id = static_cast<std::int64_t>(cfg.objects.size());

    TruthHistory history;
    history.push_back({0.0, objects});
    std::size_t next_spawn = 0;
    double t = 0.0;
    const std::size_t scans = cfg.num_scans();
    for (std::size_t k = 1; k <= scans; ++k) {
        const double t_scan = static_cast<double>(k) * cfg.scan_interval;
        while (next_spawn < spawns.size() && spawns[next_spawn].time <= t_scan) {
            const SpawnEvent& ev = spawns[next_spawn++];
            objects = propagate_all(std::move(objects), ev.time - t, cfg);
            t = ev.time;
            auto it = std::find_if(objects.begin(), objects.end(), [&](const auto& o) { return o.id == ev.parent_id; });
            if (it == objects.end()) {
                throw ConfigError("spawn_events", "parent id " + std::to_string(ev.parent_id) + " does not exist at t=" +
                                                      std::to_string(ev.time));
            }
            const StateVector parent = it->state;
            objects.erase(it);
            std::normal_distribution<double> dv(0.0, ev.velocity_std);
            for (int f = 0; f < ev.fragment_count; ++f) {
                StateVector s = parent;
                s(2) += dv(rng);
                s(3) += dv(rng);
                objects.push_back({next_id++, s});
            }
        }
        objects = propagate_all(std::move(objects), t_scan - t, cfg);
        t = t_scan;
        history.push_back({t_scan, objects});
    }
    return history;
}

Measurement sample_fov_point(const SensorModel& sensor, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double angle = sensor.boresight_angle + (2.0 * unif(rng) - 1.0) * sensor.fov_half_angle;
    const double range = sensor.max_range * std::sqrt(unif(rng));
    return sensor.origin + range * Measurement(std::cos(angle), std::sin(angle));
}

MeasurementFrame sense(const TruthSnapshot& truth, const SensorModel& sensor, const ClutterModel& clutter, Rng& rng) {
    MeasurementFrame frame;
    frame.time = truth.time;
    const Eigen::Matrix2d noise_l = Eigen::LLT<Eigen::Matrix2d>(sensor.r).matrixL();
    std::bernoulli_distribution detect(sensor.p_d);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::pair<Measurement, std::int64_t>> returns;
    for (const auto& o : truth.objects) {
        if (!in_fov(o.state, sensor)) continue;
        if (!detect(rng)) continue;
        const Eigen::Vector2d w(gauss(rng), gauss(rng));
        returns.emplace_back(Measurement(o.state.head<2>() + noise_l * w), o.id);
    }
    if (clutter.expected_count > 0.0) {
        const int n_clutter = std::poisson_distribution<int>(clutter.expected_count)(rng);
        for (int i = 0; i < n_clutter; ++i) returns.emplace_back(sample_fov_point(sensor, rng), kClutterTag);
    }
    std::shuffle(returns.begin(), returns.end(), rng);
    for (auto& [z, tag] : returns) {
        frame.returns.push_back(z);
        frame.truth_tags.push_back(tag);
    }
    return frame;
}

Simulation simulate(const ScenarioConfig& cfg) {
    Simulation sim;
    sim.truth = generate_truth(cfg);
    for (std::size_t k = 1; k < sim.truth.size(); ++k) {
        Rng rng(derive_seed(cfg.seed, 0x73656E7365ull, k));
        sim.frames.push_back(sense(sim.truth[k], cfg.sensor, cfg.clutter, rng));
    }
    return sim;
}

std::vector<GaussianTrack> initial_tracks(const ScenarioConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, 0x696E6974ull));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<GaussianTrack> tracks;
    for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
        GaussianTrack t;
        t.label = TrackLabel{static_cast<std::uint64_t>(i + 1)};
        t.mean = cfg.objects[i];
        t.mean(0) += cfg.initial_position_std * gauss(rng);
        t.mean(1) += cfg.initial_position_std * gauss(rng);
        t.mean(2) += cfg.initial_velocity_std * gauss(rng);
        t.mean(3) += cfg.initial_velocity_std * gauss(rng);
        t.covariance.setZero();
        t.covariance.diagonal() << cfg.initial_position_std * cfg.initial_position_std,
            cfg.initial_position_std * cfg.initial_position_std, cfg.initial_velocity_std * cfg.initial_velocity_std,
            cfg.initial_velocity_std * cfg.initial_velocity_std;
        tracks.push_back(std::move(t));
    }
    return tracks;
}

std::vector<std::string> preset_names() { return {"single-spawn", "twenty-object", "sixty-object"}; }

namespace {

// Ground sensor on the +x axis looking radially outward with a 30 degree FOV.
SensorModel preset_sensor() {
    SensorModel s;
    s.origin = Measurement(6378.137, 0.0);
    s.boresight_angle = 0.0;
    s.fov_half_angle = 15.0 * std::numbers::pi / 180.0;
    s.max_range = 40000.0;
    s.r = Eigen::Matrix2d::Identity();
    s.p_d = 0.95;
    return s;
}

// Object on a circular orbit of `radius` that crosses the boresight at
// `crossing_time`.
StateVector crossing_state(double radius, double crossing_time) {
    const double rate = std::sqrt(kEarthMu / (radius * radius * radius));
    return circular_state(radius, -rate * crossing_time);
}

}  // namespace

ScenarioConfig preset(const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.sensor = preset_sensor();
    cfg.dynamics.mu = kEarthMu;
    // Truth propagation is deterministic; q only loosens the filter enough to
    // follow a fragment whose velocity was kicked while out of view.
    cfg.dynamics.q = 1e-9;
    cfg.dynamics.integrator_substeps = 10;
    cfg.scan_interval = 60.0;
    cfg.clutter = ClutterModel::uniform(cfg.sensor, 1.0);
    cfg.initial_position_std = 1.0;
    cfg.initial_velocity_std = 1e-3;

    if (name == "single-spawn") {
        cfg.objects.push_back(crossing_state(20000.0, 2400.0));
        cfg.spawn_events.push_back({900.0, 0, 3, 0.02});
        cfg.duration = 4200.0;
        cfg.seed = 11;
    } else if (name == "twenty-object" || name == "sixty-object") {
        const bool sixty = name == "sixty-object";
        const int n = sixty ? 60 : 20;
        Rng rng(sixty ? 60 : 20);
        std::uniform_real_distribution<double> radius(16000.0, 24000.0);
        std::uniform_real_distribution<double> crossing(1500.0, sixty ? 5000.0 : 4500.0);
        for (int i = 0; i < n; ++i) cfg.objects.push_back(crossing_state(radius(rng), crossing(rng)));
        // The spawning object crosses mid-scenario.
        cfg.objects[7] = crossing_state(20000.0, 3000.0);
        cfg.spawn_events.push_back({1400.0, 7, sixty ? 5 : 3, 0.02});
        cfg.duration = sixty ? 7200.0 : 6600.0;
        cfg.seed = sixty ? 61 : 21;
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    return cfg;
}

}  // namespace hyptrack
