#pragma once

// Ground-truth generation for SSA-style scenarios: objects on planar orbits,
// scheduled breakups, and a single wedge-FOV sensor with missed detections
// and uniform clutter.

#include "hyptrack/frame.hpp"
#include "hyptrack/likelihood.hpp"
#include "hyptrack/mcmc_sampler.hpp"
#include "hyptrack/target_filter.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hyptrack {

struct SpawnEvent {
    double time = 0.0;             ///< s
    std::int64_t parent_id = 0;    ///< truth object id that breaks apart
    int fragment_count = 2;
    double velocity_std = 0.01;    ///< km/s, isotropic
};

struct ScenarioConfig {
    std::string name;
    std::vector<StateVector> objects;  ///< initial states; truth ids are indices
    std::vector<SpawnEvent> spawn_events;
    SensorModel sensor;
    ClutterModel clutter;
    DynamicsConfig dynamics;  ///< dt is ignored; scan_interval drives sampling
    double duration = 3600.0;
    double scan_interval = 60.0;
    std::uint64_t seed = 1;
    /// Prior uncertainty of the tracker's initial tracks.
    double initial_position_std = 1.0;
    double initial_velocity_std = 1e-3;

    void validate() const;
    [[nodiscard]] std::size_t num_scans() const;  ///< scans at k * scan_interval, k = 1..num_scans
};

struct TruthObject {
    std::int64_t id = 0;
    StateVector state = StateVector::Zero();
};

struct TruthSnapshot {
    double time = 0.0;
    std::vector<TruthObject> objects;  ///< sorted by id
};

/// Snapshot 0 is the initial time; snapshot k is scan k.
using TruthHistory = std::vector<TruthSnapshot>;

/// Propagates all objects scan by scan. At a spawn event the parent is
/// replaced by `fragment_count` new objects at its position with Gaussian
/// velocity perturbations; fragment ids continue after the largest id used.
[[nodiscard]] TruthHistory generate_truth(const ScenarioConfig& cfg);

/// One scan: in-FOV objects detected with probability p_d and perturbed by
/// R; Poisson clutter uniform over the FOV sector; returns shuffled.
[[nodiscard]] MeasurementFrame sense(const TruthSnapshot& truth, const SensorModel& sensor,
                                     const ClutterModel& clutter, Rng& rng);

struct Simulation {
    TruthHistory truth;
    std::vector<MeasurementFrame> frames;  ///< frames[k-1] belongs to truth[k]
};

/// generate_truth followed by sense on every scan, each with its own RNG
/// stream derived from cfg.seed.
[[nodiscard]] Simulation simulate(const ScenarioConfig& cfg);

/// Tracker start-up tracks: the initial truth states perturbed by the prior
/// uncertainty, labels 1..n.
[[nodiscard]] std::vector<GaussianTrack> initial_tracks(const ScenarioConfig& cfg);

/// Uniform sample from the FOV sector.
[[nodiscard]] Measurement sample_fov_point(const SensorModel& sensor, Rng& rng);

/// Shipped presets: "single-spawn", "twenty-object", "sixty-object".
[[nodiscard]] std::vector<std::string> preset_names();
[[nodiscard]] ScenarioConfig preset(const std::string& name);

/// Position on a prograde circular orbit of radius r at phase theta.
[[nodiscard]] StateVector circular_state(double radius, double phase, double mu = kEarthMu);

}  // namespace hyptrack
