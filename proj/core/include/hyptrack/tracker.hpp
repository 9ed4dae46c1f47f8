#pragma once

// Scan-level orchestration of the hypothesis recursion.
//
// Per scan and per parent hypothesis: predict every track, build the
// data-association matrix over the tracks predicted inside the FOV, obtain
// children (MCMC or exhaustive), realize them (deaths drop tracks, newborns
// get fresh labels, associations take the EKF posterior), then normalize all
// children of all parents jointly, prune to h_inf and report.

#include "hyptrack/combinatorics.hpp"
#include "hyptrack/frame.hpp"
#include "hyptrack/hypothesis.hpp"
#include "hyptrack/likelihood.hpp"
#include "hyptrack/mcmc_sampler.hpp"
#include "hyptrack/oracle.hpp"
#include "hyptrack/target_filter.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hyptrack {

enum class TrackerMode : std::uint8_t { mcmc, exhaustive };

struct TrackerConfig {
    std::size_t h_inf = 20;
    PruneStrategy prune_strategy = PruneStrategy::top_k;
    SamplerConfig sampler;
    BirthDeathConfig birth_death;
    BirthModel birth;
    TrackerMode mode = TrackerMode::mcmc;
    bool adapt_rates = false;
    EnumerationLimit limit{.max_objects = 8, .max_returns = 8, .max_pixels = 64, .max_grandchildren = 2'000'000};
    /// Worker threads for per-parent child generation; 0 = hardware concurrency.
    unsigned threads = 0;

    void validate() const;
};

struct TrackerReport {
    std::size_t scan = 0;
    double time = 0.0;
    HypothesisId top_hypothesis_id;
    double top_weight = 0.0;
    int estimated_count = 0;
    std::vector<GaussianTrack> estimates;  ///< tracks of the top hypothesis
    double weight_entropy = 0.0;
    double weight_sum = 0.0;
    std::size_t num_hypotheses = 0;
    std::size_t num_children = 0;          ///< children generated before pruning
    int num_returns = 0;
    std::vector<int> parent_object_counts; ///< associable objects per parent
    BirthDeathConfig rates;                ///< birth/death rates used this scan
    BigInt hypothesis_count_bound;
    bool degenerate = false;               ///< all children had zero mass; parents kept
};

/// Scales alpha and beta with rho = max(1, m) / max(1, n_fov):
/// alpha' = alpha max(1, rho), beta' = beta max(1, 1/rho), clamped to
/// [1e-6, 0.5]. `expected_in_fov` is the in-FOV track count of the top
/// hypothesis after prediction.
[[nodiscard]] BirthDeathConfig adapt_birth_death_rates(int num_returns, int expected_in_fov,
                                                       const BirthDeathConfig& base);

/// Sum over parents of count_grandchildren(M_i, m, N): the branching an
/// exhaustive method would face this scan.
[[nodiscard]] BigInt hypothesis_count_bound(std::span<const int> associable_counts, int num_returns,
                                            std::int64_t num_pixels, GrandchildCountOptions options = {});

/// Indices of tracks whose mean lies inside the FOV.
[[nodiscard]] std::vector<std::size_t> associable_indices(std::span<const GaussianTrack> tracks,
                                                          const SensorModel& sensor);

class Tracker {
public:
    Tracker(TrackerConfig config, SensorModel sensor, DynamicsConfig dynamics, ClutterModel clutter,
            std::vector<GaussianTrack> initial_tracks, double start_time = 0.0, std::uint64_t seed = 0);

    /// Advances to frame.time and absorbs the frame. Throws InputError if the
    /// frame is older than the current time.
    TrackerReport step(const MeasurementFrame& frame);

    [[nodiscard]] const std::vector<Hypothesis>& hypotheses() const { return hypotheses_; }
    [[nodiscard]] const TrackerConfig& config() const { return config_; }
    [[nodiscard]] double time() const { return time_; }
    [[nodiscard]] std::size_t scan() const { return scan_; }

private:
    struct ParentResult;

    ParentResult expand_parent(const Hypothesis& parent, std::size_t parent_index, const MeasurementFrame& frame,
                               const DynamicsConfig& dyn, const BirthDeathConfig& rates) const;

    TrackerConfig config_;
    SensorModel sensor_;
    DynamicsConfig dynamics_;
    ClutterModel clutter_;
    std::uint64_t seed_;
    std::vector<Hypothesis> hypotheses_;
    double time_;
    std::size_t scan_ = 0;
    std::uint64_t next_label_ = 1;
    std::uint64_t next_id_ = 1;
};

}  // namespace hyptrack
