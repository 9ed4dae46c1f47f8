#pragma once

// Discrete half of the recursion: hypotheses, association events, their
// transition priors, the Bayes weight update, and pruning.

#include "hyptrack/target_filter.hpp"
#include "hyptrack/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hyptrack {

struct Hypothesis {
    HypothesisId id;
    std::optional<HypothesisId> parent_id;
    double log_weight = 0.0;
    std::vector<GaussianTrack> tracks;

    [[nodiscard]] double weight() const;
};

enum class AssignmentKind : std::uint8_t { object, birth, clutter };

/// Destination of one measurement return. For `object`, `index` is the
/// object column of the data-association matrix. For `birth`, `index` is the
/// newborn slot in AssociationEvent::birth_pixels when the event is
/// pixel-resolved and 0 otherwise.
struct Assignment {
    AssignmentKind kind = AssignmentKind::clutter;
    std::uint32_t index = 0;

    static constexpr Assignment object(std::uint32_t column) { return {AssignmentKind::object, column}; }
    static constexpr Assignment birth(std::uint32_t slot = 0) { return {AssignmentKind::birth, slot}; }
    static constexpr Assignment clutter() { return {AssignmentKind::clutter, 0}; }

    friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

/// One child of a parent hypothesis.
///
/// The sampler works on pixel-marginal events: every newborn is detected and
/// identified only by the return it produced, and `birth_pixels` is empty.
/// The exhaustive oracle additionally produces pixel-resolved grandchildren:
/// `birth_pixels` lists the (sorted) pixels holding a newborn, births point
/// at their slot, and slots no return points at are undetected newborns.
struct AssociationEvent {
    std::vector<Assignment> assignments;       ///< one per return, frame order
    std::vector<std::uint32_t> deaths;         ///< sorted object columns
    std::vector<std::uint32_t> birth_pixels;   ///< pixel-resolved events only

    friend auto operator<=>(const AssociationEvent&, const AssociationEvent&) = default;
};

struct EventCounts {
    int associated_objects = 0;  ///< returns assigned to existing objects
    int detected_births = 0;     ///< returns assigned to newborns
    int undetected_births = 0;   ///< pixel-resolved newborns without a return
    int deaths = 0;

    [[nodiscard]] int births() const { return detected_births + undetected_births; }
    [[nodiscard]] int detections() const { return associated_objects + detected_births; }
};

/// Throws std::invalid_argument if `event` is not a valid child of a parent
/// with `num_objects` associable objects for a frame of `num_returns` returns.
void validate_event(const AssociationEvent& event, int num_objects, int num_returns);
[[nodiscard]] EventCounts count_event(const AssociationEvent& event);

/// Canonical byte key: assignments in frame order, then the sorted death set,
/// then birth pixels.
[[nodiscard]] std::string event_key(const AssociationEvent& event);

/// Drops pixel identities and undetected newborns, mapping a pixel-resolved
/// grandchild onto the pixel-marginal event it contributes to.
[[nodiscard]] AssociationEvent marginalize_pixels(const AssociationEvent& event);

enum class BirthDeathMode : std::uint8_t {
    per_instance,  ///< alpha^Nb beta^Nd per instance
    normalized,   ///< full Binomial pmf per instance, sums to one
};

struct BirthDeathConfig {
    double alpha = 0.005;  ///< per-pixel birth probability per scan
    double beta = 0.01;    ///< per-object death probability per scan (in-FOV objects)
    std::int64_t n_pixels = 16;
    BirthDeathMode mode = BirthDeathMode::per_instance;

    void validate() const;
};

/// p_D^k (1-p_D)^(M-k) / (C(m,k) k!). Throws if k > min(m, M).
[[nodiscard]] double association_prior(int num_objects, int num_returns, int num_associated, double p_d);
[[nodiscard]] double log_association_prior(int num_objects, int num_returns, int num_associated,
                                           double p_d);

/// Probability of one specific instance of n_b births and n_d deaths.
[[nodiscard]] double birth_death_prior(std::int64_t n_births, std::int64_t n_deaths, std::int64_t num_objects,
                                       const BirthDeathConfig& cfg);
[[nodiscard]] double log_birth_death_prior(std::int64_t n_births, std::int64_t n_deaths,
                                           std::int64_t num_objects, const BirthDeathConfig& cfg);

/// Everything the child priors need besides the event itself.
struct PriorContext {
    int num_objects = 0;  ///< associable (in-FOV) objects of the parent
    int num_returns = 0;
    double p_d = 0.9;
    BirthDeathConfig birth_death;
};

/// Prior of one pixel-resolved grandchild: birth_death_prior(Nb, Nd, M) times
/// association_prior(M + Nb - Nd, m, k), with k counting returns assigned to
/// existing objects and to newborns alike.
[[nodiscard]] double log_grandchild_prior(const AssociationEvent& event, const PriorContext& ctx);

/// Prior of a pixel-marginal child: the sum of log_grandchild_prior over all
/// grandchildren that marginalize_pixels maps onto it (pixel placements of
/// the detected newborns and any number of undetected newborns).
[[nodiscard]] double log_child_prior(const EventCounts& counts, const PriorContext& ctx);
[[nodiscard]] double log_child_prior(const AssociationEvent& event, const PriorContext& ctx);
[[nodiscard]] double child_prior(const AssociationEvent& event, const PriorContext& ctx);

/// log(sum(exp(v))); -inf for an empty or all -inf input.
[[nodiscard]] double log_sum_exp(std::span<const double> v);

/// Posterior log-weights log(w l) - log(sum w l), computed with
/// max-subtraction. Throws DegenerateUpdateError if every product is zero.
[[nodiscard]] std::vector<double> bayes_update_log(std::span<const double> log_prior,
                                                   std::span<const double> log_likelihood);

/// Linear-domain convenience wrapper over (prior weight, likelihood) pairs.
[[nodiscard]] std::vector<double> bayes_update_weights(std::span<const std::pair<double, double>> children);

/// Renormalizes hypothesis log-weights in place to sum to one.
void normalize(std::vector<Hypothesis>& hypotheses);

enum class PruneStrategy : std::uint8_t { top_k, sample };

/// Keeps at most `h_inf` hypotheses and renormalizes. top_k is deterministic
/// (ties broken by ascending id); sample draws without replacement with
/// probability proportional to weight. Output is sorted by descending weight.
[[nodiscard]] std::vector<Hypothesis> prune(std::vector<Hypothesis> hypotheses, std::size_t h_inf,
                                            PruneStrategy strategy, std::mt19937_64* rng = nullptr);

}  // namespace hyptrack
