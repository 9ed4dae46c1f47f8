#pragma once

// Brute-force ground truth for desk-scale instances: exhaustive enumeration of
// children and grandchildren and the exact discrete posterior over them.
// Priors are recomputed here from first principles rather than through
// hypothesis.hpp so the two paths can cross-check each other; only the
// matrix entries (the Gaussian likelihoods) are shared.

#include "hyptrack/combinatorics.hpp"
#include "hyptrack/hypothesis.hpp"
#include "hyptrack/likelihood.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hyptrack {

struct EnumerationLimit {
    int max_objects = 10;
    int max_returns = 10;
    int max_pixels = 10;
    std::uint64_t max_grandchildren = 10'000'000;
};

/// Every pixel-resolved grandchild of a parent with `num_objects` associable
/// objects: death subsets x birth-pixel subsets x injective partial maps of
/// the returns onto survivors and newborns (unmapped returns are clutter).
/// The result has exactly count_grandchildren(M, m, N) entries.
/// Throws LimitExceededError beyond `limit`.
[[nodiscard]] std::vector<AssociationEvent> enumerate_grandchildren(int num_objects, int num_returns,
                                                                    int num_pixels,
                                                                    const EnumerationLimit& limit = {});

/// Every pixel-marginal child (the sampler's state space): death subsets x
/// maps of the returns onto survivors, BIRTH (at most N) and CLUTTER.
[[nodiscard]] std::vector<AssociationEvent> enumerate_children(int num_objects, int num_returns, int num_pixels,
                                                               GrandchildCountOptions options = {},
                                                               const EnumerationLimit& limit = {});

/// Association-only children (no births, no deaths).
[[nodiscard]] std::vector<AssociationEvent> enumerate_associations(int num_objects, int num_returns);

struct WeightedEvent {
    AssociationEvent event;
    double log_mass = 0.0;  ///< unnormalized log(prior x likelihood)
    double weight = 0.0;    ///< normalized
};

/// Exact posterior over all pixel-resolved grandchildren of one parent.
/// Throws DegenerateUpdateError when the total mass is zero.
[[nodiscard]] std::vector<WeightedEvent> exact_posterior(const DataAssociationMatrix& matrix, double p_d,
                                                         const BirthDeathConfig& birth_death,
                                                         const EnumerationLimit& limit = {});

/// Sums grandchild weights onto their pixel-marginal events, keyed by
/// event_key of the marginal event.
[[nodiscard]] std::map<std::string, double> marginal_posterior(const std::vector<WeightedEvent>& grandchildren);

/// Oracle prior of one pixel-resolved grandchild, computed independently of
/// log_grandchild_prior.
[[nodiscard]] double oracle_grandchild_prior(const AssociationEvent& event, int num_objects, int num_returns,
                                             double p_d, const BirthDeathConfig& birth_death);

/// Half the L1 distance between two distributions keyed alike; missing keys
/// count as zero mass.
[[nodiscard]] double tv_distance(const std::map<std::string, double>& p, const std::map<std::string, double>& q);

}  // namespace hyptrack
