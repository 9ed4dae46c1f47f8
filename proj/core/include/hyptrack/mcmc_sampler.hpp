#pragma once

// Metropolis random walk over association events, driven by the
// data-association matrix.
//
// Moves: pick one of the m+1 matrix rows uniformly. A measurement row is
// reassigned uniformly to any other column (objects, BIRTH, CLUTTER). If the
// chosen object column is already held by another return, ConflictRule
// decides what that return gets; choosing a dead object's column is a no-op.
// The DEATH row toggles the death flag of one uniformly chosen unassociated
// object (no-op when every object is associated). Acceptance uses the plain
// Metropolis ratio.

#include "hyptrack/hypothesis.hpp"
#include "hyptrack/likelihood.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace hyptrack {

using Rng = std::mt19937_64;

/// SplitMix64-style mixing; derives independent stream seeds from a base seed
/// and a tuple of counters (scan, parent, chain, ...).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                        std::uint64_t c = 0);

/// What happens to the return that held an object column when another return
/// moves onto it. `to_clutter` sends it to CLUTTER; the move cannot be undone
/// in one step, so plain Metropolis acceptance is only approximately
/// stationary for the target. `swap` hands it the mover's old assignment,
/// which makes the proposal symmetric.
enum class ConflictRule : std::uint8_t { to_clutter, swap };

struct SamplerConfig {
    /// Unset means 50 (m+1)(M+2) burn-in and 200 (m+1)(M+2) recorded steps.
    std::optional<std::int64_t> burn_in_steps;
    std::optional<std::int64_t> record_steps;
    int children_kept = 10;
    std::uint64_t seed = 0;
    int chains_per_parent = 1;
    ConflictRule conflict_rule = ConflictRule::swap;

    void validate() const;
    [[nodiscard]] std::int64_t burn_in_for(int num_returns, int num_objects) const;
    [[nodiscard]] std::int64_t record_for(int num_returns, int num_objects) const;
};

/// Scores events against one matrix: log child prior + log likelihood.
class ChainScorer {
public:
    ChainScorer(const DataAssociationMatrix& matrix, PriorContext ctx);

    [[nodiscard]] const DataAssociationMatrix& matrix() const { return *matrix_; }
    [[nodiscard]] const PriorContext& context() const { return ctx_; }
    [[nodiscard]] int num_returns() const { return matrix_->num_returns(); }
    [[nodiscard]] int num_objects() const { return matrix_->num_objects(); }

    [[nodiscard]] double log_score(const AssociationEvent& event) const;

private:
    const DataAssociationMatrix* matrix_;
    PriorContext ctx_;
};

struct ChainState {
    AssociationEvent event;
    double log_score = 0.0;
    std::vector<std::int32_t> owner;  ///< per object column: claiming return or -1
};

[[nodiscard]] ChainState init_chain(const ChainScorer& scorer, Rng& rng);

/// Writes a proposed neighbour of `from` into `to` (buffers are reused).
/// Picking a dead object's column proposes `from` itself.
void propose_into(const ChainState& from, ChainState& to, const ChainScorer& scorer, Rng& rng,
                  ConflictRule rule = ConflictRule::to_clutter);
[[nodiscard]] ChainState propose(const ChainState& state, const ChainScorer& scorer, Rng& rng,
                                 ConflictRule rule = ConflictRule::to_clutter);

/// Draws u ~ U[0,1) and accepts iff u < min(1, exp(candidate - current)).
/// A -inf candidate is rejected unless the current state has zero mass too,
/// in which case any move is accepted so the chain can leave the region.
[[nodiscard]] bool metropolis_accept(double current_log_score, double candidate_log_score, Rng& rng);

/// Replaces `state` by `candidate` when accepted; returns whether it was.
bool metropolis_step(ChainState& state, ChainState& candidate, Rng& rng);

struct SampledChild {
    AssociationEvent event;
    double log_score = 0.0;
    std::uint64_t visits = 0;  ///< recorded-phase visits summed over chains
};

struct ChainStats {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    std::uint64_t recorded_steps = 0;
};

struct VisitTable {
    std::vector<SampledChild> children;  ///< every distinct visited event, best score first
    ChainStats stats;
};

/// Runs cfg.chains_per_parent chains (burn-in then recording) and returns
/// every distinct visited event with its exact score and visit count. The
/// initial state of each chain is always included.
[[nodiscard]] VisitTable run_chains(const ChainScorer& scorer, const SamplerConfig& cfg);

/// The cfg.children_kept highest-scoring events of run_chains.
[[nodiscard]] std::vector<SampledChild> sample_children(const ChainScorer& scorer, const SamplerConfig& cfg);

}  // namespace hyptrack
