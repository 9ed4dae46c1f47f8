#include "hyptrack/mcmc_sampler.hpp"

#include "hyptrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace hyptrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::int64_t state_space_size(int num_returns, int num_objects) {
    return static_cast<std::int64_t>(num_returns + 1) * static_cast<std::int64_t>(num_objects + 2);
}

EventCounts counts_of(const AssociationEvent& e) {
    EventCounts c;
    for (const Assignment& a : e.assignments) {
        c.associated_objects += a.kind == AssignmentKind::object;
        c.detected_births += a.kind == AssignmentKind::birth;
    }
    c.deaths = static_cast<int>(e.deaths.size());
    return c;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix(base);
    h = splitmix(h ^ a);
    h = splitmix(h ^ (b + 0x632BE59BD9B4E019ull));
    h = splitmix(h ^ (c + 0x85157AF5ull));
    return h;
}

void SamplerConfig::validate() const {
    if (burn_in_steps && *burn_in_steps < 0) throw ConfigError("sampler.burn_in_steps", "must be >= 0");
    if (record_steps && *record_steps < 1) throw ConfigError("sampler.record_steps", "must be >= 1");
    if (children_kept < 1) throw ConfigError("sampler.children_kept", "must be >= 1");
    if (chains_per_parent < 1) throw ConfigError("sampler.chains_per_parent", "must be >= 1");
}

std::int64_t SamplerConfig::burn_in_for(int num_returns, int num_objects) const {
    return burn_in_steps.value_or(50 * state_space_size(num_returns, num_objects));
}

std::int64_t SamplerConfig::record_for(int num_returns, int num_objects) const {
    return record_steps.value_or(200 * state_space_size(num_returns, num_objects));
}

ChainScorer::ChainScorer(const DataAssociationMatrix& matrix, PriorContext ctx) : matrix_(&matrix), ctx_(ctx) {
    if (ctx_.num_objects != matrix.num_objects() || ctx_.num_returns != matrix.num_returns())
        throw std::invalid_argument("ChainScorer: prior context does not match the matrix");
}

double ChainScorer::log_score(const AssociationEvent& event) const {
    const double lp = log_child_prior(counts_of(event), ctx_);
    if (lp == kNegInf) return kNegInf;
    return lp + hypothesis_log_likelihood(event, *matrix_);
}

ChainState init_chain(const ChainScorer& scorer, Rng& rng) {
    const int m = scorer.num_returns();
    const int M = scorer.num_objects();
    ChainState s;
    s.event.assignments.resize(static_cast<std::size_t>(m));
    s.owner.assign(static_cast<std::size_t>(M), -1);
    std::uniform_int_distribution<int> column(0, M + 1);
    for (int i = 0; i < m; ++i) {
        const int c = column(rng);
        Assignment a = Assignment::clutter();
        if (c < M) {
            if (s.owner[static_cast<std::size_t>(c)] < 0) {
                a = Assignment::object(static_cast<std::uint32_t>(c));
                s.owner[static_cast<std::size_t>(c)] = i;
            }
        } else if (c == M) {
            a = Assignment::birth();
        }
        s.event.assignments[static_cast<std::size_t>(i)] = a;
    }
    s.log_score = scorer.log_score(s.event);
    return s;
}

void propose_into(const ChainState& from, ChainState& to, const ChainScorer& scorer, Rng& rng, ConflictRule rule) {
    const int m = scorer.num_returns();
    const int M = scorer.num_objects();
    to.event.assignments = from.event.assignments;
    to.event.deaths = from.event.deaths;
    to.event.birth_pixels.clear();
    to.owner = from.owner;

    const int row = std::uniform_int_distribution<int>(0, m)(rng);
    if (row < m) {
        Assignment& cur = to.event.assignments[static_cast<std::size_t>(row)];
        const int cur_col = cur.kind == AssignmentKind::object ? static_cast<int>(cur.index)
                            : cur.kind == AssignmentKind::birth ? M
                                                                 : M + 1;
        int col = std::uniform_int_distribution<int>(0, M)(rng);  // M+1 columns other than the current one
        if (col >= cur_col) ++col;

        if (col < M && std::binary_search(to.event.deaths.begin(), to.event.deaths.end(),
                                          static_cast<std::uint32_t>(col))) {
            // A dead object cannot take a return; the walk stays put.
            to.log_score = from.log_score;
            return;
        }
        const Assignment previous = cur;
        if (cur.kind == AssignmentKind::object) to.owner[cur.index] = -1;
        if (col < M) {
            const auto j = static_cast<std::size_t>(col);
            if (const int holder = to.owner[j]; holder >= 0) {
                Assignment& other = to.event.assignments[static_cast<std::size_t>(holder)];
                if (rule == ConflictRule::swap) {
                    other = previous;
                    if (previous.kind == AssignmentKind::object) to.owner[previous.index] = holder;
                } else {
                    other = Assignment::clutter();
                }
            }
            to.owner[j] = row;
            cur = Assignment::object(static_cast<std::uint32_t>(col));
        } else if (col == M) {
            cur = Assignment::birth();
        } else {
            cur = Assignment::clutter();
        }
    } else {
        std::vector<std::uint32_t> free_objects;
        for (int j = 0; j < M; ++j) {
            if (to.owner[static_cast<std::size_t>(j)] < 0) free_objects.push_back(static_cast<std::uint32_t>(j));
        }
        if (!free_objects.empty()) {
            const auto pick = free_objects[std::uniform_int_distribution<std::size_t>(0, free_objects.size() - 1)(rng)];
            auto it = std::lower_bound(to.event.deaths.begin(), to.event.deaths.end(), pick);
            if (it != to.event.deaths.end() && *it == pick) {
                to.event.deaths.erase(it);
            } else {
                to.event.deaths.insert(it, pick);
            }
        }
    }
    to.log_score = scorer.log_score(to.event);
}

ChainState propose(const ChainState& state, const ChainScorer& scorer, Rng& rng, ConflictRule rule) {
    ChainState out;
    propose_into(state, out, scorer, rng, rule);
    return out;
}

bool metropolis_accept(double current_log_score, double candidate_log_score, Rng& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (current_log_score == kNegInf) return true;
    if (candidate_log_score == kNegInf || std::isnan(candidate_log_score)) return false;
    const double delta = candidate_log_score - current_log_score;
    if (delta >= 0.0) return true;
    return u < std::exp(delta);
}

bool metropolis_step(ChainState& state, ChainState& candidate, Rng& rng) {
    if (!metropolis_accept(state.log_score, candidate.log_score, rng)) return false;
    std::swap(state, candidate);
    return true;
}

VisitTable run_chains(const ChainScorer& scorer, const SamplerConfig& cfg) {
    cfg.validate();
    const int m = scorer.num_returns();
    const int M = scorer.num_objects();
    const std::int64_t burn_in = cfg.burn_in_for(m, M);
    const std::int64_t record = cfg.record_for(m, M);

    struct Entry {
        std::size_t index;
    };
    std::unordered_map<std::string, Entry> seen;
    VisitTable table;

    auto lookup = [&](const ChainState& s) -> std::size_t {
        auto [it, inserted] = seen.try_emplace(event_key(s.event), Entry{table.children.size()});
        if (inserted) table.children.push_back({s.event, s.log_score, 0});
        return it->second.index;
    };

    for (int chain = 0; chain < cfg.chains_per_parent; ++chain) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(chain)));
        ChainState state = init_chain(scorer, rng);
        ChainState candidate;
        (void)lookup(state);

        if (m == 0 && M == 0) {
            // Single-state space: nothing to walk.
            table.children[lookup(state)].visits += static_cast<std::uint64_t>(record);
            table.stats.recorded_steps += static_cast<std::uint64_t>(record);
            continue;
        }
        for (std::int64_t step = 0; step < burn_in; ++step) {
            propose_into(state, candidate, scorer, rng, cfg.conflict_rule);
            ++table.stats.proposals;
            table.stats.accepted += metropolis_step(state, candidate, rng);
        }
        std::size_t current = lookup(state);
        for (std::int64_t step = 0; step < record; ++step) {
            propose_into(state, candidate, scorer, rng, cfg.conflict_rule);
            ++table.stats.proposals;
            if (metropolis_step(state, candidate, rng)) {
                ++table.stats.accepted;
                current = lookup(state);
            }
            ++table.children[current].visits;
            ++table.stats.recorded_steps;
        }
    }

    std::vector<std::pair<std::string, std::size_t>> order;
    order.reserve(seen.size());
    for (const auto& [key, entry] : seen) order.emplace_back(key, entry.index);
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        const double sa = table.children[a.second].log_score;
        const double sb = table.children[b.second].log_score;
        if (sa != sb) return sa > sb;
        return a.first < b.first;
    });
    std::vector<SampledChild> sorted;
    sorted.reserve(order.size());
    for (const auto& [key, idx] : order) sorted.push_back(std::move(table.children[idx]));
    table.children = std::move(sorted);
    return table;
}

std::vector<SampledChild> sample_children(const ChainScorer& scorer, const SamplerConfig& cfg) {
    VisitTable table = run_chains(scorer, cfg);
    if (table.children.size() > static_cast<std::size_t>(cfg.children_kept))
        table.children.resize(static_cast<std::size_t>(cfg.children_kept));
    return std::move(table.children);
}

}  // namespace hyptrack
