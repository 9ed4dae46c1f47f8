#include "hyptrack/errors.hpp"
#include "hyptrack/mcmc_sampler.hpp"
#include "hyptrack/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <set>

using namespace hyptrack;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Raw matrix with hand-chosen log entries: objects, birth, clutter columns
// for each return, then the death row.
DataAssociationMatrix raw_matrix(int m, int M, double beta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-6.0, 0.0);
    Eigen::MatrixXd e(m + 1, M + 2);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < M; ++j) e(i, j) = u(rng);
        e(i, M) = std::log(0.01);
        e(i, M + 1) = std::log(0.02);
    }
    for (int j = 0; j < M; ++j) e(m, j) = std::log(beta);
    e(m, M) = kNegInf;
    e(m, M + 1) = 0.0;
    std::vector<TrackLabel> labels;
    for (int j = 0; j < M; ++j) labels.push_back(TrackLabel{static_cast<std::uint64_t>(j + 1)});
    return DataAssociationMatrix(e, labels, {});
}

ChainState make_state(const ChainScorer& scorer, AssociationEvent e) {
    ChainState s;
    s.owner.assign(static_cast<std::size_t>(scorer.num_objects()), -1);
    for (std::size_t i = 0; i < e.assignments.size(); ++i) {
        if (e.assignments[i].kind == AssignmentKind::object) s.owner[e.assignments[i].index] = static_cast<int>(i);
    }
    s.event = std::move(e);
    s.log_score = scorer.log_score(s.event);
    return s;
}

void expect_owner_consistent(const ChainState& s, int M) {
    std::vector<std::int32_t> owner(static_cast<std::size_t>(M), -1);
    for (std::size_t i = 0; i < s.event.assignments.size(); ++i) {
        const Assignment& a = s.event.assignments[i];
        if (a.kind == AssignmentKind::object) {
            ASSERT_EQ(owner[a.index], -1) << "object claimed twice";
            owner[a.index] = static_cast<std::int32_t>(i);
        }
    }
    ASSERT_EQ(owner, s.owner);
}

}  // namespace

TEST(DeriveSeed, DistinctAndDeterministic) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 20; ++a) {
        for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(7, a, b));
    }
    EXPECT_EQ(seen.size(), 400u);
    EXPECT_EQ(derive_seed(1, 2, 3, 4), derive_seed(1, 2, 3, 4));
    EXPECT_NE(derive_seed(1, 2, 3, 4), derive_seed(2, 2, 3, 4));
}

TEST(SamplerConfig, DefaultsAndValidation) {
    SamplerConfig cfg;
    EXPECT_EQ(cfg.burn_in_for(2, 3), 50 * 3 * 5);
    EXPECT_EQ(cfg.record_for(2, 3), 200 * 3 * 5);
    cfg.burn_in_steps = 7;
    EXPECT_EQ(cfg.burn_in_for(2, 3), 7);
    cfg.children_kept = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.record_steps = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ChainScorer, ScoreIsPriorPlusLikelihood) {
    const auto matrix = raw_matrix(2, 2, 0.05, 1);
    PriorContext ctx{2, 2, 0.8, {.alpha = 0.05, .beta = 0.05, .n_pixels = 3}};
    const ChainScorer scorer(matrix, ctx);
    const AssociationEvent e{{Assignment::object(1), Assignment::birth()}, {0}, {}};
    EXPECT_NEAR(scorer.log_score(e), log_child_prior(e, ctx) + hypothesis_log_likelihood(e, matrix), 1e-12);
    EXPECT_THROW(ChainScorer(matrix, PriorContext{3, 2, 0.8, {}}), std::invalid_argument);
}

TEST(InitChain, ProducesValidEvents) {
    const auto matrix = raw_matrix(4, 3, 0.05, 2);
    const ChainScorer scorer(matrix, {3, 4, 0.9, {}});
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const ChainState s = init_chain(scorer, rng);
        EXPECT_NO_THROW(validate_event(s.event, 3, 4));
        EXPECT_TRUE(s.event.deaths.empty());
        expect_owner_consistent(s, 3);
        EXPECT_EQ(s.log_score, scorer.log_score(s.event));
    }
}

// z2 -> T3 while z1 holds T3.
TEST(Proposal, ConflictRules) {
    const auto matrix = raw_matrix(2, 3, 0.05, 4);
    const ChainScorer scorer(matrix, {3, 2, 0.9, {}});
    const ChainState from = make_state(scorer, {{Assignment::object(2), Assignment::object(0)}, {}, {}});
    bool seen_clutter = false, seen_swap = false;
    for (std::uint64_t seed = 0; seed < 2000 && !(seen_clutter && seen_swap); ++seed) {
        for (ConflictRule rule : {ConflictRule::to_clutter, ConflictRule::swap}) {
            Rng rng(seed);
            const ChainState to = propose(from, scorer, rng, rule);
            if (to.event.assignments[1] != Assignment::object(2)) continue;
            if (rule == ConflictRule::to_clutter) {
                EXPECT_EQ(to.event.assignments[0], Assignment::clutter());
                seen_clutter = true;
            } else {
                EXPECT_EQ(to.event.assignments[0], Assignment::object(0));
                seen_swap = true;
            }
            expect_owner_consistent(to, 3);
        }
    }
    EXPECT_TRUE(seen_clutter);
    EXPECT_TRUE(seen_swap);
}

TEST(Proposal, ConflictToClutterFromClutter) {
    const auto matrix = raw_matrix(2, 3, 0.05, 4);
    const ChainScorer scorer(matrix, {3, 2, 0.9, {}});
    const ChainState from = make_state(scorer, {{Assignment::object(2), Assignment::clutter()}, {}, {}});
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Rng rng(seed);
        const ChainState to = propose(from, scorer, rng, ConflictRule::to_clutter);
        if (to.event.assignments[1] == Assignment::object(2)) {
            EXPECT_EQ(to.event.assignments[0], Assignment::clutter());
            return;
        }
    }
    FAIL() << "move never proposed";
}

TEST(Proposal, DeadColumnIsNoOp) {
    const auto matrix = raw_matrix(1, 2, 0.05, 5);
    const ChainScorer scorer(matrix, {2, 1, 0.9, {}});
    const ChainState from = make_state(scorer, {{Assignment::clutter()}, {1}, {}});
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Rng rng(seed);
        const ChainState to = propose(from, scorer, rng, ConflictRule::swap);
        EXPECT_FALSE(to.event.assignments[0] == Assignment::object(1));
        if (to.event == from.event) EXPECT_EQ(to.log_score, from.log_score);
    }
}

TEST(Proposal, NeverDoubleClaimsOverLongWalk) {
    const auto matrix = raw_matrix(4, 3, 0.2, 6);
    const ChainScorer scorer(matrix, {3, 4, 0.9, {.alpha = 0.1, .beta = 0.2, .n_pixels = 4}});
    for (ConflictRule rule : {ConflictRule::to_clutter, ConflictRule::swap}) {
        Rng rng(7);
        ChainState state = init_chain(scorer, rng);
        ChainState cand;
        for (int i = 0; i < 100000; ++i) {
            propose_into(state, cand, scorer, rng, rule);
            ASSERT_NO_THROW(validate_event(cand.event, 3, 4));
            expect_owner_consistent(cand, 3);
            ASSERT_EQ(cand.log_score, scorer.log_score(cand.event));
            // Accept everything so the walk covers low-score states too.
            std::swap(state, cand);
        }
    }
}

// Every child with positive prior is reachable from the all-clutter state.
TEST(Proposal, IrreducibleOnSmallSpaces) {
    for (int M = 0; M <= 3; ++M) {
        for (int m = 0; m <= 3; ++m) {
            const auto matrix = raw_matrix(m, M, 0.1, 8);
            const ChainScorer scorer(matrix, {M, m, 0.9, {.alpha = 0.1, .beta = 0.1, .n_pixels = 1}});
            std::set<std::string> target;
            for (const auto& c : enumerate_children(M, m, 1)) target.insert(event_key(c));

            AssociationEvent start;
            start.assignments.assign(static_cast<std::size_t>(m), Assignment::clutter());
            std::map<std::string, ChainState> seen;
            std::deque<ChainState> queue{make_state(scorer, start)};
            seen.emplace(event_key(start), queue.front());
            Rng rng(9);
            while (!queue.empty()) {
                const ChainState s = queue.front();
                queue.pop_front();
                for (int k = 0; k < 400; ++k) {
                    ChainState n = propose(s, scorer, rng, ConflictRule::swap);
                    if (n.log_score == kNegInf) continue;
                    const std::string key = event_key(n.event);
                    if (seen.emplace(key, n).second) queue.push_back(n);
                }
            }
            std::set<std::string> reached;
            for (const auto& [k, v] : seen) reached.insert(k);
            EXPECT_EQ(reached, target) << "M=" << M << " m=" << m;
        }
    }
}

TEST(Metropolis, AcceptanceFrequency) {
    Rng rng(10);
    int accepted = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) accepted += metropolis_accept(0.0, std::log(0.5), rng);
    EXPECT_NEAR(static_cast<double>(accepted) / n, 0.5, 0.01);
    for (int i = 0; i < 100; ++i) {
        EXPECT_TRUE(metropolis_accept(0.0, 1.0, rng));
        EXPECT_FALSE(metropolis_accept(0.0, kNegInf, rng));
        EXPECT_FALSE(metropolis_accept(0.0, std::nan(""), rng));
        EXPECT_TRUE(metropolis_accept(kNegInf, kNegInf, rng));
    }
}

TEST(SampleChildren, TopChildrenMatchOracle) {
    const auto matrix = raw_matrix(3, 2, 0.05, 11);
    const PriorContext ctx{2, 3, 0.9, {.alpha = 0.05, .beta = 0.05, .n_pixels = 2}};
    const ChainScorer scorer(matrix, ctx);
    SamplerConfig cfg;
    cfg.children_kept = 3;
    cfg.seed = 12;
    const auto kids = sample_children(scorer, cfg);
    ASSERT_EQ(kids.size(), 3u);

    const auto post = marginal_posterior(exact_posterior(matrix, ctx.p_d, ctx.birth_death));
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [k, w] : post) ranked.emplace_back(w, k);
    std::sort(ranked.rbegin(), ranked.rend());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(event_key(kids[i].event), ranked[i].second) << i;

    // Score ratios reproduce oracle weight ratios.
    for (std::size_t i = 1; i < kids.size(); ++i) {
        EXPECT_NEAR(kids[i].log_score - kids[0].log_score,
                    std::log(post.at(event_key(kids[i].event)) / post.at(event_key(kids[0].event))), 1e-10);
    }
}

TEST(SampleChildren, DominantChildFoundEveryTime) {
    Eigen::MatrixXd e(3, 4);
    e << -1.0, -40.0, std::log(0.001), std::log(0.001),
         -40.0, -1.0, std::log(0.001), std::log(0.001),
         std::log(0.01), std::log(0.01), kNegInf, 0.0;
    const DataAssociationMatrix matrix(e, {TrackLabel{1}, TrackLabel{2}}, {});
    const ChainScorer scorer(matrix, {2, 2, 0.95, {.alpha = 0.001, .beta = 0.01, .n_pixels = 4}});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SamplerConfig cfg;
        cfg.seed = seed;
        cfg.children_kept = 1;
        const auto kids = sample_children(scorer, cfg);
        const AssociationEvent want{{Assignment::object(0), Assignment::object(1)}, {}, {}};
        EXPECT_EQ(kids.front().event, want);
    }
}

TEST(SampleChildren, ZeroReturns) {
    const auto matrix = raw_matrix(0, 2, 0.3, 13);
    const PriorContext ctx{2, 0, 0.9, {.alpha = 0.1, .beta = 0.3, .n_pixels = 2}};
    const ChainScorer scorer(matrix, ctx);
    SamplerConfig cfg;
    cfg.children_kept = 10;
    const auto kids = sample_children(scorer, cfg);
    EXPECT_EQ(kids.size(), 4u);  // death subsets of two objects
    for (const auto& k : kids) {
        EXPECT_TRUE(k.event.assignments.empty());
        EXPECT_NEAR(k.log_score, log_child_prior(k.event, ctx), 1e-12);
    }
    // beta^Nd (1 - p_d)^(2 - Nd): 0.01, 0.03, 0.09, so both dying ranks first.
    EXPECT_EQ(kids.front().event.deaths, (std::vector<std::uint32_t>{0, 1}));
    EXPECT_TRUE(kids.back().event.deaths.empty());

    const auto none = raw_matrix(0, 0, 0.3, 14);
    const auto only = sample_children(ChainScorer(none, {0, 0, 0.9, {}}), cfg);
    ASSERT_EQ(only.size(), 1u);
    EXPECT_TRUE(only.front().event.assignments.empty());
}

TEST(SampleChildren, ReproducibleUnderSeed) {
    const auto matrix = raw_matrix(3, 3, 0.05, 15);
    const ChainScorer scorer(matrix, {3, 3, 0.9, {}});
    SamplerConfig cfg;
    cfg.seed = 99;
    cfg.chains_per_parent = 2;
    const auto a = run_chains(scorer, cfg);
    const auto b = run_chains(scorer, cfg);
    ASSERT_EQ(a.children.size(), b.children.size());
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        EXPECT_EQ(a.children[i].event, b.children[i].event);
        EXPECT_EQ(a.children[i].visits, b.children[i].visits);
    }
    EXPECT_EQ(a.stats.recorded_steps, 2u * static_cast<std::uint64_t>(cfg.record_for(3, 3)));
    for (std::size_t i = 1; i < a.children.size(); ++i) EXPECT_GE(a.children[i - 1].log_score, a.children[i].log_score);
}
