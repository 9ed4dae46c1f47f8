#include "hyptrack/tracker.hpp"

#include "hyptrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace hyptrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

void TrackerConfig::validate() const {
    if (h_inf < 1) throw ConfigError("tracker.h_inf", "must be >= 1");
    sampler.validate();
    birth_death.validate();
    birth.validate();
}

BirthDeathConfig adapt_birth_death_rates(int num_returns, int expected_in_fov, const BirthDeathConfig& base) {
    const double rho = static_cast<double>(std::max(1, num_returns)) / static_cast<double>(std::max(1, expected_in_fov));
    BirthDeathConfig out = base;
    out.alpha = std::clamp(base.alpha * std::max(1.0, rho), 1e-6, 0.5);
    out.beta = std::clamp(base.beta * std::max(1.0, 1.0 / rho), 1e-6, 0.5);
    return out;
}

BigInt hypothesis_count_bound(std::span<const int> associable_counts, int num_returns, std::int64_t num_pixels,
                              GrandchildCountOptions options) {
    BigInt total = 0;
    for (int M : associable_counts) total += count_grandchildren(M, num_returns, num_pixels, options);
    return total;
}

std::vector<std::size_t> associable_indices(std::span<const GaussianTrack> tracks, const SensorModel& sensor) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if ((tracks[i].mean.head<2>() - sensor.origin).norm() > 0.0 && in_fov(tracks[i].mean, sensor)) out.push_back(i);
    }
    return out;
}

struct Tracker::ParentResult {
    std::vector<GaussianTrack> predicted;
    std::vector<std::size_t> associable;
    DataAssociationMatrix matrix;
    std::vector<SampledChild> children;
};

Tracker::Tracker(TrackerConfig config, SensorModel sensor, DynamicsConfig dynamics, ClutterModel clutter,
                 std::vector<GaussianTrack> initial_tracks, double start_time, std::uint64_t seed)
    : config_(std::move(config)),
      sensor_(std::move(sensor)),
      dynamics_(dynamics),
      clutter_(clutter),
      seed_(seed),
      time_(start_time) {
    config_.validate();
    sensor_.validate();
    dynamics_.validate();
    clutter_.validate();
    for (const auto& t : initial_tracks) next_label_ = std::max(next_label_, t.label.value + 1);
    Hypothesis root;
    root.id = HypothesisId{next_id_++};
    root.log_weight = 0.0;
    root.tracks = std::move(initial_tracks);
    hypotheses_.push_back(std::move(root));
}

Tracker::ParentResult Tracker::expand_parent(const Hypothesis& parent, std::size_t parent_index,
                                             const MeasurementFrame& frame, const DynamicsConfig& dyn,
                                             const BirthDeathConfig& rates) const {
    ParentResult r;
    r.predicted.reserve(parent.tracks.size());
    for (const auto& t : parent.tracks) r.predicted.push_back(predict_track(t, dyn));
    r.associable = associable_indices(r.predicted, sensor_);

    std::vector<GaussianTrack> columns;
    columns.reserve(r.associable.size());
    for (std::size_t i : r.associable) columns.push_back(r.predicted[i]);
    r.matrix = build_matrix(columns, frame, sensor_, clutter_, rates);

    const PriorContext ctx{static_cast<int>(columns.size()), static_cast<int>(frame.returns.size()), sensor_.p_d, rates};
    const ChainScorer scorer(r.matrix, ctx);

    if (config_.mode == TrackerMode::mcmc) {
        SamplerConfig sc = config_.sampler;
        sc.seed = derive_seed(seed_ ^ config_.sampler.seed, scan_, parent_index);
        r.children = sample_children(scorer, sc);
    } else {
        const GrandchildCountOptions opts{.births = rates.alpha > 0.0, .deaths = rates.beta > 0.0};
        for (auto& e : enumerate_children(ctx.num_objects, ctx.num_returns, static_cast<int>(rates.n_pixels), opts,
                                          config_.limit)) {
            const double s = scorer.log_score(e);
            r.children.push_back({std::move(e), s, 0});
        }
    }
    std::erase_if(r.children, [](const SampledChild& c) { return !(c.log_score > kNegInf); });
    return r;
}

TrackerReport Tracker::step(const MeasurementFrame& frame) {
    if (frame.time < time_) throw InputError("frame time precedes the tracker time");
    for (const auto& z : frame.returns) {
        if (!z.allFinite()) throw InputError("frame contains a non-finite return");
    }
    DynamicsConfig dyn = dynamics_;
    dyn.dt = frame.time - time_;
    const int m = static_cast<int>(frame.returns.size());

    BirthDeathConfig rates = config_.birth_death;
    if (config_.adapt_rates) {
        // hypotheses_ stays sorted by weight, so front() is the top hypothesis.
        int in_fov_count = 0;
        for (const auto& t : hypotheses_.front().tracks) {
            in_fov_count += in_fov(propagate_state(t.mean, dyn), sensor_) ? 1 : 0;
        }
        rates = adapt_birth_death_rates(m, in_fov_count, config_.birth_death);
    }

    std::vector<ParentResult> results(hypotheses_.size());
    parallel_for(hypotheses_.size(), config_.threads,
                 [&](std::size_t i) { results[i] = expand_parent(hypotheses_[i], i, frame, dyn, rates); });

    TrackerReport report;
    report.scan = scan_ + 1;
    report.time = frame.time;
    report.num_returns = m;
    report.rates = rates;
    for (const auto& r : results) report.parent_object_counts.push_back(static_cast<int>(r.associable.size()));
    report.hypothesis_count_bound =
        hypothesis_count_bound(report.parent_object_counts, m, rates.n_pixels,
                               {.births = rates.alpha > 0.0, .deaths = rates.beta > 0.0});

    std::vector<Hypothesis> children;
    for (std::size_t p = 0; p < results.size(); ++p) {
        const ParentResult& r = results[p];
        const Hypothesis& parent = hypotheses_[p];
        const int M = r.matrix.num_objects();
        for (const SampledChild& c : r.children) {
            std::vector<int> return_of(static_cast<std::size_t>(M), -1);
            for (int i = 0; i < m; ++i) {
                const Assignment& a = c.event.assignments[static_cast<std::size_t>(i)];
                if (a.kind == AssignmentKind::object) return_of[a.index] = i;
            }
            std::vector<char> dead(static_cast<std::size_t>(M), 0);
            for (std::uint32_t d : c.event.deaths) dead[d] = 1;

            Hypothesis h;
            h.id = HypothesisId{next_id_++};
            h.parent_id = parent.id;
            h.log_weight = parent.log_weight + c.log_score;
            h.tracks.reserve(r.predicted.size() + static_cast<std::size_t>(m));
            std::size_t col = 0;
            for (std::size_t t = 0; t < r.predicted.size(); ++t) {
                if (col < r.associable.size() && r.associable[col] == t) {
                    const auto j = col++;
                    if (dead[j]) continue;
                    if (return_of[j] >= 0) {
                        h.tracks.push_back(r.matrix.posterior(return_of[j], static_cast<int>(j)));
                    } else {
                        h.tracks.push_back(r.predicted[t]);
                    }
                } else {
                    h.tracks.push_back(r.predicted[t]);
                }
            }
            for (int i = 0; i < m; ++i) {
                if (c.event.assignments[static_cast<std::size_t>(i)].kind == AssignmentKind::birth) {
                    h.tracks.push_back(make_newborn(frame.returns[static_cast<std::size_t>(i)],
                                                    TrackLabel{next_label_++}, sensor_, config_.birth));
                }
            }
            children.push_back(std::move(h));
        }
    }
    report.num_children = children.size();

    if (children.empty()) {
        // Nothing explains the frame: keep the predicted parents, prior weights.
        report.degenerate = true;
        for (std::size_t p = 0; p < results.size(); ++p) hypotheses_[p].tracks = std::move(results[p].predicted);
    } else {
        std::vector<double> log_prior, log_lik;
        log_prior.reserve(children.size());
        log_lik.assign(children.size(), 0.0);
        for (const auto& h : children) log_prior.push_back(h.log_weight);
        const auto posterior = bayes_update_log(log_prior, log_lik);
        for (std::size_t i = 0; i < children.size(); ++i) children[i].log_weight = posterior[i];
        Rng prune_rng(derive_seed(seed_, scan_, 0x7072756E65ull));
        hypotheses_ = prune(std::move(children), config_.h_inf, config_.prune_strategy, &prune_rng);
    }

    time_ = frame.time;
    ++scan_;

    const Hypothesis& top = hypotheses_.front();
    report.top_hypothesis_id = top.id;
    report.top_weight = top.weight();
    report.estimates = top.tracks;
    report.estimated_count = static_cast<int>(top.tracks.size());
    report.num_hypotheses = hypotheses_.size();
    for (const auto& h : hypotheses_) {
        const double w = h.weight();
        report.weight_sum += w;
        if (w > 0.0) report.weight_entropy -= w * std::log(w);
    }
    return report;
}

}  // namespace hyptrack
