#include "hyptrack/hypothesis.hpp"

#include "hyptrack/combinatorics.hpp"
#include "hyptrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hyptrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// exponent * log(base) with 0^0 = 1.
double log_pow(double base, double exponent) {
    if (exponent == 0.0) return 0.0;
    if (base == 0.0) return kNegInf;
    return exponent * std::log(base);
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

}  // namespace

double Hypothesis::weight() const { return std::exp(log_weight); }

void validate_event(const AssociationEvent& event, int num_objects, int num_returns) {
    if (static_cast<int>(event.assignments.size()) != num_returns) {
        throw std::invalid_argument("event has " + std::to_string(event.assignments.size()) +
                                    " assignments for " + std::to_string(num_returns) + " returns");
    }
    const bool resolved = !event.birth_pixels.empty();
    std::vector<char> claimed(static_cast<std::size_t>(num_objects), 0);
    std::vector<char> slot_used(event.birth_pixels.size(), 0);
    for (const Assignment& a : event.assignments) {
        switch (a.kind) {
            case AssignmentKind::object:
                if (a.index >= static_cast<std::uint32_t>(num_objects))
                    throw std::invalid_argument("assignment references a missing object column");
                if (claimed[a.index]) throw std::invalid_argument("object assigned to two returns");
                claimed[a.index] = 1;
                break;
            case AssignmentKind::birth:
                if (resolved) {
                    if (a.index >= event.birth_pixels.size())
                        throw std::invalid_argument("birth assignment references a missing newborn slot");
                    if (slot_used[a.index]) throw std::invalid_argument("newborn assigned to two returns");
                    slot_used[a.index] = 1;
                } else if (a.index != 0) {
                    throw std::invalid_argument("pixel-marginal birth assignment must use slot 0");
                }
                break;
            case AssignmentKind::clutter:
                break;
        }
    }
    if (!std::is_sorted(event.deaths.begin(), event.deaths.end()) ||
        std::adjacent_find(event.deaths.begin(), event.deaths.end()) != event.deaths.end()) {
        throw std::invalid_argument("death set must be sorted and unique");
    }
    for (std::uint32_t d : event.deaths) {
        if (d >= static_cast<std::uint32_t>(num_objects)) throw std::invalid_argument("death of a missing object");
        if (claimed[d]) throw std::invalid_argument("dead object is assigned a return");
    }
    if (!std::is_sorted(event.birth_pixels.begin(), event.birth_pixels.end()) ||
        std::adjacent_find(event.birth_pixels.begin(), event.birth_pixels.end()) != event.birth_pixels.end()) {
        throw std::invalid_argument("birth pixels must be sorted and unique");
    }
}

EventCounts count_event(const AssociationEvent& event) {
    EventCounts c;
    for (const Assignment& a : event.assignments) {
        if (a.kind == AssignmentKind::object) ++c.associated_objects;
        if (a.kind == AssignmentKind::birth) ++c.detected_births;
    }
    c.deaths = static_cast<int>(event.deaths.size());
    if (!event.birth_pixels.empty()) {
        c.undetected_births = static_cast<int>(event.birth_pixels.size()) - c.detected_births;
    }
    return c;
}

std::string event_key(const AssociationEvent& event) {
    std::string key;
    key.reserve(5 * event.assignments.size() + 4 * (event.deaths.size() + event.birth_pixels.size()) + 2);
    for (const Assignment& a : event.assignments) {
        key.push_back(static_cast<char>(a.kind));
        append_u32(key, a.index);
    }
    key.push_back('|');
    for (std::uint32_t d : event.deaths) append_u32(key, d);
    key.push_back('|');
    for (std::uint32_t p : event.birth_pixels) append_u32(key, p);
    return key;
}

AssociationEvent marginalize_pixels(const AssociationEvent& event) {
    AssociationEvent out;
    out.assignments = event.assignments;
    for (Assignment& a : out.assignments) {
        if (a.kind == AssignmentKind::birth) a.index = 0;
    }
    out.deaths = event.deaths;
    return out;
}

void BirthDeathConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("birth_death.alpha", "must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("birth_death.beta", "must lie in [0, 1]");
    if (n_pixels < 1) throw ConfigError("birth_death.n_pixels", "must be >= 1");
}

double log_association_prior(int num_objects, int num_returns, int num_associated, double p_d) {
    if (num_associated < 0 || num_associated > std::min(num_objects, num_returns)) {
        throw std::invalid_argument("association_prior: k = " + std::to_string(num_associated) +
                                    " outside [0, min(m, M)]");
    }
    return log_pow(p_d, num_associated) + log_pow(1.0 - p_d, num_objects - num_associated) -
           (log_factorial(num_returns) - log_factorial(num_returns - num_associated));
}

double association_prior(int num_objects, int num_returns, int num_associated, double p_d) {
    return std::exp(log_association_prior(num_objects, num_returns, num_associated, p_d));
}

double log_birth_death_prior(std::int64_t n_births, std::int64_t n_deaths, std::int64_t num_objects,
                             const BirthDeathConfig& cfg) {
    if (n_births < 0 || n_births > cfg.n_pixels) throw std::invalid_argument("birth_death_prior: births out of range");
    if (n_deaths < 0 || n_deaths > num_objects) throw std::invalid_argument("birth_death_prior: deaths out of range");
    double lp = log_pow(cfg.alpha, static_cast<double>(n_births)) + log_pow(cfg.beta, static_cast<double>(n_deaths));
    if (cfg.mode == BirthDeathMode::normalized) {
        lp += log_pow(1.0 - cfg.alpha, static_cast<double>(cfg.n_pixels - n_births)) +
              log_pow(1.0 - cfg.beta, static_cast<double>(num_objects - n_deaths));
    }
    return lp;
}

double birth_death_prior(std::int64_t n_births, std::int64_t n_deaths, std::int64_t num_objects,
                         const BirthDeathConfig& cfg) {
    return std::exp(log_birth_death_prior(n_births, n_deaths, num_objects, cfg));
}

double log_grandchild_prior(const AssociationEvent& event, const PriorContext& ctx) {
    validate_event(event, ctx.num_objects, ctx.num_returns);
    const EventCounts c = count_event(event);
    const double lbd = log_birth_death_prior(c.births(), c.deaths, ctx.num_objects, ctx.birth_death);
    const int objects_after = ctx.num_objects + c.births() - c.deaths;
    return lbd + log_association_prior(objects_after, ctx.num_returns, c.detections(), ctx.p_d);
}

double log_child_prior(const EventCounts& c, const PriorContext& ctx) {
    if (c.undetected_births != 0) {
        throw std::invalid_argument("log_child_prior expects a pixel-marginal event");
    }
    const BirthDeathConfig& bd = ctx.birth_death;
    const std::int64_t nb = c.detected_births;
    if (nb > bd.n_pixels) return kNegInf;
    const std::int64_t free_pixels = bd.n_pixels - nb;

    // Ordered placements of the detected newborns into distinct pixels.
    double lp = log_factorial(bd.n_pixels) - log_factorial(free_pixels);
    lp += log_pow(bd.alpha, static_cast<double>(nb)) + log_pow(bd.beta, c.deaths);
    // Undetected newborns in the remaining pixels, summed in closed form.
    if (bd.mode == BirthDeathMode::per_instance) {
        lp += log_pow(1.0 + bd.alpha * (1.0 - ctx.p_d), static_cast<double>(free_pixels));
    } else {
        lp += log_pow(1.0 - bd.beta, ctx.num_objects - c.deaths);
        lp += log_pow(1.0 - bd.alpha * ctx.p_d, static_cast<double>(free_pixels));
    }
    const int objects_after = ctx.num_objects + c.detected_births - c.deaths;
    return lp + log_association_prior(objects_after, ctx.num_returns, c.detections(), ctx.p_d);
}

double log_child_prior(const AssociationEvent& event, const PriorContext& ctx) {
    validate_event(event, ctx.num_objects, ctx.num_returns);
    if (!event.birth_pixels.empty()) throw std::invalid_argument("log_child_prior expects a pixel-marginal event");
    return log_child_prior(count_event(event), ctx);
}

double child_prior(const AssociationEvent& event, const PriorContext& ctx) {
    return std::exp(log_child_prior(event, ctx));
}

double log_sum_exp(std::span<const double> v) {
    if (v.empty()) return kNegInf;
    const double mx = *std::max_element(v.begin(), v.end());
    if (mx == kNegInf) return kNegInf;
    if (std::isinf(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

std::vector<double> bayes_update_log(std::span<const double> log_prior, std::span<const double> log_likelihood) {
    if (log_prior.size() != log_likelihood.size()) throw std::invalid_argument("bayes_update_log: size mismatch");
    std::vector<double> joint(log_prior.size());
    for (std::size_t i = 0; i < joint.size(); ++i) {
        joint[i] = log_prior[i] + log_likelihood[i];
        if (std::isnan(joint[i])) joint[i] = kNegInf;
    }
    const double lz = log_sum_exp(joint);
    if (!std::isfinite(lz)) throw DegenerateUpdateError("every child has zero posterior mass");
    for (double& x : joint) x -= lz;
    return joint;
}

std::vector<double> bayes_update_weights(std::span<const std::pair<double, double>> children) {
    std::vector<double> lw, ll;
    lw.reserve(children.size());
    ll.reserve(children.size());
    for (const auto& [w, l] : children) {
        if (w < 0.0 || l < 0.0) throw std::invalid_argument("bayes_update_weights: negative input");
        lw.push_back(w > 0.0 ? std::log(w) : kNegInf);
        ll.push_back(l > 0.0 ? std::log(l) : kNegInf);
    }
    std::vector<double> out = bayes_update_log(lw, ll);
    for (double& x : out) x = std::exp(x);
    return out;
}

void normalize(std::vector<Hypothesis>& hypotheses) {
    std::vector<double> lw;
    lw.reserve(hypotheses.size());
    for (const auto& h : hypotheses) lw.push_back(h.log_weight);
    const double lz = log_sum_exp(lw);
    if (!std::isfinite(lz)) throw DegenerateUpdateError("cannot normalize hypotheses with zero total weight");
    for (auto& h : hypotheses) h.log_weight -= lz;
}

std::vector<Hypothesis> prune(std::vector<Hypothesis> hypotheses, std::size_t h_inf, PruneStrategy strategy,
                              std::mt19937_64* rng) {
    if (hypotheses.empty()) throw std::invalid_argument("prune: empty hypothesis list");
    if (h_inf == 0) throw std::invalid_argument("prune: h_inf must be positive");

    auto by_weight = [](const Hypothesis& a, const Hypothesis& b) {
        if (a.log_weight != b.log_weight) return a.log_weight > b.log_weight;
        return a.id < b.id;
    };

    if (hypotheses.size() > h_inf) {
        if (strategy == PruneStrategy::top_k) {
            std::partial_sort(hypotheses.begin(), hypotheses.begin() + static_cast<std::ptrdiff_t>(h_inf),
                              hypotheses.end(), by_weight);
            hypotheses.resize(h_inf);
        } else {
            if (rng == nullptr) throw std::invalid_argument("prune: sample strategy needs an RNG");
            // Weighted sampling without replacement via exponential keys:
            // key = log(u) / w, keep the h_inf largest.
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::vector<std::pair<double, std::size_t>> keys;
            keys.reserve(hypotheses.size());
            const double lmax = std::max_element(hypotheses.begin(), hypotheses.end(), [](auto& a, auto& b) {
                                    return a.log_weight < b.log_weight;
                                })->log_weight;
            for (std::size_t i = 0; i < hypotheses.size(); ++i) {
                const double w = std::exp(hypotheses[i].log_weight - lmax);
                double u = unif(*rng);
                while (u <= 0.0) u = unif(*rng);
                keys.emplace_back(w > 0.0 ? std::log(u) / w : kNegInf, i);
            }
            std::stable_sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return hypotheses[a.second].id < hypotheses[b.second].id;
            });
            std::vector<Hypothesis> kept;
            kept.reserve(h_inf);
            for (std::size_t i = 0; i < h_inf; ++i) kept.push_back(std::move(hypotheses[keys[i].second]));
            hypotheses = std::move(kept);
        }
    }
    std::sort(hypotheses.begin(), hypotheses.end(), by_weight);
    normalize(hypotheses);
    return hypotheses;
}

}  // namespace hyptrack
