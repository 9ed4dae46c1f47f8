#include "hyptrack/oracle.hpp"

#include "hyptrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hyptrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_limits(int M, int m, int N, const BigInt& count, const EnumerationLimit& limit) {
    if (M < 0 || m < 0 || N < 0) throw std::invalid_argument("enumeration: negative size");
    if (M > limit.max_objects || m > limit.max_returns || N > limit.max_pixels || count > limit.max_grandchildren) {
        throw LimitExceededError("enumeration of " + to_decimal(count) + " events exceeds the configured limit");
    }
}

// Assigns returns i.. to clutter or to any unused target, emitting each
// complete assignment vector.
void assign_returns(std::size_t i, const std::vector<Assignment>& targets, std::vector<char>& used,
                    std::vector<Assignment>& current, const AssociationEvent& base,
                    std::vector<AssociationEvent>& out) {
    if (i == current.size()) {
        AssociationEvent e = base;
        e.assignments = current;
        out.push_back(std::move(e));
        return;
    }
    current[i] = Assignment::clutter();
    assign_returns(i + 1, targets, used, current, base, out);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (used[t]) continue;
        used[t] = 1;
        current[i] = targets[t];
        assign_returns(i + 1, targets, used, current, base, out);
        used[t] = 0;
    }
}

void assign_marginal(std::size_t i, const std::vector<std::uint32_t>& survivors, std::vector<char>& used,
                     int births_left, std::vector<Assignment>& current, const AssociationEvent& base,
                     std::vector<AssociationEvent>& out) {
    if (i == current.size()) {
        AssociationEvent e = base;
        e.assignments = current;
        out.push_back(std::move(e));
        return;
    }
    current[i] = Assignment::clutter();
    assign_marginal(i + 1, survivors, used, births_left, current, base, out);
    if (births_left > 0) {
        current[i] = Assignment::birth();
        assign_marginal(i + 1, survivors, used, births_left - 1, current, base, out);
    }
    for (std::size_t t = 0; t < survivors.size(); ++t) {
        if (used[t]) continue;
        used[t] = 1;
        current[i] = Assignment::object(survivors[t]);
        assign_marginal(i + 1, survivors, used, births_left, current, base, out);
        used[t] = 0;
    }
}

std::vector<std::uint32_t> bits_of(std::uint64_t mask, int n) {
    std::vector<std::uint32_t> v;
    for (int b = 0; b < n; ++b) {
        if (mask & (1ull << b)) v.push_back(static_cast<std::uint32_t>(b));
    }
    return v;
}

}  // namespace

std::vector<AssociationEvent> enumerate_grandchildren(int num_objects, int num_returns, int num_pixels,
                                                      const EnumerationLimit& limit) {
    const BigInt count = count_grandchildren(num_objects, num_returns, num_pixels);
    check_limits(num_objects, num_returns, num_pixels, count, limit);

    std::vector<AssociationEvent> out;
    out.reserve(count.convert_to<std::size_t>());
    std::vector<Assignment> current(static_cast<std::size_t>(num_returns));
    for (std::uint64_t death_mask = 0; death_mask < (1ull << num_objects); ++death_mask) {
        const auto deaths = bits_of(death_mask, num_objects);
        for (std::uint64_t pixel_mask = 0; pixel_mask < (1ull << num_pixels); ++pixel_mask) {
            AssociationEvent base;
            base.deaths = deaths;
            base.birth_pixels = bits_of(pixel_mask, num_pixels);

            std::vector<Assignment> targets;
            for (int j = 0; j < num_objects; ++j) {
                if (!(death_mask & (1ull << j))) targets.push_back(Assignment::object(static_cast<std::uint32_t>(j)));
            }
            for (std::size_t s = 0; s < base.birth_pixels.size(); ++s) {
                targets.push_back(Assignment::birth(static_cast<std::uint32_t>(s)));
            }
            std::vector<char> used(targets.size(), 0);
            assign_returns(0, targets, used, current, base, out);
        }
    }
    return out;
}

std::vector<AssociationEvent> enumerate_children(int num_objects, int num_returns, int num_pixels,
                                                 GrandchildCountOptions options, const EnumerationLimit& limit) {
    if (num_objects > limit.max_objects || num_returns > limit.max_returns || num_pixels > limit.max_pixels) {
        throw LimitExceededError("enumeration exceeds the configured size limits");
    }

    std::vector<AssociationEvent> out;
    std::vector<Assignment> current(static_cast<std::size_t>(num_returns));
    const std::uint64_t death_masks = options.deaths ? (1ull << num_objects) : 1ull;
    const int births = options.births ? std::min(num_pixels, num_returns) : 0;
    for (std::uint64_t death_mask = 0; death_mask < death_masks; ++death_mask) {
        AssociationEvent base;
        base.deaths = bits_of(death_mask, num_objects);
        std::vector<std::uint32_t> survivors;
        for (int j = 0; j < num_objects; ++j) {
            if (!(death_mask & (1ull << j))) survivors.push_back(static_cast<std::uint32_t>(j));
        }
        std::vector<char> used(survivors.size(), 0);
        assign_marginal(0, survivors, used, births, current, base, out);
        if (out.size() > limit.max_grandchildren) {
            throw LimitExceededError("enumeration of children exceeds the configured limit");
        }
    }
    return out;
}

std::vector<AssociationEvent> enumerate_associations(int num_objects, int num_returns) {
    return enumerate_children(num_objects, num_returns, 0, {.births = false, .deaths = false});
}

double oracle_grandchild_prior(const AssociationEvent& event, int num_objects, int num_returns, double p_d,
                               const BirthDeathConfig& bd) {
    const int nb = static_cast<int>(event.birth_pixels.size());
    const int nd = static_cast<int>(event.deaths.size());
    int k = 0;
    for (const Assignment& a : event.assignments) k += a.kind != AssignmentKind::clutter;
    const int objects_after = num_objects + nb - nd;

    double prior = std::pow(bd.alpha, nb) * std::pow(bd.beta, nd);
    if (bd.mode == BirthDeathMode::normalized) {
        prior *= std::pow(1.0 - bd.alpha, static_cast<double>(bd.n_pixels - nb)) *
                 std::pow(1.0 - bd.beta, num_objects - nd);
    }
    double falling = 1.0;  // m (m-1) ... (m-k+1) = C(m,k) k!
    for (int i = 0; i < k; ++i) falling *= num_returns - i;
    prior *= std::pow(p_d, k) * std::pow(1.0 - p_d, objects_after - k) / falling;
    return prior;
}

std::vector<WeightedEvent> exact_posterior(const DataAssociationMatrix& matrix, double p_d,
                                           const BirthDeathConfig& birth_death, const EnumerationLimit& limit) {
    const int M = matrix.num_objects();
    const int m = matrix.num_returns();
    const auto events = enumerate_grandchildren(M, m, static_cast<int>(birth_death.n_pixels), limit);

    std::vector<WeightedEvent> out;
    out.reserve(events.size());
    double max_log = kNegInf;
    for (const auto& e : events) {
        const double prior = oracle_grandchild_prior(e, M, m, p_d, birth_death);
        double log_mass = prior > 0.0 ? std::log(prior) : kNegInf;
        for (int i = 0; i < m && log_mass != kNegInf; ++i) {
            const Assignment& a = e.assignments[static_cast<std::size_t>(i)];
            const int col = a.kind == AssignmentKind::object  ? static_cast<int>(a.index)
                            : a.kind == AssignmentKind::birth ? matrix.birth_column()
                                                              : matrix.clutter_column();
            log_mass += matrix.log_entry(i, col);
        }
        if (std::isnan(log_mass)) log_mass = kNegInf;
        max_log = std::max(max_log, log_mass);
        out.push_back({e, log_mass, 0.0});
    }
    if (max_log == kNegInf) throw DegenerateUpdateError("exact_posterior: zero total mass");
    double total = 0.0;
    for (auto& w : out) {
        w.weight = std::exp(w.log_mass - max_log);
        total += w.weight;
    }
    for (auto& w : out) w.weight /= total;
    return out;
}

std::map<std::string, double> marginal_posterior(const std::vector<WeightedEvent>& grandchildren) {
    std::map<std::string, double> out;
    for (const auto& g : grandchildren) {
        // Undetected newborns carry no assignment; dropping pixel ids merges
        // every placement onto the marginal event.
        out[event_key(marginalize_pixels(g.event))] += g.weight;
    }
    return out;
}

double tv_distance(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
    double sum = 0.0;
    auto ip = p.begin();
    auto iq = q.begin();
    while (ip != p.end() || iq != q.end()) {
        if (iq == q.end() || (ip != p.end() && ip->first < iq->first)) {
            sum += std::abs(ip->second);
            ++ip;
        } else if (ip == p.end() || iq->first < ip->first) {
            sum += std::abs(iq->second);
            ++iq;
        } else {
            sum += std::abs(ip->second - iq->second);
            ++ip;
            ++iq;
        }
    }
    return 0.5 * sum;
}

}  // namespace hyptrack
