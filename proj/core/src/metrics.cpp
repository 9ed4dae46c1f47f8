#include "hyptrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace hyptrack {

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0) return {};
    if (cols == 0) return std::vector<int>(static_cast<std::size_t>(rows), -1);

    // Potentials formulation on an n x n padded matrix, 1-based.
    const int n = std::max(rows, cols);
    const double pad = cost.cwiseAbs().maxCoeff() * 2.0 + 1.0;
    auto c = [&](int i, int j) { return (i <= rows && j <= cols) ? cost(i - 1, j - 1) : pad; };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> out(static_cast<std::size_t>(rows), -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] >= 1 && p[j] <= rows && j <= cols) out[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    }
    return out;
}

ScanScore score_scan(std::span<const GaussianTrack> estimates, const TruthSnapshot& truth, double gate_km) {
    ScanScore s;
    s.time = truth.time;
    s.estimated = static_cast<int>(estimates.size());
    s.truth = static_cast<int>(truth.objects.size());
    s.cardinality_error = s.estimated - s.truth;
    if (estimates.empty() || truth.objects.empty()) return s;

    Eigen::MatrixXd cost(estimates.size(), truth.objects.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        for (std::size_t j = 0; j < truth.objects.size(); ++j) {
            const double d = (estimates[i].mean.head<2>() - truth.objects[j].state.head<2>()).norm();
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::min(d, gate_km);
        }
    }
    const auto assign = solve_assignment(cost);
    for (std::size_t i = 0; i < assign.size(); ++i) {
        if (assign[i] < 0) continue;
        const double d = (estimates[i].mean.head<2>() - truth.objects[static_cast<std::size_t>(assign[i])].state.head<2>()).norm();
        if (d < gate_km) {
            ++s.matched;
            s.sum_sq_error += d * d;
        }
    }
    return s;
}

TrackingSummary summarize(std::vector<ScanScore> scans) {
    TrackingSummary out;
    double sq = 0.0;
    int matched = 0;
    double abs_card = 0.0;
    for (const auto& s : scans) {
        sq += s.sum_sq_error;
        matched += s.matched;
        abs_card += std::abs(s.cardinality_error);
    }
    out.position_rmse = matched > 0 ? std::sqrt(sq / matched) : 0.0;
    out.mean_abs_cardinality_error = scans.empty() ? 0.0 : abs_card / static_cast<double>(scans.size());
    out.scans = std::move(scans);
    return out;
}

}  // namespace hyptrack
