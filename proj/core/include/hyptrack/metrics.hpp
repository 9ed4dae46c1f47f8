#pragma once

// Scoring of tracker output against simulated truth.

#include "hyptrack/simulator.hpp"
#include "hyptrack/target_filter.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace hyptrack {

/// Minimum-cost assignment of rows to columns (Hungarian method) on a
/// rectangular cost matrix. Entry i is the column given to row i, or -1 when
/// there are more rows than columns.
[[nodiscard]] std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

struct ScanScore {
    double time = 0.0;
    int estimated = 0;
    int truth = 0;
    int cardinality_error = 0;  ///< estimated - truth
    int matched = 0;            ///< assigned pairs within the gate
    double sum_sq_error = 0.0;  ///< over matched pairs, km^2
};

/// Assigns estimates to truth objects by position distance; pairs farther
/// apart than `gate_km` are left unmatched.
[[nodiscard]] ScanScore score_scan(std::span<const GaussianTrack> estimates, const TruthSnapshot& truth,
                                   double gate_km = 100.0);

struct TrackingSummary {
    std::vector<ScanScore> scans;
    double position_rmse = 0.0;  ///< over all matched pairs of all scans
    double mean_abs_cardinality_error = 0.0;
};

[[nodiscard]] TrackingSummary summarize(std::vector<ScanScore> scans);

}  // namespace hyptrack
