#pragma once

// Data-association matrix and hypothesis likelihoods.
//
// Matrix layout, (m+1) x (M+2), natural-log values:
//   rows 0..m-1     measurement returns in frame order
//   row m           DEATH row (proposal device only, see below)
//   cols 0..M-1     associable objects (predicted tracks)
//   col M           BIRTH
//   col M+1         CLUTTER
// The DEATH row carries log(beta) under each object, -inf under BIRTH and 0
// under CLUTTER (the "no death" slot). No score ever reads it: death mass
// enters through the child prior only.

#include "hyptrack/frame.hpp"
#include "hyptrack/hypothesis.hpp"
#include "hyptrack/target_filter.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace hyptrack {

struct ClutterModel {
    double density_value = 0.0;  ///< g(z), km^-2
    double expected_count = 0.0; ///< Poisson mean per scan

    /// Uniform spatial density 1 / FOV area.
    [[nodiscard]] static ClutterModel uniform(const SensorModel& sensor, double expected_count);
    void validate() const;
};

/// Canonical pdf of a newborn object: position uniform over the FOV, velocity
/// Gaussian around the circular-orbit velocity at the measured radius.
struct BirthModel {
    double velocity_std = 0.05;  ///< km/s per axis
    double mu = kEarthMu;
    bool prograde = true;        ///< counter-clockwise circular motion

    void validate() const;
};

/// Marginal likelihood of z under the newborn position pdf: 1 / FOV area
/// inside the FOV, 0 outside.
[[nodiscard]] double birth_likelihood(const Measurement& z, const SensorModel& sensor);

/// Newborn track after conditioning the birth pdf on its first return. The
/// position prior is flat, so the update reduces to mean = z, covariance = R
/// in position; velocity keeps its prior.
[[nodiscard]] GaussianTrack make_newborn(const Measurement& z, TrackLabel label, const SensorModel& sensor,
                                         const BirthModel& birth);

class DataAssociationMatrix {
public:
    DataAssociationMatrix() = default;
    DataAssociationMatrix(Eigen::MatrixXd log_entries, std::vector<TrackLabel> object_labels,
                          std::vector<GaussianTrack> posteriors);

    [[nodiscard]] int num_returns() const { return static_cast<int>(log_entries_.rows()) - 1; }
    [[nodiscard]] int num_objects() const { return static_cast<int>(log_entries_.cols()) - 2; }
    [[nodiscard]] int birth_column() const { return num_objects(); }
    [[nodiscard]] int clutter_column() const { return num_objects() + 1; }
    [[nodiscard]] int death_row() const { return num_returns(); }

    [[nodiscard]] double log_entry(int row, int col) const { return log_entries_(row, col); }
    [[nodiscard]] const Eigen::MatrixXd& log_entries() const { return log_entries_; }
    [[nodiscard]] const std::vector<TrackLabel>& object_labels() const { return object_labels_; }

    /// Updated track for (return, object); valid only where the entry is finite.
    [[nodiscard]] const GaussianTrack& posterior(int row, int col) const;

private:
    Eigen::MatrixXd log_entries_ = Eigen::MatrixXd::Constant(1, 2, 0.0);
    std::vector<TrackLabel> object_labels_;
    std::vector<GaussianTrack> posteriors_;  // row-major m x M
};

/// Builds the matrix for the given post-prediction associable tracks. Object
/// entries are update_track's log-likelihoods.
[[nodiscard]] DataAssociationMatrix build_matrix(std::span<const GaussianTrack> predicted,
                                                 const MeasurementFrame& frame, const SensorModel& sensor,
                                                 const ClutterModel& clutter, const BirthDeathConfig& birth_death);

/// log l = sum over returns of the selected entry; death selections add
/// nothing. Returns -inf (never NaN) if any selected entry is zero.
[[nodiscard]] double hypothesis_log_likelihood(const AssociationEvent& event, const DataAssociationMatrix& matrix);

struct MhtComparison {
    double log_eta_mht = 0.0;     ///< p_D^k (1-p_D)^(M-k) prod p(z | mean)
    double log_eta_hfisst = 0.0;  ///< association_prior(M, m, k) prod p(z | pdf)
    [[nodiscard]] double ratio() const;  ///< eta_hfisst / eta_mht
};

/// Mean-evaluated (MHT) versus marginal (HFISST) child likelihood for an
/// event without births or deaths. `predicted` must be the tracks the matrix
/// was built from.
[[nodiscard]] MhtComparison compare_mht_hfisst(const AssociationEvent& event,
                                               std::span<const GaussianTrack> predicted,
                                               const DataAssociationMatrix& matrix,
                                               const MeasurementFrame& frame, const SensorModel& sensor,
                                               const ClutterModel& clutter);

/// Debug dump: header row of column labels (object labels, B, C), then one
/// row per return plus the DEATH row, log values.
void write_matrix_csv(std::ostream& os, const DataAssociationMatrix& matrix);

}  // namespace hyptrack
