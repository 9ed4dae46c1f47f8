#pragma once

// Per-object Gaussian filtering: planar two-body dynamics integrated with a
// fixed-step RK4 scheme, EKF prediction, and the position-measurement update
// together with its marginal (innovation) likelihood.

#include "hyptrack/types.hpp"

#include <limits>
#include <numbers>
#include <utility>

namespace hyptrack {

/// Standard Earth gravitational parameter, km^3/s^2.
inline constexpr double kEarthMu = 398600.4418;

struct DynamicsConfig {
    double mu = kEarthMu;          ///< gravitational parameter, km^3/s^2 (0 gives straight-line motion)
    double dt = 60.0;              ///< scan interval, s (may be negative for back-propagation)
    double q = 0.0;                ///< acceleration variance per axis, (km/s^2)^2
    int integrator_substeps = 10;  ///< RK4 steps per dt

    /// Throws ConfigError on violated invariants (mu >= 0, q >= 0, substeps >= 1).
    void validate() const;
};

struct SensorModel {
    Measurement origin = Measurement::Zero();  ///< sensor position, km
    double boresight_angle = 0.0;              ///< radians, measured from +x
    double fov_half_angle = std::numbers::pi / 12.0;
    /// Range limit of the field of view, km. Infinite range disables the
    /// gate (and leaves the FOV area undefined).
    double max_range = std::numeric_limits<double>::infinity();
    MeasurementCovariance r = MeasurementCovariance::Identity();
    double p_d = 0.9;

    void validate() const;
};

struct GaussianTrack {
    TrackLabel label;
    StateVector mean = StateVector::Zero();
    StateCovariance covariance = StateCovariance::Zero();
};

struct TrackUpdate {
    GaussianTrack track;
    double likelihood = 0.0;      ///< N(z; H m, H P H^T + R)
    double log_likelihood = 0.0;  ///< log of the same density, computed directly
};

/// Planar two-body acceleration -mu * r / |r|^3 appended to the velocity.
/// Throws SingularityError when mu > 0 and |r| < 1 km.
[[nodiscard]] StateVector two_body_derivative(const StateVector& s, double mu);

/// Fixed-step RK4 propagation of `s` over cfg.dt.
[[nodiscard]] StateVector propagate_state(const StateVector& s, const DynamicsConfig& cfg);

/// Propagated state together with the exact Jacobian of the discrete RK4 map.
[[nodiscard]] std::pair<StateVector, Eigen::Matrix4d> propagate_with_jacobian(
    const StateVector& s, const DynamicsConfig& cfg);

/// Discrete process noise G q G^T with G = [dt^2/2 I; dt I].
[[nodiscard]] StateCovariance process_noise(const DynamicsConfig& cfg);

/// EKF prediction. Label is preserved.
[[nodiscard]] GaussianTrack predict_track(const GaussianTrack& t, const DynamicsConfig& cfg);

/// EKF update with h(s) = (x, y). The likelihood is the exact marginal of z
/// for this linear measurement model. Throws NumericalError if the innovation
/// covariance is not positive definite.
[[nodiscard]] TrackUpdate update_track(const GaussianTrack& t, const Measurement& z,
                                       const SensorModel& sensor);

/// log N(z; mean, cov) for a 2-D Gaussian. Throws NumericalError when cov is
/// not positive definite.
[[nodiscard]] double gaussian_log_density(const Measurement& z, const Measurement& mean,
                                          const MeasurementCovariance& cov);

/// Angular FOV test (inclusive boundary) plus the optional range gate.
/// Throws std::invalid_argument if `position` coincides with the sensor.
[[nodiscard]] bool in_fov(const Measurement& position, const SensorModel& sensor);
[[nodiscard]] bool in_fov(const StateVector& s, const SensorModel& sensor);

/// Area of the FOV sector, km^2. Requires a finite max_range.
[[nodiscard]] double fov_area(const SensorModel& sensor);

/// Smallest eigenvalue after symmetrization; used by PSD checks.
[[nodiscard]] double min_eigenvalue(const StateCovariance& p);

}  // namespace hyptrack
