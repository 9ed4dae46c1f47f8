#include "hyptrack/target_filter.hpp"

#include "hyptrack/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hyptrack {

namespace {

constexpr double kSingularRadiusKm = 1.0;
// Boundary slack for the inclusive FOV edge; absorbs atan2 rounding.
constexpr double kAngleSlack = 1e-12;

Eigen::Matrix4d two_body_jacobian(const StateVector& s, double mu) {
    Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
    j.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity();
    if (mu != 0.0) {
        const Eigen::Vector2d r = s.head<2>();
        const double rn = r.norm();
        const double rn3 = rn * rn * rn;
        const double rn5 = rn3 * rn * rn;
        j.block<2, 2>(2, 0) = mu * (3.0 * r * r.transpose() / rn5 - Eigen::Matrix2d::Identity() / rn3);
    }
    return j;
}

}  // namespace

void DynamicsConfig::validate() const {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("dynamics.mu", "must be finite and >= 0");
    if (!std::isfinite(dt)) throw ConfigError("dynamics.dt", "must be finite");
    if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("dynamics.q", "must be finite and >= 0");
    if (integrator_substeps < 1) throw ConfigError("dynamics.integrator_substeps", "must be >= 1");
}

void SensorModel::validate() const {
    if (!origin.allFinite()) throw ConfigError("sensor.origin", "must be finite");
    if (!std::isfinite(boresight_angle)) throw ConfigError("sensor.boresight_angle", "must be finite");
    if (!(fov_half_angle > 0.0 && fov_half_angle <= std::numbers::pi))
        throw ConfigError("sensor.fov_half_angle", "must lie in (0, pi]");
    if (!(max_range > 0.0)) throw ConfigError("sensor.max_range", "must be > 0");
    if (!r.allFinite() || std::abs(r(0, 1) - r(1, 0)) > 1e-12 * (1.0 + r.norm()))
        throw ConfigError("sensor.r", "must be finite and symmetric");
    if (Eigen::LLT<MeasurementCovariance>(r).info() != Eigen::Success)
        throw ConfigError("sensor.r", "must be positive definite");
    if (!(p_d >= 0.0 && p_d <= 1.0)) throw ConfigError("sensor.p_d", "must lie in [0, 1]");
}

StateVector two_body_derivative(const StateVector& s, double mu) {
    StateVector d;
    d.head<2>() = s.tail<2>();
    if (mu == 0.0) {
        d.tail<2>().setZero();
        return d;
    }
    const Eigen::Vector2d r = s.head<2>();
    const double rn = r.norm();
    if (!(rn >= kSingularRadiusKm)) {
        throw SingularityError("two-body dynamics evaluated at |r| = " + std::to_string(rn) + " km");
    }
    d.tail<2>() = -mu * r / (rn * rn * rn);
    return d;
}

StateVector propagate_state(const StateVector& s, const DynamicsConfig& cfg) {
    if (!s.allFinite()) throw std::invalid_argument("propagate_state: non-finite state");
    if (cfg.dt == 0.0) return s;
    const double h = cfg.dt / cfg.integrator_substeps;
    StateVector x = s;
    for (int i = 0; i < cfg.integrator_substeps; ++i) {
        const StateVector k1 = two_body_derivative(x, cfg.mu);
        const StateVector k2 = two_body_derivative(x + 0.5 * h * k1, cfg.mu);
        const StateVector k3 = two_body_derivative(x + 0.5 * h * k2, cfg.mu);
        const StateVector k4 = two_body_derivative(x + h * k3, cfg.mu);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

std::pair<StateVector, Eigen::Matrix4d> propagate_with_jacobian(const StateVector& s,
                                                                const DynamicsConfig& cfg) {
    if (!s.allFinite()) throw std::invalid_argument("propagate_with_jacobian: non-finite state");
    const Eigen::Matrix4d eye = Eigen::Matrix4d::Identity();
    if (cfg.dt == 0.0) return {s, eye};

    // Differentiates each RK4 stage, so the result is the exact Jacobian of
    // the discrete map rather than of the continuous flow.
    const double h = cfg.dt / cfg.integrator_substeps;
    StateVector x = s;
    Eigen::Matrix4d phi = eye;
    for (int i = 0; i < cfg.integrator_substeps; ++i) {
        const StateVector k1 = two_body_derivative(x, cfg.mu);
        const Eigen::Matrix4d j1 = two_body_jacobian(x, cfg.mu);

        const StateVector x2 = x + 0.5 * h * k1;

        const StateVector k2 = two_body_derivative(x2, cfg.mu);
        const Eigen::Matrix4d j2 = two_body_jacobian(x2, cfg.mu) * (eye + 0.5 * h * j1);

        const StateVector x3 = x + 0.5 * h * k2;
        const StateVector k3 = two_body_derivative(x3, cfg.mu);
        const Eigen::Matrix4d j3 = two_body_jacobian(x3, cfg.mu) * (eye + 0.5 * h * j2);

        const StateVector x4 = x + h * k3;
        const StateVector k4 = two_body_derivative(x4, cfg.mu);
        const Eigen::Matrix4d j4 = two_body_jacobian(x4, cfg.mu) * (eye + h * j3);

        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        phi = (eye + h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4)) * phi;
    }
    return {x, phi};
}

StateCovariance process_noise(const DynamicsConfig& cfg) {
    Eigen::Matrix<double, 4, 2> g = Eigen::Matrix<double, 4, 2>::Zero();
    g.block<2, 2>(0, 0) = 0.5 * cfg.dt * cfg.dt * Eigen::Matrix2d::Identity();
    g.block<2, 2>(2, 0) = cfg.dt * Eigen::Matrix2d::Identity();
    return cfg.q * g * g.transpose();
}

GaussianTrack predict_track(const GaussianTrack& t, const DynamicsConfig& cfg) {
    const auto [mean, f] = propagate_with_jacobian(t.mean, cfg);
    GaussianTrack out;
    out.label = t.label;
    out.mean = mean;
    StateCovariance p = f * t.covariance * f.transpose();
    if (cfg.q != 0.0) p += process_noise(cfg);
    out.covariance = 0.5 * (p + p.transpose());
    return out;
}

double gaussian_log_density(const Measurement& z, const Measurement& mean,
                            const MeasurementCovariance& cov) {
    const Eigen::LLT<MeasurementCovariance> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("gaussian_log_density: covariance not positive definite");
    }
    const Measurement nu = z - mean;
    const Measurement w = llt.matrixL().solve(nu);
    const auto& l = llt.matrixL();
    const double log_det = 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)));
    return -std::log(2.0 * std::numbers::pi) - 0.5 * log_det - 0.5 * w.squaredNorm();
}

TrackUpdate update_track(const GaussianTrack& t, const Measurement& z, const SensorModel& sensor) {
    if (!z.allFinite()) throw std::invalid_argument("update_track: non-finite measurement");
    const Measurement predicted = t.mean.head<2>();
    const MeasurementCovariance s = t.covariance.block<2, 2>(0, 0) + sensor.r;
    const Eigen::LLT<MeasurementCovariance> llt(s);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("update_track: innovation covariance not invertible");
    }

    const Eigen::Matrix<double, 4, 2> pht = t.covariance.block<4, 2>(0, 0);
    const Eigen::Matrix<double, 4, 2> gain = llt.solve(pht.transpose()).transpose();

    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h.block<2, 2>(0, 0) = Eigen::Matrix2d::Identity();
    const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * h;

    TrackUpdate out;
    out.track.label = t.label;
    out.track.mean = t.mean + gain * (z - predicted);
    // Joseph form keeps the posterior PSD.
    const StateCovariance p = ikh * t.covariance * ikh.transpose() + gain * sensor.r * gain.transpose();
    out.track.covariance = 0.5 * (p + p.transpose());

    out.log_likelihood = gaussian_log_density(z, predicted, s);
    out.likelihood = std::exp(out.log_likelihood);
    return out;
}

bool in_fov(const Measurement& position, const SensorModel& sensor) {
    const Measurement d = position - sensor.origin;
    const double range = d.norm();
    if (range == 0.0) throw std::invalid_argument("in_fov: position coincides with the sensor origin");
    if (range > sensor.max_range) return false;
    const Measurement b(std::cos(sensor.boresight_angle), std::sin(sensor.boresight_angle));
    const double cross = b.x() * d.y() - b.y() * d.x();
    const double angle = std::atan2(std::abs(cross), b.dot(d));
    return angle <= sensor.fov_half_angle + kAngleSlack;
}

bool in_fov(const StateVector& s, const SensorModel& sensor) {
    return in_fov(Measurement(s.head<2>()), sensor);
}

double fov_area(const SensorModel& sensor) {
    if (!std::isfinite(sensor.max_range)) {
        throw ConfigError("sensor.max_range", "FOV area requires a finite range");
    }
    return sensor.fov_half_angle * sensor.max_range * sensor.max_range;
}

double min_eigenvalue(const StateCovariance& p) {
    const StateCovariance sym = 0.5 * (p + p.transpose());
    return Eigen::SelfAdjointEigenSolver<StateCovariance>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace hyptrack
