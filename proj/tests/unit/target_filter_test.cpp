#include "hyptrack/errors.hpp"
#include "hyptrack/simulator.hpp"
#include "hyptrack/target_filter.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hyptrack;

namespace {

StateCovariance random_psd(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g;
    Eigen::Matrix4d a;
    for (int i = 0; i < 16; ++i) a(i / 4, i % 4) = g(rng);
    return scale * a * a.transpose();
}

double rel_err(const StateVector& a, const StateVector& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(PropagateState, CircularOrbitReturnsAfterOnePeriod) {
    const double radius = 20000.0;
    const StateVector s = circular_state(radius, 0.4);
    DynamicsConfig cfg;
    cfg.dt = 2.0 * std::numbers::pi * std::sqrt(radius * radius * radius / kEarthMu);
    cfg.integrator_substeps = 1000;
    EXPECT_LT(rel_err(propagate_state(s, cfg), s), 1e-6);
}

TEST(PropagateState, ZeroDtIsIdentity) {
    const StateVector s = circular_state(7000.0, 1.0);
    DynamicsConfig cfg;
    cfg.dt = 0.0;
    EXPECT_EQ(propagate_state(s, cfg), s);
}

TEST(PropagateState, StraightLineWithoutGravity) {
    DynamicsConfig cfg;
    cfg.mu = 0.0;
    cfg.dt = 2.0;
    const StateVector out = propagate_state(StateVector(1, 0, 1, 0), cfg);
    EXPECT_NEAR((out - StateVector(3, 0, 1, 0)).norm(), 0.0, 1e-14);
}

TEST(PropagateState, ReversibleUnderNegativeDt) {
    DynamicsConfig fwd;
    fwd.dt = 60.0;
    DynamicsConfig back = fwd;
    back.dt = -60.0;
    for (double r : {7000.0, 20000.0, 42164.0}) {
        const StateVector s = circular_state(r, 0.3);
        EXPECT_LT(rel_err(propagate_state(propagate_state(s, fwd), back), s), 1e-6);
    }
}

TEST(PropagateState, SingularityNearCentre) {
    DynamicsConfig cfg;
    EXPECT_THROW((void)propagate_state(StateVector(0.5, 0.0, 0.0, 1.0), cfg), SingularityError);
}

TEST(PropagateState, DeterministicAcrossCalls) {
    DynamicsConfig cfg;
    const StateVector s = circular_state(15000.0, 2.0);
    EXPECT_EQ(propagate_state(s, cfg), propagate_state(s, cfg));
}

TEST(DynamicsConfig, RejectsInvalidValues) {
    DynamicsConfig cfg;
    cfg.integrator_substeps = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.q = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.mu = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

// Central differences of the RK4 map are the oracle for the analytic Jacobian.
TEST(PropagateWithJacobian, MatchesCentralFiniteDifferences) {
    DynamicsConfig cfg;
    cfg.dt = 60.0;
    for (double r : {7000.0, 20000.0}) {
        const StateVector s = circular_state(r, 1.1) + StateVector(3.0, -2.0, 0.01, -0.02);
        const auto [x, jac] = propagate_with_jacobian(s, cfg);
        EXPECT_EQ(x, propagate_state(s, cfg));
        for (int c = 0; c < 4; ++c) {
            const double h = 1e-4 * std::max(1.0, std::abs(s(c)));
            StateVector sp = s, sm = s;
            sp(c) += h;
            sm(c) -= h;
            const StateVector fd = (propagate_state(sp, cfg) - propagate_state(sm, cfg)) / (2.0 * h);
            for (int row = 0; row < 4; ++row) {
                EXPECT_NEAR(jac(row, c), fd(row), 1e-6 * std::max(1.0, std::abs(fd(row)))) << "row " << row << " col " << c;
            }
        }
    }
}

TEST(ProcessNoise, DiscreteWhiteAcceleration) {
    DynamicsConfig cfg;
    cfg.dt = 10.0;
    cfg.q = 2.0;
    const StateCovariance qd = process_noise(cfg);
    EXPECT_DOUBLE_EQ(qd(0, 0), 2.0 * 2500.0);
    EXPECT_DOUBLE_EQ(qd(0, 2), 2.0 * 500.0);
    EXPECT_DOUBLE_EQ(qd(2, 2), 2.0 * 100.0);
    EXPECT_DOUBLE_EQ(qd(0, 1), 0.0);
}

TEST(PredictTrack, LinearCaseIsExactKalmanPrediction) {
    std::mt19937_64 rng(3);
    DynamicsConfig cfg;
    cfg.mu = 0.0;
    cfg.dt = 7.5;
    GaussianTrack t{TrackLabel{9}, StateVector(1, 2, 0.3, -0.1), random_psd(rng)};
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = f(1, 3) = cfg.dt;
    const GaussianTrack out = predict_track(t, cfg);
    EXPECT_LT((out.covariance - f * t.covariance * f.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((out.mean - f * t.mean).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(out.label, t.label);
}

TEST(PredictTrack, ZeroDtIsIdentity) {
    std::mt19937_64 rng(4);
    DynamicsConfig cfg;
    cfg.dt = 0.0;
    const GaussianTrack t{TrackLabel{1}, circular_state(9000.0, 0.0), random_psd(rng)};
    const GaussianTrack out = predict_track(t, cfg);
    EXPECT_LT((out.mean - t.mean).norm(), 1e-12);
    EXPECT_LT((out.covariance - t.covariance).norm(), 1e-12);
}

TEST(PredictTrack, CovarianceStaysPsd) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ur(7000.0, 40000.0), uph(0.0, 6.28);
    DynamicsConfig cfg;
    cfg.q = 1e-9;
    for (int i = 0; i < 1000; ++i) {
        const GaussianTrack t{TrackLabel{1}, circular_state(ur(rng), uph(rng)), random_psd(rng, 1e-2)};
        const GaussianTrack out = predict_track(t, cfg);
        EXPECT_GE(min_eigenvalue(out.covariance), -1e-9);
        EXPECT_LT((out.covariance - out.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(UpdateTrack, LikelihoodAtModeForPointPrior) {
    SensorModel s;
    const GaussianTrack t{TrackLabel{1}, StateVector::Zero(), StateCovariance::Zero()};
    const TrackUpdate u = update_track(t, Measurement::Zero(), s);
    EXPECT_NEAR(u.likelihood, 1.0 / (2.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(u.log_likelihood, std::log(u.likelihood), 1e-12);
}

TEST(UpdateTrack, ZeroGainLimitKeepsPriorMean) {
    SensorModel s;
    const GaussianTrack t{TrackLabel{1}, StateVector(5, 5, 0, 0), StateCovariance::Zero()};
    const TrackUpdate u = update_track(t, Measurement(6, 4), s);
    EXPECT_LT((u.track.mean - t.mean).norm(), 1e-15);
}

TEST(UpdateTrack, LinearCaseMatchesKalmanClosedForm) {
    std::mt19937_64 rng(6);
    SensorModel s;
    s.r << 2.0, 0.3, 0.3, 1.0;
    const GaussianTrack t{TrackLabel{2}, StateVector(1, -1, 0.5, 0.2), random_psd(rng)};
    const Measurement z(1.7, -0.4);
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = h(1, 1) = 1.0;
    const Eigen::Matrix2d sk = h * t.covariance * h.transpose() + s.r;
    const Eigen::Matrix<double, 4, 2> k = t.covariance * h.transpose() * sk.inverse();
    const StateVector mean = t.mean + k * (z - h * t.mean);
    const StateCovariance cov = (Eigen::Matrix4d::Identity() - k * h) * t.covariance;
    const TrackUpdate u = update_track(t, z, s);
    EXPECT_LT((u.track.mean - mean).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((u.track.covariance - cov).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(u.track.label, t.label);
}

// Grid-quadrature Bayes rule over the position plane.
TEST(UpdateTrack, MatchesGridQuadrature) {
    SensorModel s;
    s.r << 1.5, 0.2, 0.2, 0.8;
    StateCovariance p = StateCovariance::Identity();
    p.topLeftCorner<2, 2>() << 2.0, 0.5, 0.5, 1.0;
    const GaussianTrack t{TrackLabel{1}, StateVector(0.3, -0.2, 0, 0), p};
    const Measurement z(1.1, 0.4);
    const TrackUpdate u = update_track(t, z, s);

    const Eigen::Matrix2d pp = p.topLeftCorner<2, 2>();
    const Eigen::Matrix2d pinv = pp.inverse(), rinv = s.r.inverse();
    const double step = 0.02;
    double mass = 0.0;
    Eigen::Vector2d m1 = Eigen::Vector2d::Zero();
    Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
    for (double x = -12.0; x <= 12.0; x += step) {
        for (double y = -12.0; y <= 12.0; y += step) {
            const Eigen::Vector2d v(x, y);
            const Eigen::Vector2d dp = v - t.mean.head<2>();
            const Eigen::Vector2d dz = z - v;
            const double w = std::exp(-0.5 * dp.dot(pinv * dp)) / (2 * std::numbers::pi * std::sqrt(pp.determinant())) *
                             std::exp(-0.5 * dz.dot(rinv * dz)) / (2 * std::numbers::pi * std::sqrt(s.r.determinant())) *
                             step * step;
            mass += w;
            m1 += w * v;
            m2 += w * v * v.transpose();
        }
    }
    const Eigen::Vector2d mean = m1 / mass;
    const Eigen::Matrix2d cov = m2 / mass - mean * mean.transpose();
    EXPECT_NEAR(u.likelihood, mass, 1e-3 * mass);
    EXPECT_LT((u.track.mean.head<2>() - mean).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT((u.track.covariance.topLeftCorner<2, 2>() - cov).cwiseAbs().maxCoeff(), 1e-3);
}

// Monte Carlo integral of the likelihood over z.
TEST(UpdateTrack, LikelihoodIntegratesToOne) {
    SensorModel s;
    StateCovariance p = StateCovariance::Identity() * 3.0;
    const GaussianTrack t{TrackLabel{1}, StateVector(10, 20, 0, 0), p};
    std::mt19937_64 rng(8);
    const double half = 16.0;
    std::uniform_real_distribution<double> ux(10 - half, 10 + half), uy(20 - half, 20 + half);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += update_track(t, Measurement(ux(rng), uy(rng)), s).likelihood;
    EXPECT_NEAR(sum / n * (2 * half) * (2 * half), 1.0, 0.02);
}

TEST(UpdateTrack, CovarianceStaysPsd) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    SensorModel s;
    for (int i = 0; i < 1000; ++i) {
        const GaussianTrack t{TrackLabel{1}, StateVector(g(rng), g(rng), 0, 0), random_psd(rng, 1e-3 + i * 1e-3)};
        const TrackUpdate u = update_track(t, Measurement(g(rng), g(rng)), s);
        EXPECT_GE(min_eigenvalue(u.track.covariance), -1e-9);
    }
}

TEST(UpdateTrack, SingularInnovationThrows) {
    SensorModel s;
    s.r.setZero();
    const GaussianTrack t{TrackLabel{1}, StateVector::Zero(), StateCovariance::Zero()};
    EXPECT_THROW((void)update_track(t, Measurement::Zero(), s), NumericalError);
}

TEST(InFov, BoresightAndBoundary) {
    SensorModel s;
    s.origin = Measurement(1.0, 1.0);
    s.boresight_angle = std::numbers::pi / 2.0;
    s.fov_half_angle = std::numbers::pi / 6.0;
    EXPECT_TRUE(in_fov(Measurement(1.0, 50.0), s));
    const double a = s.boresight_angle + s.fov_half_angle;
    EXPECT_TRUE(in_fov(Measurement(1.0 + 10.0 * std::cos(a), 1.0 + 10.0 * std::sin(a)), s));
    const double b = s.boresight_angle - s.fov_half_angle - 1e-6;
    EXPECT_FALSE(in_fov(Measurement(1.0 + 10.0 * std::cos(b), 1.0 + 10.0 * std::sin(b)), s));
    EXPECT_FALSE(in_fov(Measurement(1.0, -50.0), s));
}

TEST(InFov, HalfAnglePiSeesEverything) {
    SensorModel s;
    s.fov_half_angle = std::numbers::pi;
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g;
    for (int i = 0; i < 1000; ++i) EXPECT_TRUE(in_fov(Measurement(g(rng), g(rng)), s));
    EXPECT_TRUE(in_fov(Measurement(-1.0, 0.0), s));
}

TEST(InFov, RangeGate) {
    SensorModel s;
    s.max_range = 100.0;
    EXPECT_TRUE(in_fov(Measurement(99.0, 0.0), s));
    EXPECT_FALSE(in_fov(Measurement(101.0, 0.0), s));
}

TEST(InFov, PositionAtOriginThrows) {
    SensorModel s;
    s.origin = Measurement(3.0, 4.0);
    EXPECT_THROW((void)in_fov(Measurement(3.0, 4.0), s), std::invalid_argument);
}

TEST(FovArea, SectorArea) {
    SensorModel s;
    s.fov_half_angle = 0.25;
    s.max_range = 10.0;
    EXPECT_DOUBLE_EQ(fov_area(s), 25.0);
}

TEST(SensorModel, RejectsInvalidValues) {
    SensorModel s;
    s.p_d = 1.5;
    EXPECT_THROW(s.validate(), ConfigError);
    s = {};
    s.fov_half_angle = 0.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = {};
    s.r << 1.0, 2.0, 2.0, 1.0;
    EXPECT_THROW(s.validate(), ConfigError);
}
