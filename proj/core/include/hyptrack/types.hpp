#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <functional>

namespace hyptrack {

/// Planar state (x, y, vx, vy) in km and km/s.
using StateVector = Eigen::Vector4d;
using StateCovariance = Eigen::Matrix4d;
using Measurement = Eigen::Vector2d;
using MeasurementCovariance = Eigen::Matrix2d;

/// Persistent identity of one tracked object. Never reused.
struct TrackLabel {
    std::uint64_t value = 0;
    friend auto operator<=>(const TrackLabel&, const TrackLabel&) = default;
};

struct HypothesisId {
    std::uint64_t value = 0;
    friend auto operator<=>(const HypothesisId&, const HypothesisId&) = default;
};

}  // namespace hyptrack

template <>
struct std::hash<hyptrack::TrackLabel> {
    std::size_t operator()(const hyptrack::TrackLabel& l) const noexcept {
        return std::hash<std::uint64_t>{}(l.value);
    }
};
