#pragma once

#include "hyptrack/types.hpp"

#include <cstdint>
#include <vector>

namespace hyptrack {

/// Provenance tag for clutter returns in MeasurementFrame::truth_tags.
inline constexpr std::int64_t kClutterTag = -1;

/// One sensor scan. `truth_tags` is either empty (unknown) or parallel to
/// `returns`, holding the originating truth object id or kClutterTag; it is
/// used for scoring only and never read by the tracker.
struct MeasurementFrame {
    double time = 0.0;
    std::vector<Measurement> returns;
    std::vector<std::int64_t> truth_tags;
};

}  // namespace hyptrack
