#pragma once

// Run artifacts: truth and frame CSVs, line-delimited JSON reports, the run
// manifest and figure-data tables.
//
// Every CSV starts with "# schema_version=N" and "# manifest=<file>" comment
// lines followed by a header row. Report files start with a header record.

#include "hyptrack/frame.hpp"
#include "hyptrack/metrics.hpp"
#include "hyptrack/simulator.hpp"
#include "hyptrack/tracker.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hyptrack {

inline constexpr int kRecordSchemaVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";

void write_truth_csv(std::ostream& out, const TruthHistory& truth);
[[nodiscard]] TruthHistory read_truth_csv(std::istream& in);

/// One row per return; a scan without returns is a row with empty x/y.
void write_frames_csv(std::ostream& out, std::span<const MeasurementFrame> frames);
[[nodiscard]] std::vector<MeasurementFrame> read_frames_csv(std::istream& in);

/// File helpers; open failures raise InputError.
[[nodiscard]] TruthHistory load_truth(const std::filesystem::path& path);
[[nodiscard]] std::vector<MeasurementFrame> load_frames(const std::filesystem::path& path);

struct RunManifest {
    std::string command;
    std::string scenario;
    std::string tracker_config_json;  ///< empty when not applicable
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string tool_version;
    std::string start_time;
    std::string end_time;
    std::vector<std::string> outputs;
};

/// ISO-8601 UTC time; SOURCE_DATE_EPOCH overrides the clock when set.
[[nodiscard]] std::string utc_timestamp();
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// First line of a reports file.
[[nodiscard]] std::string report_header_line(const std::string& scenario, const std::string& mode);
/// One report line. With `history`, the full hypothesis set is attached.
[[nodiscard]] std::string report_line(const TrackerReport& report,
                                      const std::vector<Hypothesis>* history = nullptr);
[[nodiscard]] std::string summary_line(const TrackingSummary& summary);

/// Fields of a scan report that figure generation needs.
struct ReportRow {
    std::size_t scan = 0;
    double time = 0.0;
    int num_returns = 0;
    int estimated_count = 0;
    double weight_sum = 0.0;
    std::string hypothesis_count_bound;  ///< decimal
    std::vector<int> parent_object_counts;
    std::vector<GaussianTrack> estimates;  ///< mean only; covariance zero
};

/// Reads the scan records of a reports file (header and summary skipped).
[[nodiscard]] std::vector<ReportRow> read_reports(std::istream& in);
[[nodiscard]] std::vector<ReportRow> load_reports(const std::filesystem::path& path);

/// scan,time,source,id,x_km,y_km with source "estimate" or "truth".
void write_fig_estimates(std::ostream& out, std::span<const ReportRow> rows, const TruthHistory* truth);
/// scan,time,num_returns,hypothesis_count_bound.
void write_fig_hypothesis_count(std::ostream& out, std::span<const ReportRow> rows);

/// Shortest round-trip decimal form of a double.
[[nodiscard]] std::string format_double(double v);

}  // namespace hyptrack
