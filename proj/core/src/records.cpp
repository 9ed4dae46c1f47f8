#include "hyptrack/records.hpp"

#include "hyptrack/errors.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hyptrack {

using nlohmann::json;

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace {

constexpr const char* kTruthHeader = "time,object_id,x_km,y_km,vx_km_s,vy_km_s";
constexpr const char* kFramesHeader = "time,return_x_km,return_y_km,truth_tag";

void write_preamble(std::ostream& out, const char* header) {
    out << "# schema_version=" << kRecordSchemaVersion << "\n# manifest=" << kManifestName << "\n" << header << "\n";
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw InputError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

std::int64_t parse_int(const std::string& s, std::size_t line_no) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw InputError("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    }
    return v;
}

// Yields the data rows of a versioned CSV after checking its header.
template <typename Fn>
void read_csv(std::istream& in, const char* header, std::size_t columns, Fn&& on_row) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line.rfind("# schema_version=", 0) == 0 &&
                parse_int(line.substr(17), line_no) != kRecordSchemaVersion) {
                throw InputError("unsupported schema version");
            }
            continue;
        }
        if (!have_header) {
            if (line != header) throw InputError("line " + std::to_string(line_no) + ": expected header '" + header + "'");
            have_header = true;
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != columns) {
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
        }
        on_row(cells, line_no);
    }
    if (!have_header) throw InputError(std::string("missing header '") + header + "'");
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return in;
}

json track_json(const GaussianTrack& t) {
    return {{"label", t.label.value}, {"x", t.mean(0)}, {"y", t.mean(1)}, {"vx", t.mean(2)}, {"vy", t.mean(3)},
            {"sigma_x", std::sqrt(std::max(0.0, t.covariance(0, 0)))},
            {"sigma_y", std::sqrt(std::max(0.0, t.covariance(1, 1)))}};
}

}  // namespace

void write_truth_csv(std::ostream& out, const TruthHistory& truth) {
    write_preamble(out, kTruthHeader);
    for (const auto& snap : truth) {
        if (snap.objects.empty()) {
            out << format_double(snap.time) << ",,,,,\n";
            continue;
        }
        for (const auto& o : snap.objects) {
            out << format_double(snap.time) << ',' << o.id;
            for (int i = 0; i < 4; ++i) out << ',' << format_double(o.state(i));
            out << '\n';
        }
    }
}

TruthHistory read_truth_csv(std::istream& in) {
    TruthHistory out;
    read_csv(in, kTruthHeader, 6, [&](const std::vector<std::string>& c, std::size_t n) {
        const double t = parse_double(c[0], n);
        if (out.empty() || out.back().time != t) {
            if (!out.empty() && t < out.back().time) throw InputError("line " + std::to_string(n) + ": time goes backwards");
            out.push_back({t, {}});
        }
        if (c[1].empty()) return;
        TruthObject o;
        o.id = parse_int(c[1], n);
        for (int i = 0; i < 4; ++i) o.state(i) = parse_double(c[static_cast<std::size_t>(2 + i)], n);
        out.back().objects.push_back(o);
    });
    return out;
}

void write_frames_csv(std::ostream& out, std::span<const MeasurementFrame> frames) {
    write_preamble(out, kFramesHeader);
    for (const auto& f : frames) {
        if (f.returns.empty()) {
            out << format_double(f.time) << ",,,\n";
            continue;
        }
        for (std::size_t i = 0; i < f.returns.size(); ++i) {
            out << format_double(f.time) << ',' << format_double(f.returns[i](0)) << ','
                << format_double(f.returns[i](1)) << ',';
            if (!f.truth_tags.empty()) out << f.truth_tags[i];
            out << '\n';
        }
    }
}

std::vector<MeasurementFrame> read_frames_csv(std::istream& in) {
    std::vector<MeasurementFrame> out;
    read_csv(in, kFramesHeader, 4, [&](const std::vector<std::string>& c, std::size_t n) {
        const double t = parse_double(c[0], n);
        if (out.empty() || out.back().time != t) {
            if (!out.empty() && t < out.back().time) throw InputError("line " + std::to_string(n) + ": time goes backwards");
            out.push_back({t, {}, {}});
        }
        if (c[1].empty() && c[2].empty()) return;
        if (c[1].empty() || c[2].empty()) throw InputError("line " + std::to_string(n) + ": return needs both x and y");
        auto& f = out.back();
        f.returns.emplace_back(parse_double(c[1], n), parse_double(c[2], n));
        if (!c[3].empty()) {
            if (f.truth_tags.size() + 1 != f.returns.size()) {
                throw InputError("line " + std::to_string(n) + ": truth_tag must be given for all or no returns of a scan");
            }
            f.truth_tags.push_back(parse_int(c[3], n));
        } else if (!f.truth_tags.empty()) {
            throw InputError("line " + std::to_string(n) + ": truth_tag must be given for all or no returns of a scan");
        }
    });
    return out;
}

TruthHistory load_truth(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_truth_csv(in);
}

std::vector<MeasurementFrame> load_frames(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_frames_csv(in);
}

std::string utc_timestamp() {
    std::time_t t = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::array<char, 32> buf{};
    const auto n = std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf.data(), n);
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    json j = {
        {"schema_version", kRecordSchemaVersion},
        {"command", m.command},
        {"scenario", m.scenario},
        {"seed", m.seed},
        {"out_dir", m.out_dir},
        {"tool_version", m.tool_version},
        {"start_time", m.start_time},
        {"end_time", m.end_time},
        {"outputs", m.outputs},
    };
    j["tracker_config"] = m.tracker_config_json.empty() ? json(nullptr) : json::parse(m.tracker_config_json);
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

std::string report_header_line(const std::string& scenario, const std::string& mode) {
    json j = {{"record", "header"},
              {"schema_version", kRecordSchemaVersion},
              {"manifest", kManifestName},
              {"scenario", scenario},
              {"mode", mode}};
    return j.dump();
}

std::string report_line(const TrackerReport& r, const std::vector<Hypothesis>* history) {
    json estimates = json::array();
    for (const auto& t : r.estimates) estimates.push_back(track_json(t));
    json j = {
        {"record", "scan"},
        {"schema_version", kRecordSchemaVersion},
        {"scan", r.scan},
        {"time", r.time},
        {"num_returns", r.num_returns},
        {"top_hypothesis_id", r.top_hypothesis_id.value},
        {"top_weight", r.top_weight},
        {"estimated_count", r.estimated_count},
        {"num_hypotheses", r.num_hypotheses},
        {"num_children", r.num_children},
        {"weight_entropy", r.weight_entropy},
        {"weight_sum", r.weight_sum},
        {"alpha", r.rates.alpha},
        {"beta", r.rates.beta},
        {"degenerate", r.degenerate},
        {"parent_object_counts", r.parent_object_counts},
        {"hypothesis_count_bound", to_decimal(r.hypothesis_count_bound)},
        {"estimates", estimates},
    };
    if (history != nullptr) {
        json hyps = json::array();
        for (const auto& h : *history) {
            json labels = json::array();
            for (const auto& t : h.tracks) labels.push_back(t.label.value);
            hyps.push_back({{"id", h.id.value},
                            {"parent_id", h.parent_id ? json(h.parent_id->value) : json(nullptr)},
                            {"weight", h.weight()},
                            {"labels", labels}});
        }
        j["hypotheses"] = hyps;
    }
    return j.dump();
}

std::string summary_line(const TrackingSummary& s) {
    json card = json::array();
    json times = json::array();
    for (const auto& sc : s.scans) {
        card.push_back(sc.cardinality_error);
        times.push_back(sc.time);
    }
    json j = {{"record", "summary"},
              {"schema_version", kRecordSchemaVersion},
              {"time", times},
              {"cardinality_error", card},
              {"mean_abs_cardinality_error", s.mean_abs_cardinality_error},
              {"position_rmse_km", s.position_rmse}};
    return j.dump();
}

std::vector<ReportRow> read_reports(std::istream& in) {
    std::vector<ReportRow> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            if (j.at("schema_version").get<int>() != kRecordSchemaVersion) throw InputError("unsupported schema version");
            if (j.at("record") != "scan") continue;
            ReportRow r;
            r.scan = j.at("scan").get<std::size_t>();
            r.time = j.at("time").get<double>();
            r.num_returns = j.at("num_returns").get<int>();
            r.estimated_count = j.at("estimated_count").get<int>();
            r.weight_sum = j.at("weight_sum").get<double>();
            r.hypothesis_count_bound = j.at("hypothesis_count_bound").get<std::string>();
            r.parent_object_counts = j.at("parent_object_counts").get<std::vector<int>>();
            for (const auto& e : j.at("estimates")) {
                GaussianTrack t;
                t.label = TrackLabel{e.at("label").get<std::uint64_t>()};
                t.mean << e.at("x").get<double>(), e.at("y").get<double>(), e.at("vx").get<double>(),
                    e.at("vy").get<double>();
                r.estimates.push_back(t);
            }
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw InputError("reports line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ReportRow> load_reports(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_reports(in);
}

void write_fig_estimates(std::ostream& out, std::span<const ReportRow> rows, const TruthHistory* truth) {
    write_preamble(out, "scan,time,source,id,x_km,y_km");
    for (const auto& r : rows) {
        for (const auto& t : r.estimates) {
            out << r.scan << ',' << format_double(r.time) << ",estimate," << t.label.value << ','
                << format_double(t.mean(0)) << ',' << format_double(t.mean(1)) << '\n';
        }
        if (truth == nullptr) continue;
        for (const auto& snap : *truth) {
            if (std::abs(snap.time - r.time) > 1e-6) continue;
            for (const auto& o : snap.objects) {
                out << r.scan << ',' << format_double(r.time) << ",truth," << o.id << ','
                    << format_double(o.state(0)) << ',' << format_double(o.state(1)) << '\n';
            }
            break;
        }
    }
}

void write_fig_hypothesis_count(std::ostream& out, std::span<const ReportRow> rows) {
    write_preamble(out, "scan,time,num_returns,hypothesis_count_bound");
    for (const auto& r : rows) {
        out << r.scan << ',' << format_double(r.time) << ',' << r.num_returns << ',' << r.hypothesis_count_bound
            << '\n';
    }
}

}  // namespace hyptrack
