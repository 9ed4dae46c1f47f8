#include "cli.hpp"

#include "hyptrack/combinatorics.hpp"
#include "hyptrack/errors.hpp"
#include "hyptrack/metrics.hpp"
#include "hyptrack/records.hpp"
#include "hyptrack/scenario_io.hpp"
#include "hyptrack/simulator.hpp"
#include "hyptrack/tracker.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef HYPTRACK_VERSION
#define HYPTRACK_VERSION "0.0.0"
#endif

namespace hyptrack::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string scenario;
    std::string frames;
    std::string truth;
    std::string reports;
    std::string tracker_config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::optional<std::size_t> h_inf;
    std::optional<double> alpha;
    std::optional<double> beta;
    bool adapt_rates = false;
    bool history = false;
    std::string preset_name;
};

fs::path out_dir(const Options& o) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
    return "hyptrack-out";
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    return f;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunManifest begin_manifest(const std::string& command, const Options& o, const fs::path& dir) {
    fs::create_directories(dir);
    RunManifest m;
    m.command = command;
    m.scenario = o.scenario;
    m.out_dir = dir.string();
    m.tool_version = HYPTRACK_VERSION;
    m.start_time = utc_timestamp();
    write_manifest(dir / kManifestName, m);
    return m;
}

void finish_manifest(RunManifest& m, const fs::path& dir) {
    m.end_time = utc_timestamp();
    write_manifest(dir / kManifestName, m);
}

int cmd_simulate(const Options& o, std::ostream& out) {
    ScenarioFile file = load_scenario_or_preset(o.scenario);
    if (o.seed) file.scenario.seed = *o.seed;
    const fs::path dir = out_dir(o);
    RunManifest m = begin_manifest("simulate", o, dir);
    m.seed = file.scenario.seed;

    const Simulation sim = simulate(file.scenario);
    {
        auto f = open_output(dir / "truth.csv");
        write_truth_csv(f, sim.truth);
    }
    {
        auto f = open_output(dir / "frames.csv");
        write_frames_csv(f, sim.frames);
    }
    {
        auto f = open_output(dir / "scenario.json");
        f << scenario_to_json(file);
    }
    m.outputs = {"truth.csv", "frames.csv", "scenario.json"};
    finish_manifest(m, dir);
    out << "simulated " << sim.frames.size() << " scans into " << dir.string() << "\n";
    return kOk;
}

int cmd_track(const Options& o, std::ostream& out) {
    ScenarioFile file = load_scenario_or_preset(o.scenario);
    TrackerConfig cfg = o.tracker_config.empty() ? file.tracker : parse_tracker_config(read_file(o.tracker_config));
    if (!o.mode.empty()) cfg.mode = o.mode == "exhaustive" ? TrackerMode::exhaustive : TrackerMode::mcmc;
    if (o.h_inf) cfg.h_inf = *o.h_inf;
    if (o.alpha) cfg.birth_death.alpha = *o.alpha;
    if (o.beta) cfg.birth_death.beta = *o.beta;
    if (o.adapt_rates) cfg.adapt_rates = true;
    cfg.validate();
    const std::uint64_t seed = o.seed.value_or(file.scenario.seed);

    const auto frames = load_frames(o.frames);
    std::optional<TruthHistory> truth;
    if (!o.truth.empty()) truth = load_truth(o.truth);

    const fs::path dir = out_dir(o);
    RunManifest m = begin_manifest("track", o, dir);
    m.seed = seed;
    m.tracker_config_json = tracker_config_to_json(cfg);
    write_manifest(dir / kManifestName, m);

    Tracker tracker(cfg, file.scenario.sensor, file.scenario.dynamics, file.scenario.clutter,
                    initial_tracks(file.scenario), 0.0, seed);
    auto reports = open_output(dir / "reports.jsonl");
    reports << report_header_line(file.scenario.name, cfg.mode == TrackerMode::mcmc ? "mcmc" : "exhaustive") << '\n';

    std::vector<ScanScore> scores;
    for (const auto& frame : frames) {
        const TrackerReport r = tracker.step(frame);
        reports << report_line(r, o.history ? &tracker.hypotheses() : nullptr) << '\n';
        if (truth) {
            const TruthSnapshot* snap = nullptr;
            for (const auto& s : *truth) {
                if (std::abs(s.time - frame.time) <= 1e-6) {
                    snap = &s;
                    break;
                }
            }
            if (snap == nullptr) throw InputError("truth has no snapshot at frame time " + format_double(frame.time));
            scores.push_back(score_scan(r.estimates, *snap));
        }
    }
    m.outputs = {"reports.jsonl"};
    if (truth) {
        const TrackingSummary summary = summarize(std::move(scores));
        reports << summary_line(summary) << '\n';
        out << "final cardinality error "
            << (summary.scans.empty() ? 0 : summary.scans.back().cardinality_error) << ", position RMSE "
            << format_double(summary.position_rmse) << " km\n";
    }
    reports.close();
    finish_manifest(m, dir);
    out << "tracked " << frames.size() << " scans into " << dir.string() << "\n";
    return kOk;
}

int cmd_figdata(const Options& o, std::ostream& out) {
    const auto rows = load_reports(o.reports);
    std::optional<TruthHistory> truth;
    if (!o.truth.empty()) truth = load_truth(o.truth);
    const fs::path dir = out_dir(o);
    RunManifest m = begin_manifest("figdata", o, dir);
    {
        auto f = open_output(dir / "fig_estimates.csv");
        write_fig_estimates(f, rows, truth ? &*truth : nullptr);
    }
    {
        auto f = open_output(dir / "fig_hypothesis_count.csv");
        write_fig_hypothesis_count(f, rows);
    }
    m.outputs = {"fig_estimates.csv", "fig_hypothesis_count.csv"};
    finish_manifest(m, dir);
    out << "wrote figure data for " << rows.size() << " scans into " << dir.string() << "\n";
    return kOk;
}

int cmd_selftest(std::ostream& out) {
    int failures = 0;
    auto check = [&](bool ok, const std::string& name) {
        out << (ok ? "ok   " : "FAIL ") << name << "\n";
        failures += ok ? 0 : 1;
    };
    check(count_associations(10, 5) == 63591, "count_associations(10, 5) = 63591");
    check(count_grandchildren(0, 0, 0) == 1, "count_grandchildren(0, 0, 0) = 1");
    check(std::abs(association_prior(2, 2, 2, 0.9) - 0.405) < 1e-12, "association_prior(2, 2, 2, 0.9) = 0.405");

    ScenarioFile file = preset_file("single-spawn");
    file.scenario.duration = 600.0;
    file.scenario.spawn_events.clear();
    const Simulation sim = simulate(file.scenario);
    Tracker tracker(file.tracker, file.scenario.sensor, file.scenario.dynamics, file.scenario.clutter,
                    initial_tracks(file.scenario), 0.0, 1);
    bool simplex = true;
    for (const auto& f : sim.frames) simplex = simplex && std::abs(tracker.step(f).weight_sum - 1.0) < 1e-12;
    check(simplex, "tracker weights stay on the simplex");
    return failures == 0 ? kOk : kNumericalError;
}

int cmd_preset(const Options& o, std::ostream& out) {
    const std::string text = scenario_to_json(preset_file(o.preset_name));
    if (o.out.empty()) {
        out << text;
    } else {
        auto f = open_output(o.out);
        f << text;
    }
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hypothesis-level multi-target tracker with MCMC data association"};
    app.set_version_flag("--version", HYPTRACK_VERSION);
    app.require_subcommand(1);
    Options o;

    auto* sim = app.add_subcommand("simulate", "Generate truth and sensor frames for a scenario");
    sim->add_option("--scenario", o.scenario, "Scenario JSON file or preset name")->required();
    sim->add_option("--out", o.out, "Output directory (default $HYPTRACK_OUT_DIR)");
    sim->add_option("--seed", o.seed, "Override the scenario seed");

    auto* track = app.add_subcommand("track", "Run the tracker over a frames file");
    track->add_option("--scenario", o.scenario, "Scenario JSON file or preset name")->required();
    track->add_option("--frames", o.frames, "Frames CSV")->required();
    track->add_option("--truth", o.truth, "Truth CSV for scoring");
    track->add_option("--tracker-config", o.tracker_config, "Tracker JSON overriding the scenario's section");
    track->add_option("--out", o.out, "Output directory (default $HYPTRACK_OUT_DIR)");
    track->add_option("--seed", o.seed, "Tracker seed (default: scenario seed)");
    track->add_option("--mode", o.mode, "Child generation")->check(CLI::IsMember({"mcmc", "exhaustive"}));
    track->add_option("--h-inf", o.h_inf, "Hypotheses kept per scan")->check(CLI::PositiveNumber);
    track->add_option("--alpha", o.alpha, "Per-pixel birth probability")->check(CLI::Range(0.0, 1.0));
    track->add_option("--beta", o.beta, "Per-object death probability")->check(CLI::Range(0.0, 1.0));
    track->add_flag("--adapt-rates", o.adapt_rates, "Scale alpha and beta with the return count");
    track->add_flag("--history", o.history, "Attach the full hypothesis set to every report");

    auto* fig = app.add_subcommand("figdata", "Emit figure tables from a reports file");
    fig->add_option("--reports", o.reports, "Reports JSONL")->required();
    fig->add_option("--truth", o.truth, "Truth CSV");
    fig->add_option("--out", o.out, "Output directory (default $HYPTRACK_OUT_DIR)");

    auto* self = app.add_subcommand("selftest", "Quick internal consistency checks");

    auto* pre = app.add_subcommand("preset", "Print a shipped preset as scenario JSON");
    pre->add_option("name", o.preset_name, "Preset name")->required()->check(CLI::IsMember(preset_names()));
    pre->add_option("--out", o.out, "Write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o, out);
        if (track->parsed()) return cmd_track(o, out);
        if (fig->parsed()) return cmd_figdata(o, out);
        if (self->parsed()) return cmd_selftest(out);
        if (pre->parsed()) return cmd_preset(o, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const LimitExceededError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    }
    return kConfigError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("hyptrack");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hyptrack::cli
