#include "cli.hpp"

#include "hyptrack/combinatorics.hpp"
#include "hyptrack/records.hpp"
#include "hyptrack/scenario_io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hyptrack;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("hyptrack_cli_" + std::string(info->name()) + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ScenarioFile f = preset_file("single-spawn");
        f.scenario.name = "short";
        f.scenario.duration = 600.0;
        f.scenario.spawn_events.clear();
        scenario_ = (dir_ / "short.json").string();
        std::ofstream(scenario_) << scenario_to_json(f);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string sub(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
    std::string scenario_;
};

}  // namespace

TEST_F(CliTest, SimulateTrackFigdata) {
    const Result s = run_cli({"simulate", "--scenario", scenario_, "--out", sub("sim")});
    ASSERT_EQ(s.code, 0) << s.err;
    for (const char* f : {"truth.csv", "frames.csv", "scenario.json", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(dir_ / "sim" / f)) << f;
    }
    const auto manifest = nlohmann::json::parse(slurp(dir_ / "sim" / "manifest.json"));
    EXPECT_EQ(manifest.at("command"), "simulate");
    EXPECT_FALSE(manifest.at("end_time").get<std::string>().empty());

    const Result t = run_cli({"track", "--scenario", sub("sim/scenario.json"), "--frames", sub("sim/frames.csv"),
                              "--truth", sub("sim/truth.csv"), "--out", sub("trk")});
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_NE(t.out.find("position RMSE"), std::string::npos);
    const auto rows = load_reports(dir_ / "trk" / "reports.jsonl");
    EXPECT_EQ(rows.size(), 10u);

    const Result g = run_cli({"figdata", "--reports", sub("trk/reports.jsonl"), "--truth", sub("sim/truth.csv"),
                              "--out", sub("fig")});
    ASSERT_EQ(g.code, 0) << g.err;
    const std::string est = slurp(dir_ / "fig" / "fig_estimates.csv");
    EXPECT_NE(est.find(",truth,"), std::string::npos);
    EXPECT_NE(est.find(",estimate,"), std::string::npos);

    // The count column can be recomputed from the per-parent object counts.
    const ScenarioFile f = load_scenario(scenario_);
    for (const auto& r : rows) {
        const BigInt want = hypothesis_count_bound(
            r.parent_object_counts, r.num_returns, f.tracker.birth_death.n_pixels,
            {.births = f.tracker.birth_death.alpha > 0.0, .deaths = f.tracker.birth_death.beta > 0.0});
        EXPECT_EQ(r.hypothesis_count_bound, to_decimal(want));
    }
}

TEST_F(CliTest, TrackIsDeterministic) {
    ASSERT_EQ(run_cli({"simulate", "--scenario", scenario_, "--out", sub("sim")}).code, 0);
    for (const char* mode : {"mcmc", "exhaustive"}) {
        for (const char* out : {"a", "b"}) {
            const Result r = run_cli({"track", "--scenario", scenario_, "--frames", sub("sim/frames.csv"), "--mode", mode,
                                      "--out", sub(std::string(mode) + out)});
            ASSERT_EQ(r.code, 0) << r.err;
        }
        EXPECT_EQ(slurp(dir_ / (std::string(mode) + "a") / "reports.jsonl"),
                  slurp(dir_ / (std::string(mode) + "b") / "reports.jsonl"))
            << mode;
    }
    // A different seed changes only the sampler, and the run still succeeds.
    EXPECT_EQ(run_cli({"track", "--scenario", scenario_, "--frames", sub("sim/frames.csv"), "--seed", "77", "--out",
                       sub("seeded")})
                  .code,
              0);
}

TEST_F(CliTest, SimulateIsDeterministic) {
    ASSERT_EQ(run_cli({"simulate", "--scenario", scenario_, "--out", sub("a")}).code, 0);
    ASSERT_EQ(run_cli({"simulate", "--scenario", scenario_, "--out", sub("b")}).code, 0);
    EXPECT_EQ(slurp(dir_ / "a" / "frames.csv"), slurp(dir_ / "b" / "frames.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "truth.csv"), slurp(dir_ / "b" / "truth.csv"));
    ASSERT_EQ(run_cli({"simulate", "--scenario", scenario_, "--seed", "5", "--out", sub("c")}).code, 0);
    EXPECT_NE(slurp(dir_ / "a" / "frames.csv"), slurp(dir_ / "c" / "frames.csv"));
}

TEST_F(CliTest, ConfigErrorsExitTwoAndNameField) {
    auto j = nlohmann::json::parse(slurp(scenario_));
    j["scan_interval"] = -5.0;
    std::ofstream(sub("bad.json")) << j.dump();
    const Result r = run_cli({"simulate", "--scenario", sub("bad.json"), "--out", sub("x")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("scan_interval"), std::string::npos);

    EXPECT_EQ(run_cli({"simulate"}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({"preset", "nope"}).code, 2);
    EXPECT_EQ(run_cli({"track", "--scenario", scenario_, "--frames", "f.csv", "--mode", "greedy"}).code, 2);
    EXPECT_EQ(run_cli({"track", "--scenario", scenario_, "--frames", "f.csv", "--alpha", "3"}).code, 2);

    std::ofstream(sub("tracker.json")) << R"({"h_inf": 3, "extra": true})";
    ASSERT_EQ(run_cli({"simulate", "--scenario", scenario_, "--out", sub("sim")}).code, 0);
    const Result t = run_cli({"track", "--scenario", scenario_, "--frames", sub("sim/frames.csv"), "--tracker-config",
                              sub("tracker.json"), "--out", sub("t")});
    EXPECT_EQ(t.code, 2);
    EXPECT_NE(t.err.find("extra"), std::string::npos);
}

TEST_F(CliTest, MissingInputsExitThree) {
    EXPECT_EQ(run_cli({"track", "--scenario", scenario_, "--frames", sub("missing.csv"), "--out", sub("t")}).code, 3);
    EXPECT_EQ(run_cli({"simulate", "--scenario", sub("missing.json"), "--out", sub("t")}).code, 3);
    EXPECT_EQ(run_cli({"figdata", "--reports", sub("missing.jsonl"), "--out", sub("t")}).code, 3);

    std::ofstream(sub("garbage.csv")) << "not,a,frames,file\n";
    EXPECT_EQ(run_cli({"track", "--scenario", scenario_, "--frames", sub("garbage.csv"), "--out", sub("t")}).code, 3);
}

TEST_F(CliTest, ExhaustiveLimitIsConfigError) {
    ASSERT_EQ(run_cli({"simulate", "--scenario", "sixty-object", "--out", sub("sim")}).code, 0);
    const Result r = run_cli({"track", "--scenario", "sixty-object", "--frames", sub("sim/frames.csv"), "--mode",
                              "exhaustive", "--out", sub("t")});
    EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, EmptyReportsGiveHeaderOnlyFigures) {
    std::ofstream(sub("empty.jsonl")) << report_header_line("none", "mcmc") << "\n";
    ASSERT_EQ(run_cli({"figdata", "--reports", sub("empty.jsonl"), "--out", sub("fig")}).code, 0);
    EXPECT_EQ(slurp(dir_ / "fig" / "fig_hypothesis_count.csv"),
              "# schema_version=1\n# manifest=manifest.json\nscan,time,num_returns,hypothesis_count_bound\n");
}

TEST_F(CliTest, OutDirFromEnvironment) {
    setenv(cli::kOutDirEnv, sub("envout").c_str(), 1);
    const Result r = run_cli({"simulate", "--scenario", scenario_});
    unsetenv(cli::kOutDirEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "envout" / "frames.csv"));
}

TEST_F(CliTest, PresetAndSelftest) {
    const Result p = run_cli({"preset", "twenty-object"});
    ASSERT_EQ(p.code, 0);
    EXPECT_EQ(parse_scenario(p.out).scenario.objects.size(), 20u);
    ASSERT_EQ(run_cli({"preset", "sixty-object", "--out", sub("sixty.json")}).code, 0);
    EXPECT_EQ(load_scenario(sub("sixty.json")).scenario.objects.size(), 60u);

    const Result s = run_cli({"selftest"});
    EXPECT_EQ(s.code, 0) << s.out;
    EXPECT_EQ(s.out.find("FAIL"), std::string::npos);

    EXPECT_EQ(run_cli({"--version"}).code, 0);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliTest, SixtyObjectBoundExceedsBillion) {
    ASSERT_EQ(run_cli({"simulate", "--scenario", "sixty-object", "--out", sub("sim")}).code, 0);
    std::istringstream in(slurp(dir_ / "sim" / "frames.csv"));
    auto frames = read_frames_csv(in);
    const ScenarioFile f = preset_file("sixty-object");
    const TruthHistory truth = generate_truth(f.scenario);
    ASSERT_EQ(truth.size(), frames.size() + 1);
    BigInt peak = 0;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        std::vector<int> counts{0};
        for (const auto& obj : truth[k + 1].objects) counts[0] += in_fov(obj.state, f.scenario.sensor);
        const BigInt b = hypothesis_count_bound(counts, static_cast<int>(frames[k].returns.size()),
                                                f.tracker.birth_death.n_pixels);
        if (b > peak) peak = b;
    }
    EXPECT_GT(peak, BigInt(1'000'000'000));
}
