#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "nomadet/config.hpp"
#include "nomadet/datapipe.hpp"

using namespace nomadet;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("nomadet_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string s(const fs::path& p) { return p.string(); }

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(run({"generate"}).code, cli::kUsage);
    EXPECT_EQ(run({"generate", "-o", "x", "--bogus"}).code, cli::kUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(Cli, SweepRequiresSeed) {
    const auto r = run({"sweep", "--out", s(temp_dir("noseed"))});
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_NE(r.err.find("--seed"), std::string::npos);
}

TEST(Cli, BadConfigValuesAreUsageErrors) {
    const auto dir = temp_dir("badcfg");
    std::ofstream(dir / "c.json") << R"({"snr_step": -1})";
    EXPECT_EQ(run({"sweep", "--seed", "1", "--config", s(dir / "c.json"), "--out", s(dir / "r")}).code, cli::kUsage);
    std::ofstream(dir / "d.json") << R"({"unknown": 1})";
    EXPECT_EQ(run({"sweep", "--seed", "1", "--config", s(dir / "d.json")}).code, cli::kUsage);
    std::ofstream(dir / "e.json") << "{ not json";
    EXPECT_EQ(run({"sweep", "--seed", "1", "--config", s(dir / "e.json")}).code, cli::kUsage);
    fs::remove_all(dir);
}

TEST(Cli, DataErrors) {
    const auto dir = temp_dir("data");
    std::ofstream(dir / "junk.nmd1") << "JUNKJUNKJUNK";
    EXPECT_EQ(run({"inspect", "-d", s(dir / "junk.nmd1"), "-o", s(dir / "pgm")}).code, cli::kDataError);
    std::ofstream(dir / "short.nmd1") << "NMD1";
    EXPECT_EQ(run({"inspect", "-d", s(dir / "short.nmd1"), "-o", s(dir / "pgm")}).code, cli::kDataError);
    EXPECT_EQ(run({"report", s(dir)}).code, cli::kDataError);
    fs::remove_all(dir);
}

TEST(Cli, NumericFailure) {
    const auto dir = temp_dir("nan");
    Dataset d;
    d.grid_size = 100;
    for (int i = 0; i < 12; ++i) {
        LabeledSample smp;
        smp.label = static_cast<std::uint8_t>(i % 4);
        smp.diagram.grid_size = 100;
        smp.diagram.grid.assign(100 * 100, std::numeric_limits<float>::quiet_NaN());
        d.samples.push_back(smp);
    }
    save_dataset(d, dir / "nan.nmd1");
    const auto r = run({"train", "-d", s(dir / "nan.nmd1"), "-o", s(dir / "m.nmdl"), "--epochs", "1"});
    EXPECT_EQ(r.code, cli::kNumericFailure) << r.err;
    fs::remove_all(dir);
}

TEST(Cli, GenerateInspectTrainEval) {
    const auto dir = temp_dir("flow");
    const auto data = s(dir / "d.nmd1");
    auto r = run({"generate", "-o", data, "--seed", "3", "--samples-per-class", "4", "--symbols-per-frame", "256",
                  "--snr", "14", "--near", "qam16"});
    ASSERT_EQ(r.code, 0) << r.err;
    ASSERT_TRUE(fs::exists(manifest_path(data)));
    const auto ds = load_dataset(data);
    EXPECT_EQ(ds.samples.size(), 16U);
    EXPECT_EQ(ds.samples[0].snr_db, 14.0F);
    {
        std::ifstream is(manifest_path(data));
        const auto j = Json::parse(is);
        EXPECT_EQ(j["scenario"]["near_schemes"][0], "qam16");
        EXPECT_EQ(j["scenario"]["seed"], 3);
    }

    r = run({"inspect", "-d", data, "-o", s(dir / "pgm"), "--count", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::distance(fs::directory_iterator(dir / "pgm"), fs::directory_iterator{}), 4);

    r = run({"train", "-d", data, "-o", s(dir / "m.nmdl"), "--epochs", "2", "--seed", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    ASSERT_TRUE(fs::exists(dir / "m.nmdl.history.csv"));

    r = run({"eval", "-m", s(dir / "m.nmdl"), "-d", data, "--seed", "4", "--out", s(dir / "metrics.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("accuracy"), std::string::npos);
    std::ifstream is(dir / "metrics.json");
    EXPECT_GT(Json::parse(is)["samples"].get<int>(), 0);
    fs::remove_all(dir);
}

TEST(Cli, ConfigFileAndFlagOverride) {
    const auto dir = temp_dir("sweep");
    auto cfg = ExperimentConfig::desk();
    cfg.scenario.samples_per_class = 3;
    cfg.scenario.symbols_per_frame = 256;
    cfg.snr_start = 0;
    cfg.snr_stop = 20;
    cfg.snr_step = 10;
    cfg.methods = {Method::ProjectionClustering};
    cfg.output_dir = s(dir / "from_config");
    save_experiment(cfg, dir / "c.json");

    // --snr-stop overrides the file; --out overrides output_dir.
    auto r = run({"sweep", "--config", s(dir / "c.json"), "--seed", "9", "--snr-stop", "10", "--out",
                  s(dir / "out"), "-q"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = load_report(dir / "out");
    ASSERT_EQ(t.rows.size(), 2U);
    EXPECT_FALSE(fs::exists(dir / "from_config"));
    const auto saved = load_experiment(dir / "out" / "config.json");
    EXPECT_EQ(saved.seed, 9U);
    EXPECT_EQ(saved.snr_stop, 10.0);

    const auto csv_before = [&] {
        std::ifstream is(dir / "out" / "accuracy.csv");
        return std::string(std::istreambuf_iterator<char>(is), {});
    }();
    fs::remove(dir / "out" / "accuracy.csv");
    r = run({"report", s(dir / "out")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream is(dir / "out" / "accuracy.csv");
    EXPECT_EQ(std::string(std::istreambuf_iterator<char>(is), {}), csv_before);
    EXPECT_NE(r.out.find("projection_clustering"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, OutputsCreateMissingParents) {
    const auto dir = temp_dir("parents");
    const auto data = dir / "a" / "b" / "d.nmd";
    ASSERT_EQ(run({"generate", "--seed", "2", "--samples-per-class", "3", "--symbols-per-frame", "64", "--grid", "16",
                   "-o", s(data)})
                  .code,
              cli::kOk);
    EXPECT_TRUE(fs::exists(manifest_path(data)));
    const auto model = dir / "m" / "x.nmdl";
    ASSERT_EQ(run({"train", "-d", s(data), "-o", s(model), "--seed", "2", "--epochs", "1", "--batch-size", "4"}).code,
              cli::kOk);
    EXPECT_TRUE(fs::exists(model.string() + ".history.csv"));
    EXPECT_EQ(run({"eval", "-m", s(model), "-d", s(data), "--seed", "2", "--out", s(dir / "e" / "m.json")}).code,
              cli::kOk);
    EXPECT_TRUE(fs::exists(dir / "e" / "m.json"));
}
