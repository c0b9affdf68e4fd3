#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "odebc/tensor_io.hpp"

namespace odebc {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "odebc_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Small toy8 study that runs in well under a second. The sizes come first so
/// later --set arguments override them.
std::vector<std::string> small(std::vector<std::string> args) {
  std::vector<std::string> sets;
  for (const char* s : {"world.preset=toy8", "solver.steps=10", "data.count=24", "search.K=12", "search.R=6",
                        "search.holdout=6", "search.n_random=4", "ablation.r_sizes=[1,3]",
                        "ablation.k_sizes=[2,4]", "ablation.repeats=2", "ablation.k_fixed=6",
                        "ablation.r_fixed=4", "independence.conditions=3", "independence.candidates=5"}) {
    sets.push_back("--set");
    sets.push_back(s);
  }
  args.insert(args.begin() + 1, sets.begin(), sets.end());
  return args;
}

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  const auto r = run({"search", "--set", "search.KK=3", "-o", fresh_dir("bad").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("search.KK"), std::string::npos);
  EXPECT_EQ(run({"search", "--set", "solver.kind=ddpm", "--set", "world.preset=toy8", "-o",
                 fresh_dir("ddpm").string()})
                .code,
            1);
  EXPECT_EQ(run({"search", "-w", "-2"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, MissingFilesExitWithTwo) {
  EXPECT_EQ(run({"search", "-c", "/nonexistent/config.json"}).code, 2);
  const auto dir = fresh_dir("missing");
  EXPECT_EQ(run(small({"search", "--set", "data.dir=/nonexistent/pairs", "-o", dir.string()})).code, 2);
  EXPECT_EQ(run(small({"sample", "--bc", "/nonexistent/bc.t", "--y", "/nonexistent/y.t", "--output",
                       (dir / "x.t").string()}))
                .code,
            2);
}

TEST(Cli, SingleCandidateSearchPicksIndexZero) {
  const auto dir = fresh_dir("k1");
  const auto r = run(small({"search", "--set", "search.K=1", "-o", dir.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string summary = read_text(dir / "summary.csv");
  const std::string row = summary.substr(summary.find('\n') + 1);
  EXPECT_EQ(row.substr(0, row.find(",DDIM")), "1,1,6");
  EXPECT_NE(row.find(",l2,0,"), std::string::npos);
}

TEST(Cli, SampleRerunIsBitIdentical) {
  const auto dir = fresh_dir("sample");
  ASSERT_EQ(run(small({"gen-world", "-o", (dir / "world").string()})).code, 0);
  ASSERT_EQ(run(small({"search", "-o", (dir / "search").string()})).code, 0);
  const auto bc = (dir / "search" / "best_bc.t").string();
  const auto y = (dir / "world" / "pairs" / "y_000002.t").string();
  ASSERT_EQ(run(small({"sample", "--bc", bc, "--y", y, "--output", (dir / "a.t").string()})).code, 0);
  ASSERT_EQ(run(small({"sample", "--bc", bc, "--y", y, "--output", (dir / "b.t").string(), "-w", "3"})).code, 0);
  const Tensor a = read_tensor(dir / "a.t");
  EXPECT_EQ(a, read_tensor(dir / "b.t"));
  EXPECT_EQ(a.shape(), Shape::image(2, 4, 1));
  // Shape mismatch between the LR file and the world is a validation error.
  EXPECT_EQ(run(small({"sample", "--bc", bc, "--y", bc, "--output", (dir / "c.t").string()})).code, 1);
}

TEST(Cli, GeneratedPairsDirectoryMatchesInlineSampling) {
  const auto dir = fresh_dir("datadir");
  ASSERT_EQ(run(small({"gen-world", "-o", (dir / "world").string()})).code, 0);
  ASSERT_EQ(run(small({"search", "-o", (dir / "inline").string()})).code, 0);
  ASSERT_EQ(run(small({"search", "--set", "data.dir=" + (dir / "world" / "pairs").string(), "-o",
                       (dir / "fromdir").string()}))
                .code,
            0);
  EXPECT_EQ(read_text(dir / "inline" / "objective_table.csv"), read_text(dir / "fromdir" / "objective_table.csv"));
}

TEST(Cli, WorkerCountDoesNotChangeAnyCsv) {
  const auto dir = fresh_dir("workers");
  const std::vector<std::pair<std::string, std::vector<std::string>>> cmds{
      {"search", {"summary.csv", "objective_table.csv", "heldout.csv", "random_bc.csv", "manifest.json"}},
      {"ablate-r", {"ablate_r.csv", "ablate_r_summary.csv"}},
      {"ablate-k", {"ablate_k.csv", "ablate_k_summary.csv"}},
      {"independence", {"independence.csv", "sequences.csv"}},
      {"benchmark", {"benchmark.csv"}}};
  for (const auto& [cmd, files] : cmds) {
    const auto a = dir / (cmd + "_w1"), b = dir / (cmd + "_w4");
    ASSERT_EQ(run(small({cmd, "-w", "1", "-o", a.string()})).code, 0) << cmd;
    ASSERT_EQ(run(small({cmd, "-w", "4", "-o", b.string()})).code, 0) << cmd;
    for (const auto& f : files) EXPECT_EQ(read_text(a / f), read_text(b / f)) << cmd << "/" << f;
  }
}

TEST(Cli, ManifestReproducesTheRun) {
  const auto dir = fresh_dir("manifest");
  ASSERT_EQ(run(small({"ablate-k", "-o", (dir / "first").string()})).code, 0);
  const auto again = run({"ablate-k", "-c", (dir / "first" / "manifest.json").string(), "-o",
                          (dir / "second").string()});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(read_text(dir / "first" / "ablate_k.csv"), read_text(dir / "second" / "ablate_k.csv"));
  EXPECT_EQ(read_text(dir / "first" / "manifest.json"), read_text(dir / "second" / "manifest.json"));
}

TEST(Cli, ConfigFileIsOverlaidAndExplicitWorldsWork) {
  const auto dir = fresh_dir("cfgfile");
  write_text(dir / "cfg.json", R"({
    "world": {"hr_shape": [2, 2, 1], "block": 2, "tau": 0.1,
              "components": [{"weight": 1.0, "std": 0.2, "mean": {"texture": "gradient"}}]},
    "search": {"K": 3, "R": 2, "holdout": 0},
    "data": {"count": 4}
  })");
  const auto r = run({"search", "-c", (dir / "cfg.json").string(), "-o", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "best_bc.t"));
  EXPECT_FALSE(fs::exists(dir / "out" / "heldout.csv"));
  write_text(dir / "bad.json", R"({"search": {"K": "three"}})");
  EXPECT_EQ(run({"search", "-c", (dir / "bad.json").string()}).code, 1);
}

TEST(Cli, PgmRendersAreWritten) {
  const auto dir = fresh_dir("pgm");
  ASSERT_EQ(run(small({"gen-world", "--pgm", "-o", dir.string()})).code, 0);
  EXPECT_EQ(read_text(dir / "z_0.pgm").substr(0, 2), "P5");
}

}  // namespace
}  // namespace odebc
