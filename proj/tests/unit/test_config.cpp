#include <gtest/gtest.h>

#include <filesystem>

#include "odebc/config.hpp"
#include "odebc/errors.hpp"
#include "odebc/presets.hpp"
#include "odebc/tensor_io.hpp"

namespace odebc {
namespace {

using config::Json;

std::string error_of(const Json& file, const std::vector<std::string>& ov) {
  try {
    config::resolve(file, ov);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsResolveUnchanged) {
  EXPECT_EQ(config::resolve(Json(), {}), config::defaults());
  const auto d = config::defaults();
  EXPECT_EQ(d["search"]["K"], 256);
  EXPECT_EQ(d["ablation"]["k_fixed"], 200);
  EXPECT_EQ(d["ablation"]["r_fixed"], 20);
  EXPECT_EQ(d["ablation"]["r_sizes"], Json::array({1, 2, 4, 8, 16}));
  EXPECT_EQ(d["ablation"]["k_sizes"], Json::array({10, 20, 40, 80, 160}));
  EXPECT_EQ(d["ablation"]["repeats"], 8);
  EXPECT_EQ(d["benchmark"]["solvers"][0]["segments"], Json::array({90, 60, 60, 20, 20}));
}

TEST(Config, UnknownKeysAndTypeMismatchesNameTheKey) {
  EXPECT_NE(error_of(Json{{"search", {{"KK", 3}}}}, {}).find("search.KK"), std::string::npos);
  EXPECT_NE(error_of(Json{{"bogus", 1}}, {}).find("bogus"), std::string::npos);
  EXPECT_NE(error_of(Json{{"search", {{"K", "many"}}}}, {}).find("search.K"), std::string::npos);
  EXPECT_NE(error_of(Json(), {"solver.stepz=4"}).find("solver.stepz"), std::string::npos);
  EXPECT_NE(error_of(Json(), {"novalue"}).find("novalue"), std::string::npos);
  EXPECT_THROW(config::resolve(Json::array(), {}), ValidationError);
}

TEST(Config, OverridesApplyAfterTheFile) {
  const auto r = config::resolve(Json{{"search", {{"K", 8}, {"R", 4}}}},
                                 {"search.K=16", "solver.kind=dpm2", "ablation.r_sizes=[1,3]"});
  EXPECT_EQ(r["search"]["K"], 16);
  EXPECT_EQ(r["search"]["R"], 4);
  EXPECT_EQ(r["solver"]["kind"], "dpm2");
  EXPECT_EQ(r["ablation"]["r_sizes"], Json::array({1, 3}));
  EXPECT_EQ(config::resolve(Json{{"metric", "gradperc"}}, {})["metric"]["name"], "gradperc");
}

TEST(Config, SolverSectionBuildsPlans) {
  const auto s = default_schedule();
  const auto ddim = config::solver_from_json(Json{{"kind", "ddim"}, {"steps", 25}}, s);
  EXPECT_EQ(ddim.label(), "DDIM-25");
  const auto seg = config::solver_from_json(
      Json{{"kind", "ddpm"}, {"steps", 0}, {"segments", {45, 20, 15, 10, 10}}, {"seed", 4}}, s);
  EXPECT_EQ(seg.label(), "DDPM-100");
  EXPECT_EQ(seg.noise_seed, 4u);
  EXPECT_EQ(config::solver_from_json(Json{{"kind", "euler"}, {"fine_steps", 2000}}, s).fine_steps, 2000);
  EXPECT_THROW(config::solver_from_json(Json{{"kind", "euler"}, {"fine_steps", 10}}, s), ValidationError);
  EXPECT_THROW(config::solver_from_json(Json{{"kind", "rk4"}, {"steps", 10}}, s), ValidationError);
}

TEST(Config, MetricSection) {
  EXPECT_EQ(config::metric_from_json(Json{{"name", "psnr"}, {"peak", 2.0}}).name, "neg_psnr");
  EXPECT_EQ(config::metric_from_json(Json("l2")).name, "l2");
  EXPECT_THROW(config::metric_from_json(Json{{"name", "lpips"}}), ValidationError);
}

TEST(Config, ExplicitWorldWithTextures) {
  const Json w = {{"hr_shape", {4, 4, 1}},
                  {"block", 2},
                  {"tau", 0.05},
                  {"components",
                   {{{"weight", 0.5}, {"std", 0.1}, {"mean", {{"texture", "gradient"}, {"amplitude", 2.0}}}},
                    {{"weight", 0.25}, {"std", 0.2}, {"mean", {{"texture", "constant"}, {"value", -1.0}}}},
                    {{"weight", 0.25},
                     {"std", 0.2},
                     {"mean", {{"texture", "detail"}, {"amplitude", 0.3}, {"seed", 2}, {"offset", 0.5}}}}}}};
  const auto r = config::resolve(Json{{"world", w}}, {"world.tau=0.1"});
  const auto world = config::world_from_json(r["world"]);
  EXPECT_EQ(world.tau(), 0.1);
  EXPECT_EQ(world.components()[0].mean, gradient_image(Shape::image(4, 4), 2.0));
  EXPECT_EQ(world.components()[1].mean[5], -1.0);
  Tensor detail = detail_pattern(Shape::image(4, 4), 2, 0.3, 2, 0);
  for (double& v : detail.values()) v += 0.5;
  EXPECT_EQ(world.components()[2].mean, detail);
  // The explicit form round-trips.
  const auto again = config::world_from_json(config::world_to_json(world));
  EXPECT_EQ(again.components()[2].mean, world.components()[2].mean);
  EXPECT_EQ(again.block(), 2u);

  Json bad = w;
  bad["components"][0]["mean"] = {{"texture", "plaid"}};
  EXPECT_THROW(config::world_from_json(bad), ValidationError);
  bad["components"][0]["mean"] = Json::array({1, 2});
  EXPECT_THROW(config::world_from_json(bad), ValidationError);
}

TEST(Config, PresetWorldFromDefaults) {
  const auto world = config::world_from_json(config::defaults()["world"]);
  EXPECT_EQ(world.dim(), 64u);
  EXPECT_THROW(config::world_from_json(Json{{"preset", "nope"}, {"texture_seed", 1}}), ValidationError);
}

TEST(Config, LoadFileErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "odebc_cfg";
  std::filesystem::create_directories(dir);
  write_text(dir / "bad.json", "{not json");
  write_text(dir / "list.json", "[1,2]");
  write_text(dir / "ok.json", R"({"search": {"K": 3}})");
  EXPECT_THROW(config::load_file(dir / "bad.json"), ValidationError);
  EXPECT_THROW(config::load_file(dir / "list.json"), ValidationError);
  EXPECT_THROW(config::load_file(dir / "missing.json"), IoError);
  EXPECT_EQ(config::load_file(dir / "ok.json")["search"]["K"], 3);
}

}  // namespace
}  // namespace odebc
