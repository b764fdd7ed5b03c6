#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "slipinv/config.hpp"
#include "slipinv/svg.hpp"
#include "test_helpers.hpp"

using namespace slipinv;

static std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_CASE("key-value config parsing, comments, and typed access") {
  const auto cfg = KeyValueConfig::from_string(
      "# comment line\n"
      "prior.beta_s = 1.5\n"
      "paths.mesh = /tmp/mesh.csv  # trailing comment\n"
      "sampler.sample_count = 1234\n"
      "output.emit_svg = false\n"
      "\n");
  CHECK(cfg.get_double("prior.beta_s") == 1.5);
  CHECK(cfg.get_string("paths.mesh") == "/tmp/mesh.csv");
  CHECK(cfg.get_int("sampler.sample_count", 0) == 1234);
  CHECK(cfg.get_bool("output.emit_svg", true) == false);
  CHECK(cfg.get_double("matern.lambda_s_m", 40000.0) == 40000.0);
  CHECK_THROWS(cfg.get_string("paths.greens"));
  CHECK_THROWS(KeyValueConfig::from_string("this line has no equals sign\n"));
  CHECK_THROWS(KeyValueConfig::from_string("= nameless\n"));
}

TEST_CASE("run config rejects unknown keys by name") {
  auto cfg = KeyValueConfig::from_string("prior.beta_sigma = 1.0\n");
  CHECK_THROWS_WITH(RunConfig::from_config(cfg),
                    Catch::Matchers::ContainsSubstring("prior.beta_sigma"));
}

TEST_CASE("run config applies defaults and validates embedded types") {
  auto rc = RunConfig::from_config(KeyValueConfig{});
  CHECK(rc.prior.beta_d == 0.2);
  CHECK(rc.prior.sigma_beta_sq == 2e-4);
  CHECK(rc.matern.lambda_s == 40000.0);
  CHECK(rc.likelihood.axis_sigmas[2] == 0.0051);
  CHECK(rc.sampler.effective_burn_in() == rc.sampler.sample_count / 10);

  auto bad = KeyValueConfig::from_string("prior.beta_s = -1\n");
  CHECK_THROWS(RunConfig::from_config(bad));
  auto badmode = KeyValueConfig::from_string("hyperopt.mode = backwards\n");
  CHECK_THROWS(RunConfig::from_config(badmode));
}

TEST_CASE("manifest json round-trips as a config source") {
  nlohmann::json manifest{
      {"command", "invert"},
      {"seed", 42},
      {"config", {{"prior.beta_s", "1.25"}, {"sampler.seed", "42"}}}};
  const auto cfg = KeyValueConfig::from_string(manifest.dump());
  CHECK(cfg.get_double("prior.beta_s") == 1.25);
  CHECK(cfg.get_u64("sampler.seed", 0) == 42);
  CHECK_THROWS(KeyValueConfig::from_string("{\"no_config\": 1}"));
}

TEST_CASE("grid spec parses to the inclusive cross product") {
  const auto grid = parse_grid_spec("lambda_s=30:45:5,lambda_d=42:50:4");
  REQUIRE(grid.size() == 12);  // {30,35,40,45} x {42,46,50}
  CHECK(grid.front().first == 30.0);
  CHECK(grid.front().second == 42.0);
  CHECK(grid.back().first == 45.0);
  CHECK(grid.back().second == 50.0);
  bool has_40_46 = false;
  for (const auto& [a, b] : grid) has_40_46 |= a == 40.0 && b == 46.0;
  CHECK(has_40_46);

  const auto single = parse_grid_spec("lambda_s=35000,lambda_d=45000");
  REQUIRE(single.size() == 1);
  CHECK(single[0] == std::make_pair(35000.0, 45000.0));

  CHECK_THROWS(parse_grid_spec(""));
  CHECK_THROWS(parse_grid_spec("lambda_s=1:2:1"));
  CHECK_THROWS(parse_grid_spec("lambda_q=1:2:1,lambda_d=1:2:1"));
  CHECK_THROWS(parse_grid_spec("lambda_s=5:1:1,lambda_d=1:2:1"));
}

TEST_CASE("constant-field heatmap renders one color with equal legend ends") {
  const auto dir = testutil::scratch_dir("svg");
  const auto mesh = testutil::grid_mesh(2, 2, 10000.0);
  emit_heatmap(Eigen::VectorXd::Constant(4, 0.123456), mesh, nullptr, "flat",
               dir + "/flat.svg");
  const std::string svg = slurp(dir + "/flat.svg");
  CHECK(svg.find("min 0.123456") != std::string::npos);
  CHECK(svg.find("max 0.123456") != std::string::npos);
  // every subfault square carries the same mid-ramp color
  CHECK(svg.find("rgb(204,71,120)") != std::string::npos);
}

TEST_CASE("heatmap bytes are deterministic for a fixed input") {
  const auto dir = testutil::scratch_dir("svg");
  const auto mesh = testutil::grid_mesh(3, 2, 8000.0);
  const auto stations = testutil::line_stations(2, 9000.0);
  Eigen::VectorXd v(6);
  v << 0.0, 0.1, 0.2, 0.3, 0.4, 0.5;
  emit_heatmap(v, mesh, &stations, "t", dir + "/a.svg");
  emit_heatmap(v, mesh, &stations, "t", dir + "/b.svg");
  CHECK(slurp(dir + "/a.svg") == slurp(dir + "/b.svg"));
  CHECK_THROWS(emit_heatmap(Eigen::VectorXd::Ones(5), mesh, nullptr, "t", dir + "/c.svg"));
}

TEST_CASE("two-subfault fixture matches the reviewed golden svg") {
  const auto dir = testutil::scratch_dir("svg");
  FaultMesh mesh;
  mesh.ids = {0, 1};
  mesh.centroids.resize(2, 3);
  mesh.centroids << 0.0, 0.0, -15000.0, 20000.0, 0.0, -15000.0;
  mesh.areas = Eigen::VectorXd::Constant(2, 1e8);
  mesh.depths = Eigen::VectorXd::Constant(2, 15000.0);
  StationSet st;
  st.labels = {"G1"};
  st.coordinates.resize(1, 3);
  st.coordinates << 10000.0, 8000.0, 0.0;
  Eigen::VectorXd v(2);
  v << 0.05, 0.25;
  emit_heatmap(v, mesh, &st, "golden fixture", dir + "/got.svg");
  CHECK(slurp(dir + "/got.svg") == slurp(std::string(SLIPINV_TEST_DATA) + "/heatmap_m2.svg"));
}
