#include <doctest.h>

#include <cmath>

#include "fpld/config.hpp"
#include "fpld/error.hpp"
#include "fpld/report.hpp"

using namespace fpld;

TEST_CASE("config parsing") {
  Config c = parse_config(
      "# comment\n[sim]\nV = 128\nK=8  # trailing\nn = inf\nL_list = 1, 1, 4, 4\n"
      "experiment_id = \"abc\"\n[sweep]\nK_values = 2,4\n");
  CHECK(*c.get("V") == "128");
  CHECK(*c.get("K") == "8");
  CHECK(*c.get("experiment_id") == "abc");
  CHECK(c.unused() == std::vector<std::string>{"K_values", "L_list", "n"});
  CHECK(std::isinf(parse_double(*c.get("n"))));
  CHECK(parse_double_list(*c.get("L_list")) == std::vector<double>{1, 1, 4, 4});
  CHECK_FALSE(c.get("missing").has_value());

  CHECK_THROWS_AS(parse_config("V = 1\nV = 2\n"), InvalidParameter);
  CHECK_THROWS_AS(parse_config("just words\n"), InvalidParameter);
  CHECK_THROWS_AS(parse_config("[open\n"), InvalidParameter);
  CHECK_THROWS_AS(parse_int("12x"), InvalidParameter);
  CHECK_THROWS_AS(parse_double("nope"), InvalidParameter);
}

TEST_CASE("seed keys") {
  Config c = parse_config("seed = 10\nseed_count = 3\n");
  SimConfig s;
  apply_sim_config(c, s);
  CHECK(s.seeds == std::vector<std::uint64_t>{10, 11, 12});
  Config l = parse_config("seed_list = 5,9\n");
  apply_sim_config(l, s);
  CHECK(s.seeds == std::vector<std::uint64_t>{5, 9});
}

TEST_CASE("resolved configuration round-trips") {
  SimConfig s;
  s.experiment_id = "rt";
  s.n = kExactLogits;
  s.K = 3;
  s.L_list = {0.1, 1.0 / 3.0, 4};
  s.bits_list = {1, 2, 3};
  s.mode = SimMode::kRefineFixedStep;
  s.gamma = 1.0 + 1e-9;
  s.seeds = {4, 8, 15};
  Config c = parse_config(sim_config_text(s));
  SimConfig back;
  apply_sim_config(c, back);
  CHECK(c.unused().empty());
  CHECK(sim_config_text(back) == sim_config_text(s));
  CHECK(back.L_list == s.L_list);
  CHECK(back.gamma == s.gamma);
  CHECK(back.mode == s.mode);
}

TEST_CASE("csv and svg output") {
  std::vector<ResultRow> rows{{"e", "K", 2, "fpld", 1, 0.1, 1.0, 0.01},
                              {"e", "K", 2, "fpld", 2, 0.30000000000000004, 1.0, 0.01},
                              {"e", "K", 4, "fpld", 1, 0.05, 0.5, 0.005}};
  const std::string csv = csv_text(rows);
  CHECK(csv.rfind("experiment_id,sweep_name,sweep_value,policy,seed,kl,upper_bound,lower_bound\n", 0) == 0);
  CHECK(csv.find("e,K,2,fpld,2,0.30000000000000004,1,0.01\n") != std::string::npos);
  CHECK(csv_text(rows, true).find(",suboptimality_ratio\n") != std::string::npos);

  const auto points = summarize(rows);
  REQUIRE(points.size() == 2);
  CHECK(points[0].count == 2);
  CHECK(points[0].mean == doctest::Approx(0.2));
  CHECK(points[0].stderr_ == doctest::Approx(0.1));

  const std::string svg = svg_plot(points, "K", "t");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("upper bound") != std::string::npos);

  const std::string m = manifest_text("fig1", "", "out", "V = 2\n");
  CHECK(m.find("[resolved]\nV = 2\n") != std::string::npos);
  CHECK(m.find("tool_version") != std::string::npos);
}
