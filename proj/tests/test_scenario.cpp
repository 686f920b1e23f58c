#include "uavslice/scenario.hpp"

#include <gtest/gtest.h>

using namespace uavslice;

TEST(Scenario, DefaultsPassChecks) {
  const auto s = default_scenario();
  EXPECT_NO_THROW(check_scenario(s));
  EXPECT_EQ(s.n_uavs, 3);
  EXPECT_EQ(s.esn.Q, 6);
  EXPECT_EQ(s.esn.K, 10);
  EXPECT_DOUBLE_EQ(s.p_hat - s.p_c, 1.63);
}

TEST(Scenario, JsonRoundTripKeepsEveryField) {
  auto s = default_scenario();
  s.seed = 77;
  s.algorithm = Algorithm::Cct;
  s.n_users = 9;
  s.radio.bs_pos = Vec3(1, 2, 3);
  s.synthetic.zoom = 2.5;
  s.synthetic.hotspot_lo = Vec2(10, 20);
  s.urllc.eps_req = 1e-5;
  s.esn.n_r = 40;
  s.cg_widths = {7, 16, 1};
  s.rho = 0.3;
  s.predictive_queues = false;
  s.oracle_positions = true;
  s.e_max = 12.0;
  s.cct_speed = 4.0;
  const auto r = scenario_from_json(nlohmann::json::parse(to_json(s).dump()));
  EXPECT_EQ(to_json(r), to_json(s));
  EXPECT_EQ(r.algorithm, Algorithm::Cct);
  EXPECT_EQ(r.radio.bs_pos, Vec3(1, 2, 3));
  EXPECT_TRUE(r.oracle_positions);
}

TEST(Scenario, MissingKeysKeepDefaults) {
  const auto s = scenario_from_json(nlohmann::json::parse(R"({"users": 4, "esn": {"K": 3}})"));
  EXPECT_EQ(s.n_users, 4);
  EXPECT_EQ(s.esn.K, 3);
  EXPECT_EQ(s.esn.Q, 6);
  EXPECT_EQ(s.horizon, 500);
}

TEST(Scenario, BadInputsAreConfigErrors) {
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"algorithm": "greedy"})")), config_error);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"users": "many"})")), config_error);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"environment": {"radio": {"bs_pos": [1, 2]}}})")),
               config_error);
  auto s = default_scenario();
  s.synthetic.speed_max = 2.0;
  EXPECT_THROW(check_scenario(s), config_error);
  s = default_scenario();
  s.cg_widths = {6, 10, 1};
  EXPECT_THROW(check_scenario(s), config_error);
  s = default_scenario();
  s.p_hat = s.p_c;
  EXPECT_THROW(check_scenario(s), config_error);
  s = default_scenario();
  s.urllc.eps_req = 0.7;
  EXPECT_THROW(check_scenario(s), config_error);
  s = default_scenario();
  s.horizon = 0;
  EXPECT_THROW(check_scenario(s), config_error);
}

TEST(Scenario, AlgorithmNames) {
  for (auto a : {Algorithm::Re2fs, Algorithm::Suav, Algorithm::Cct}) EXPECT_EQ(algorithm_from_string(to_string(a)), a);
}
