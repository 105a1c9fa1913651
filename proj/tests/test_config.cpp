#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "rdiqsdc/config.hpp"

using namespace rdiqsdc;

namespace {

constexpr double kPi = std::numbers::pi;

std::string temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("rdiqsdc_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

std::string default_of(const std::string& key) {
  for (const auto& [k, v] : documented_defaults()) {
    if (k == key) return v;
  }
  return "<missing>";
}

}  // namespace

TEST(ParseNumber, PlainAndPiForms) {
  EXPECT_EQ(parse_number("0.25"), 0.25);
  EXPECT_EQ(parse_number(" 1e-3 "), 1e-3);
  EXPECT_DOUBLE_EQ(parse_number("pi"), kPi);
  EXPECT_DOUBLE_EQ(parse_number("pi/40"), kPi / 40.0);
  EXPECT_DOUBLE_EQ(parse_number("3*pi/4"), 3.0 * kPi / 4.0);
  EXPECT_DOUBLE_EQ(parse_number("0.3pi"), 0.3 * kPi);
  EXPECT_DOUBLE_EQ(parse_number("-pi/2"), -kPi / 2.0);
  EXPECT_DOUBLE_EQ(parse_number("PI/400"), kPi / 400.0);
}

TEST(ParseNumber, RejectsGarbage) {
  EXPECT_THROW(parse_number("abc"), ConfigError);
  EXPECT_THROW(parse_number("1.5x"), ConfigError);
  EXPECT_THROW(parse_number("pi/0"), ConfigError);
  EXPECT_THROW(parse_number("pi*2"), ConfigError);
  EXPECT_THROW(parse_number(""), ConfigError);
}

TEST(ParseGrid, ListAndRange) {
  EXPECT_EQ(parse_grid("0.1, 0.2,0.3"), (std::vector<double>{0.1, 0.2, 0.3}));
  const auto r = parse_grid("0:1:0.25");
  ASSERT_EQ(r.size(), 5u);
  EXPECT_DOUBLE_EQ(r.back(), 1.0);
  EXPECT_EQ(parse_grid("0:pi:pi/2").size(), 3u);
  EXPECT_TRUE(parse_grid("").empty());
  EXPECT_THROW(parse_grid("1:0:0.1"), ConfigError);
  EXPECT_THROW(parse_grid("0:1:0"), ConfigError);
  EXPECT_THROW(parse_grid("0:1"), ConfigError);
}

TEST(ConfigText, CommentsBlankLinesAndErrors) {
  const auto kv = parse_config_text("# header\n\nprotocol.r = 10  # trailing\n  physics.alpha=0.25\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("protocol.r"), "10");
  EXPECT_EQ(kv.at("physics.alpha"), "0.25");
  EXPECT_THROW(parse_config_text("protocol.r 10\n"), ConfigError);
  EXPECT_THROW(parse_config_text("protocol.r = 1\nprotocol.r = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text(" = 3\n"), ConfigError);
}

TEST(Defaults, DocumentedValuesMatchReferenceSettings) {
  EXPECT_EQ(default_of("protocol.theta"), "pi/4");
  EXPECT_EQ(default_of("physics.alpha"), "0.2");
  EXPECT_EQ(default_of("physics.eta_c"), "0.95");
  EXPECT_EQ(default_of("physics.eta_m"), "1");
  EXPECT_EQ(default_of("physics.eta_d"), "1");
  EXPECT_EQ(default_of("analysis.r_rep"), "1e7");
  EXPECT_EQ(default_of("analysis.p_s"), "1");
  EXPECT_EQ(default_of("analysis.p_e"), "1e-3");

  const RunConfig c = load_config("");
  EXPECT_DOUBLE_EQ(c.protocol.basis.theta(), kPi / 4.0);
  EXPECT_EQ(c.protocol.physics.link.alpha_db_per_km, 0.2);
  EXPECT_EQ(c.protocol.physics.link.eta_c, 0.95);
  EXPECT_EQ(c.protocol.physics.link.eta_m, 1.0);
  EXPECT_EQ(c.protocol.physics.link.eta_d, 1.0);
  EXPECT_EQ(c.analysis.efficiency.r_rep_hz, 1e7);
  EXPECT_EQ(c.analysis.efficiency.p_s, 1.0);
  EXPECT_EQ(c.analysis.efficiency.p_e, 1e-3);
  EXPECT_EQ(c.protocol.basis.n(), 16);
  EXPECT_EQ(c.analysis.delta_theta_values.size(), 3u);
}

TEST(Defaults, EveryKeyIsAccepted) {
  std::map<std::string, std::string> all;
  for (const auto& [k, v] : documented_defaults()) all[k] = v;
  RunConfig c;
  EXPECT_NO_THROW(apply_settings(c, all));
  EXPECT_NO_THROW(c.validate());
}

TEST(Settings, UnknownKeyRejected) {
  RunConfig c;
  EXPECT_THROW(apply_settings(c, {{"protocol.rr", "3"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"nope", "1"}}), ConfigError);
}

TEST(Settings, BadValuesRejected) {
  EXPECT_THROW(load_config("", {{"protocol.n", "4"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"protocol.r", "0"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"protocol.seed", "-3"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"protocol.epsilon", "0"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"protocol.policy", "greedy"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"physics.eta_c", "1.2"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"adversary.p1", "2"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"output.format", "xml"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"analysis.axis", "time"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"protocol.abort_on_check_failure", "maybe"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"protocol.message", "0102"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"protocol.r", "5"}, {"protocol.message", "0101"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"protocol.n", "3"}, {"protocol.p1", "0.1"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"memory.trips_per_stage", "12"}}), ConfigError);
  EXPECT_THROW(load_config("", {{"physics.eta_m", "0.9"}, {"memory.trips_per_stage", "2"}}), ConfigError);
}

TEST(Settings, ThetaAndNCombine) {
  const RunConfig c = load_config("", {{"protocol.n", "8"}, {"protocol.theta", "pi/6"}, {"protocol.policy", "uniform"}});
  EXPECT_EQ(c.protocol.basis.n(), 8);
  EXPECT_DOUBLE_EQ(c.protocol.basis.theta(), kPi / 6.0);
}

TEST(LoadConfig, FileThenOverrides) {
  const std::string path = temp_file("a.cfg", "protocol.r = 50\nprotocol.seed = 9\nphysics.delta_theta = pi/40\n");
  const RunConfig c = load_config(path, {{"protocol.seed", "11"}});
  EXPECT_EQ(c.protocol.r, 50u);
  EXPECT_EQ(c.protocol.seed, 11u);
  EXPECT_DOUBLE_EQ(c.protocol.physics.noise.delta_theta, kPi / 40.0);
  std::remove(path.c_str());
}

TEST(LoadConfig, MissingFileIsConfigError) {
  EXPECT_THROW(load_config("/nonexistent/rdiqsdc.cfg"), ConfigError);
}

TEST(Resolve, MessageSources) {
  EXPECT_TRUE(load_config("", {{"protocol.r", "4"}}).resolved_protocol().message.empty());
  EXPECT_EQ(load_config("", {{"protocol.r", "4"}, {"protocol.message", "ones"}}).resolved_protocol().message,
            (std::vector<std::uint8_t>{1, 1, 1, 1}));
  EXPECT_EQ(load_config("", {{"protocol.r", "3"}, {"protocol.message", "zeros"}}).resolved_protocol().message,
            (std::vector<std::uint8_t>{0, 0, 0}));
  EXPECT_EQ(load_config("", {{"protocol.r", "4"}, {"protocol.message", "0110"}}).resolved_protocol().message,
            (std::vector<std::uint8_t>{0, 1, 1, 0}));
}

TEST(Resolve, BareEfficiencyReplacesLinkBudget) {
  const ProtocolParams p = load_config("", {{"physics.eta", "0.7"}}).resolved_protocol();
  EXPECT_NEAR(p.physics.link.q_ab(), 0.7, 1e-12);
  EXPECT_NEAR(p.physics.effective_link().q_aba(), 0.49, 1e-12);
}

TEST(Resolve, MemoryEfficiencyBecomesOneLoopTrip) {
  const ProtocolParams p = load_config("", {{"physics.eta_m", "0.9"}}).resolved_protocol();
  EXPECT_EQ(p.physics.memory.trips_per_stage, 1);
  EXPECT_DOUBLE_EQ(p.physics.memory.per_trip_efficiency, 0.9);
  EXPECT_NEAR(p.physics.effective_link().eta_m, 0.9, 1e-15);
}

TEST(Settings, WorkersZeroMeansMachineParallelism) {
  EXPECT_GE(load_config("", {{"run.workers", "0"}}).protocol.workers, 1);
  EXPECT_EQ(load_config("", {{"run.workers", "3"}}).protocol.workers, 3);
  EXPECT_THROW(load_config("", {{"run.workers", "-1"}}), ConfigError);
}

TEST(Settings, ToleranceAutoOrFixed) {
  EXPECT_FALSE(load_config("").protocol.tolerance_override.has_value());
  EXPECT_EQ(load_config("", {{"protocol.tolerance", "0.05"}}).protocol.tolerance_override.value(), 0.05);
  EXPECT_THROW(load_config("", {{"protocol.tolerance", "-0.1"}}), ConfigError);
}
