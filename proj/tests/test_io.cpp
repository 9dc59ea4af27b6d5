#include <gtest/gtest.h>

#include "dekernel/io.hpp"
#include "oracles.hpp"

using namespace dekernel;
using dekernel::io::json;

namespace {

std::string message_of(const std::function<void()>& fn, ErrorCode expected) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expected) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "expected dekernel::Error";
  return {};
}

json minimal_scenario() {
  return json::parse(R"({
    "model": {"alpha": 0.5, "lambda": 1.0},
    "design": {"kind": "equispaced", "a": 1, "b": 10},
    "n": 10,
    "noise": {"sd": 0.1},
    "removed_indices": [4, 5],
    "replicates": 3,
    "master_seed": 9,
    "methods": ["LL", {"name": "DE1", "bandwidth": {"mode": "fixed", "h": 3}}]
  })");
}

}  // namespace

TEST(Io, FormatDoubleRoundTrips) {
  oracle::Gen gen(61);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(gen.uniform(-1.0, 1.0), gen.integer(-60, 60));
    EXPECT_EQ(io::parse_double(io::format_double(v), "test"), v);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(2.0), "2");
}

TEST(Io, ParseCsv) {
  const auto d = io::parse_csv("# comment\nx,y\n1,2.5\n\n2,3e-1\r\n", Scale::Linear);
  EXPECT_EQ(d.x, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(d.y, (std::vector<double>{2.5, 0.3}));
}

TEST(Io, CsvErrorsNameTheLine) {
  auto msg = message_of([] { io::parse_csv("x,y\n1,2\n3,abc\n", Scale::Linear, "f.csv"); }, ErrorCode::ParseError);
  EXPECT_NE(msg.find("f.csv:3"), std::string::npos);
  msg = message_of([] { io::parse_csv("a,b\n1,2\n", Scale::Linear, "g.csv"); }, ErrorCode::ParseError);
  EXPECT_NE(msg.find("header"), std::string::npos);
  message_of([] { io::parse_csv("x,y\n1,2,3\n", Scale::Linear); }, ErrorCode::ParseError);
  message_of([] { io::parse_csv("", Scale::Linear); }, ErrorCode::ParseError);
  message_of([] { io::read_csv("/nonexistent/data.csv", Scale::Linear); }, ErrorCode::FileNotFound);
}

TEST(Io, DatasetCsvRoundTrip) {
  Dataset d{{0.1, 1.0 / 3.0, 2.0}, {1e-300, -2.5, 7.0 / 9.0}, Scale::Log};
  const auto back = io::parse_csv(io::dataset_csv(d, "header"), Scale::Log);
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
}

TEST(Io, ScenarioParses) {
  const auto cfg = io::parse_scenario(minimal_scenario());
  EXPECT_EQ(cfg.n, 10);
  EXPECT_EQ(cfg.methods.size(), 2u);
  EXPECT_EQ(cfg.methods[1].family, MethodFamily::DeConstrained);
  EXPECT_EQ(cfg.methods[1].bandwidth.mode, BandwidthMode::Fixed);
  EXPECT_EQ(cfg.methods[1].bandwidth.h, 3.0);
  EXPECT_EQ(cfg.master_seed, 9u);
}

TEST(Io, ScenarioRoundTrip) {
  const auto cfg = io::parse_scenario(minimal_scenario());
  const auto j = io::scenario_to_json(cfg);
  const auto again = io::parse_scenario(j);
  EXPECT_EQ(io::scenario_to_json(again).dump(), j.dump());
}

TEST(Io, ScenarioErrorsNameThePath) {
  auto j = minimal_scenario();
  j["methods"][1]["bandwidth"]["mode"] = "magic";
  auto msg = message_of([&] { io::parse_scenario(j); }, ErrorCode::ConfigInvalid);
  EXPECT_NE(msg.find("/methods/1/bandwidth/mode"), std::string::npos) << msg;

  j = minimal_scenario();
  j["noise"]["sdd"] = 1;
  msg = message_of([&] { io::parse_scenario(j); }, ErrorCode::ConfigInvalid);
  EXPECT_NE(msg.find("/noise"), std::string::npos) << msg;
  EXPECT_NE(msg.find("sdd"), std::string::npos) << msg;

  j = minimal_scenario();
  j["model"]["alpha"] = 1.5;
  msg = message_of([&] { io::parse_scenario(j); }, ErrorCode::ConfigInvalid);
  EXPECT_NE(msg.find("/model"), std::string::npos) << msg;

  j = minimal_scenario();
  j["removed_indices"] = json::array({11});
  msg = message_of([&] { io::parse_scenario(j); }, ErrorCode::ConfigInvalid);
  EXPECT_NE(msg.find("removed_indices"), std::string::npos) << msg;

  j = minimal_scenario();
  j["methods"][0] = "XYZ";
  msg = message_of([&] { io::parse_scenario(j); }, ErrorCode::ConfigInvalid);
  EXPECT_NE(msg.find("/methods/0"), std::string::npos) << msg;

  j = minimal_scenario();
  j["replicates"] = "many";
  message_of([&] { io::parse_scenario(j); }, ErrorCode::ConfigInvalid);
}

TEST(Io, ReportCsvLayouts) {
  auto cfg = io::parse_scenario(minimal_scenario());
  cfg.replicates = 2;
  const auto report = run_comparison(cfg, 1);
  const auto table = io::report_table_csv(report);
  const auto summary = io::report_summary_csv(report);
  EXPECT_EQ(table.rfind("# dekernel ", 0), 0u);
  EXPECT_NE(table.find("\nmethod,log_scale,original_scale,failures\nLL,"), std::string::npos);
  EXPECT_NE(summary.find("\nmethod,scale,mean_ase,failures\nLL,log,"), std::string::npos);
  EXPECT_NE(summary.find("\nLL,original,"), std::string::npos);
  const auto j = io::report_to_json(report);
  EXPECT_EQ(j["summary"].size(), 2u);
  EXPECT_EQ(j["replicates"].size(), 2u);
}
