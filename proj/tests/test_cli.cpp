#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pspectral/cli.hpp"

using namespace pspectral;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "pspectral");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, LambdaBarFlatLimit) {
  const Outcome r = invoke({"lambda-bar", "--p", "2", "--n", "2", "--k", "-1e-8", "--d", "3.14159265"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["lambda_bar"].get<double>(), 1.0, 1e-3);
  for (const char* key : {"bracket_lo", "bracket_hi", "iterations", "residual"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_LE(j["bracket_lo"].get<double>(), j["lambda_bar"].get<double>());
}

TEST(Cli, AlphaCritical) {
  const Outcome r = invoke({"alpha-critical", "--p", "2", "--n", "3", "--k", "-1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["alpha_bar"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(j["l"].get<double>(), 0.5, 1e-12);
}

TEST(Cli, DeltaBar) {
  const Outcome r = invoke({"delta-bar", "--p", "3", "--n", "3", "--k", "-1", "--lambda", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["delta_bar"].get<double>(), 2.0 * j["a_bar"].get<double>(), 1e-15);
  EXPECT_NEAR(j["delta_bar"].get<double>(), delta_bar(3, -1, 4, 3).value, 1e-15);
}

TEST(Cli, RejectsNonNegativeCurvature) {
  for (const char* k : {"0", "1", "abc"}) {
    const Outcome r = invoke({"lambda-bar", "--n", "2", "--k", k, "--d", "1"});
    EXPECT_EQ(r.code, 1) << k;
    EXPECT_NE(r.err.find("k"), std::string::npos);
  }
}

TEST(Cli, InvalidArguments) {
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(invoke({"lambda-bar", "--n", "2", "--k", "-1"}).code, 1);
  EXPECT_EQ(invoke({"lambda-bar", "--n", "2", "--k", "-1", "--d", "1", "--lambda", "2"}).code, 1);
  EXPECT_EQ(invoke({"delta-bar", "--n", "2", "--k", "-1", "--d", "1"}).code, 1);
  EXPECT_EQ(invoke({"lambda-bar", "--p", "1", "--n", "2", "--k", "-1", "--d", "1"}).code, 1);
  EXPECT_EQ(invoke({"model", "--n", "2", "--k", "-1", "--lambda", "2", "--family", "4"}).code, 1);
  EXPECT_EQ(invoke({"model", "--n", "2", "--k", "-1", "--lambda", "2", "--family", "1", "--a", "-1"}).code, 1);
  EXPECT_EQ(invoke({"verify", "--suite", "nope"}).code, 1);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, NumericalFailureExitCode) {
  const Outcome r = invoke({"lambda-bar", "--n", "3", "--k", "-1", "--d", "200"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("numerical failure"), std::string::npos);
}

TEST(Cli, ModelTableJson) {
  const Outcome r = invoke({"model", "--p", "2.5", "--n", "3", "--k", "-1", "--lambda", "6", "--family", "1", "--a", "0", "--grid", "51"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["samples"].size(), 51u);
  EXPECT_NEAR(j["samples"][0]["w"].get<double>(), -1.0, 1e-9);
  EXPECT_NEAR(j["samples"][50]["w"].get<double>(), j["m"].get<double>(), 1e-12);
  EXPECT_TRUE(j["samples"][0]["residual"].is_null());
  EXPECT_LE(j["samples"][25]["residual"].get<double>(), 6e-6);
  EXPECT_TRUE(j["finite"].get<bool>());
}

TEST(Cli, CsvRoundTrip) {
  const Outcome r = invoke({"model", "--p", "3", "--n", "2", "--k", "-0.5", "--lambda", "5", "--grid", "40", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto records = cli::read_csv(r.out);
  ASSERT_EQ(records.size(), 41u);
  EXPECT_EQ(records[0], (std::vector<std::string>{"t", "w", "wdot", "phi", "e", "residual"}));

  const ModelSolution s = solve_model(Family::cosh, 0.0, Params(3, 2, -0.5, 5));
  for (std::size_t i = 1; i < records.size(); ++i) {
    ASSERT_EQ(records[i].size(), 6u);
    const auto t = cli::parse_double(records[i][0]);
    const auto w = cli::parse_double(records[i][1]);
    ASSERT_TRUE(t && w);
    EXPECT_EQ(*w, s.w(*t));
    for (const auto& field : records[i]) {
      const auto v = cli::parse_double(field);
      ASSERT_TRUE(v) << field;
      if (std::isfinite(*v)) {
        EXPECT_EQ(cli::format_double(*v), field);
      }
    }
  }
}

TEST(Cli, CsvQuotingRoundTrip) {
  cli::Table t;
  t.header = {"name", "value", "flag"};
  t.rows.push_back({std::string("plain"), 0.1, true});
  t.rows.push_back({std::string("with, comma"), -1e-300, false});
  t.rows.push_back({std::string("quote \" and\nnewline"), kInfinity, true});
  t.rows.push_back({std::string(""), 1.0 / 3.0, false});
  std::ostringstream os;
  cli::write_csv(os, t);
  const auto back = cli::read_csv(os.str());
  ASSERT_EQ(back.size(), 5u);
  EXPECT_EQ(back[0], t.header);
  EXPECT_EQ(back[2][0], "with, comma");
  EXPECT_EQ(back[3][0], "quote \" and\nnewline");
  EXPECT_EQ(back[4][0], "");
  EXPECT_EQ(*cli::parse_double(back[1][1]), 0.1);
  EXPECT_EQ(*cli::parse_double(back[2][1]), -1e-300);
  EXPECT_EQ(*cli::parse_double(back[3][1]), kInfinity);
  EXPECT_EQ(*cli::parse_double(back[4][1]), 1.0 / 3.0);
  EXPECT_EQ(back[1][2], "true");
}

TEST(Cli, LandscapeRowsInGridOrder) {
  const Outcome r = invoke({"landscape", "--p", "2", "--n", "3", "--k", "-1", "--lambda", "6", "--family", "3",
                            "--a-from", "-0.5", "--a-to", "2", "--a-steps", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 6u);
  for (std::size_t i = 0; i + 1 < 6; ++i) {
    EXPECT_LT(j["rows"][i]["a"].get<double>(), j["rows"][i + 1]["a"].get<double>());
    EXPECT_GT(j["rows"][i]["m"].get<double>(), j["rows"][i + 1]["m"].get<double>());
  }
}

TEST(Cli, InfiniteDiameterSerializesAsNull) {
  const Outcome r = invoke({"landscape", "--n", "4", "--k", "-1", "--lambda", "0.5", "--family", "2",
                            "--a-from", "0", "--a-to", "0", "--a-steps", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["rows"][0]["b"].is_null());
  EXPECT_FALSE(j["rows"][0]["finite"].get<bool>());
  EXPECT_EQ(j["rows"][0]["m"].get<double>(), 0.0);
}

TEST(Cli, VerifySingleSuiteAndOutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "pspectral_cli_verify.json";
  const Outcome r = invoke({"verify", "--suite", "pi-p", "--output", path.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const json j = json::parse(in);
  EXPECT_TRUE(j["passed"].get<bool>());
  ASSERT_EQ(j["suites"].size(), 1u);
  EXPECT_EQ(j["suites"][0]["id"].get<int>(), 2);
  std::filesystem::remove(path);
}

TEST(Cli, JsonNumbersRoundTrip) {
  const Outcome r = invoke({"lambda-bar", "--p", "2.5", "--n", "3", "--k", "-1", "--d", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["lambda_bar"].get<double>(), lambda_bar(3, -1, 2, 2.5).value);
  EXPECT_EQ(r.out.find(','), r.out.find(",\n"));  // no locale digit grouping
}
