#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qbc/cli.hpp"

using namespace qbc;
using namespace qbc::cli;

namespace {

RunSpec parse(std::vector<std::string> args) {
  RunSpec spec;
  CLI::App app;
  app.require_subcommand(1);
  register_options(app, spec);
  for (const auto& [name, fn] : commands()) app.add_subcommand(name)->fallthrough();
  std::vector<const char*> argv{"qbc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  app.parse(static_cast<int>(argv.size()), argv.data());
  spec.command = app.get_subcommands().front()->get_name();
  return spec;
}

double number(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  return static_cast<double>(std::get<std::int64_t>(c));
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Range, Expansion) {
  EXPECT_EQ(parse_range("0:0.5:0.01").size(), 51u);
  EXPECT_EQ(parse_range("0:0.5:0.01").back(), 0.5);
  EXPECT_EQ(parse_range("0.1:0.1:1").size(), 1u);
  EXPECT_THROW(parse_range("0:1"), std::invalid_argument);
  EXPECT_THROW(parse_range("0:1:0"), std::invalid_argument);
  EXPECT_THROW(parse_range("1:0:0.1"), std::invalid_argument);
  EXPECT_THROW(parse_range("a:1:0.1"), std::invalid_argument);
}

TEST(Honest, RowsOverNoiseGrid) {
  const auto a = run_command(parse({"honest", "--r-range", "0:0.2:0.1"}));
  ASSERT_EQ(a.rows.size(), 3u);
  for (const auto& row : a.rows) {
    EXPECT_NEAR(number(row[1]) + number(row[2]), 1.0, 1e-12);
    EXPECT_NEAR(number(row[3]) + number(row[4]), 1.0, 1e-12);
  }
}

TEST(Honest, ContainsClosedFormValue) {
  const auto a = run_command(parse({"honest", "--r", "0.16"}));
  EXPECT_EQ(a.columns[1], "p0_zero");
  EXPECT_NEAR(number(a.rows[0][1]), 0.92, 1e-15);
  EXPECT_NE(to_csv(a).find("0.92,"), std::string::npos);
}

TEST(Honest, JsonRoundTripIsExact) {
  RunSpec spec = parse({"honest", "--variant", "four", "--r-range", "0:0.3:0.07", "--m", "200", "--format", "json"});
  const auto a = run_command(spec);
  const auto doc = nlohmann::json::parse(render(spec, a));
  ASSERT_EQ(doc["rows"].size(), a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    for (std::size_t j = 0; j < a.columns.size(); ++j)
      EXPECT_EQ(doc["rows"][i][a.columns[j]].get<double>(), number(a.rows[i][j]));
}

TEST(Honest, CsvRoundTripKeepsNineDigits) {
  const auto a = run_command(parse({"honest", "--r-range", "0:0.3:0.07"}));
  const auto rows = csv_rows(to_csv(a));
  ASSERT_EQ(rows.size(), a.rows.size() + 1);
  EXPECT_EQ(rows[0], a.columns);
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    for (std::size_t j = 0; j < a.columns.size(); ++j) {
      const double value = number(a.rows[i][j]);
      EXPECT_EQ(std::stod(rows[i + 1][j]), std::stod(format_double(value)));
      EXPECT_NEAR(std::stod(rows[i + 1][j]), value, 5e-9 * std::max(1.0, std::abs(value)));
    }
}

TEST(BindingFailureCmd, CurveShape) {
  const auto a = run_command(parse({"binding-failure", "--m", "100", "--r-range", "0:0.5:0.01"}));
  ASSERT_EQ(a.rows.size(), 51u);
  EXPECT_LT(number(a.rows[0][1]), 1e-6);
  for (std::size_t i = 1; i < a.rows.size(); ++i) EXPECT_GE(number(a.rows[i][1]), number(a.rows[i - 1][1]));
}

TEST(BindingFailureCmd, RejectsIndivisibleM) {
  EXPECT_THROW(run_command(parse({"binding-failure", "--m", "101"})), std::invalid_argument);
  EXPECT_THROW(run_command(parse({"binding-failure", "--variant", "four", "--m", "102"})), std::invalid_argument);
}

TEST(CheatSurface, GridAndBoundaryOptimum) {
  const auto a = run_command(parse({"cheat-surface", "--r", "0", "--m", "100", "--grid-step", "0.02"}));
  ASSERT_EQ(a.rows.size(), 51u * 51u);
  std::size_t best = 0;
  for (std::size_t i = 1; i < a.rows.size(); ++i)
    if (number(a.rows[i][2]) > number(a.rows[best][2])) best = i;
  EXPECT_EQ(number(a.rows[best][0]), 0.0);
  const auto opt = optimize(Variant::TwoState, Commitment::Zero, Noise(0), 50, 3, SinglePhoton{});
  EXPECT_LE(number(a.rows[best][2]), opt.value + 1e-9);
}

TEST(CheatMax, SweepShape) {
  const auto a = run_command(parse({"cheat-max", "--m", "100,200", "--r-range", "0:0.2:0.1", "--grid-step", "0.05"}));
  EXPECT_EQ(a.rows.size(), 6u);
  EXPECT_EQ(a.columns.front(), "m");
}

TEST(Tables, TwoStateRow) {
  const auto a = run_command(parse({"tables", "--m", "200"}));
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(std::get<std::int64_t>(a.rows[0][1]), 100);
  EXPECT_NEAR(number(a.rows[0][2]), 0.0, 0.01);
  EXPECT_NEAR(number(a.rows[0][3]), 0.490563, 0.01);
}

TEST(Tables, FourStateRow) {
  const auto a = run_command(parse({"tables", "--variant", "four", "--m", "400"}));
  EXPECT_NEAR(number(a.rows[0][2]), 0.101166, 0.01);
  EXPECT_NEAR(number(a.rows[0][3]), 0.101166, 0.01);
}

TEST(Distance, Values) {
  const auto a = run_command(parse({"distance", "--alpha", "0.2"}));
  EXPECT_NEAR(number(a.rows[0][1]), 15.0515, 1e-4);
  const auto noisy = run_command(parse({"distance", "--alpha", "0.2", "--rd", "0.1", "--rn", "0"}));
  EXPECT_NEAR(number(noisy.rows[0][4]), 12.4938, 1e-4);
  const auto none = run_command(parse({"distance", "--rd", "0.5", "--rn", "0"}));
  EXPECT_EQ(std::get<std::string>(none.rows[0][4]), "none");
  const auto faked = run_command(parse({"distance", "--rd", "0.1", "--length-km", "10"}));
  EXPECT_EQ(faked.columns.size(), faked.rows[0].size());
}

TEST(Multiphoton, FixedAndOptimizedFlips) {
  const auto fixed = run_command(
      parse({"multiphoton", "--r", "0.1", "--mu-range", "0.1:0.3:0.1", "--p01", "0", "--p10", "0.49"}));
  ASSERT_EQ(fixed.rows.size(), 3u);
  EXPECT_EQ(number(fixed.rows[0][4]), 0.49);
  const auto opt = run_command(parse({"multiphoton", "--r", "0.1", "--mu", "0.2", "--grid-step", "0.05"}));
  ASSERT_EQ(opt.rows.size(), 1u);
  EXPECT_GE(number(opt.rows[0][2]), number(opt.rows[0][5]));
  EXPECT_THROW(run_command(parse({"multiphoton", "--r", "0.1", "--mu", "0.2", "--p01", "0.1"})), std::invalid_argument);
}

TEST(Mc, ReportColumnsAndHistograms) {
  RunSpec spec = parse({"mc", "--r", "0.1", "--trials", "2000", "--seed", "5", "--format", "json"});
  const auto doc = nlohmann::json::parse(render(spec, run_command(spec)));
  EXPECT_EQ(doc["rows"][0]["trials"].get<int>(), 2000);
  EXPECT_EQ(doc["histograms"]["zero"].size(), 51u);
  EXPECT_THROW(run_command(parse({"mc", "--strategy", "faked"})), std::invalid_argument);
}

TEST(Determinism, RepeatedRunsAreByteIdentical) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"mc", "--strategy", "beam-splitter", "--trials", "3000", "--seed", "9"},
        std::vector<std::string>{"cheat-max", "--m", "100", "--r", "0.1", "--grid-step", "0.1"},
        std::vector<std::string>{"honest", "--r-range", "0:1:0.25", "--format", "json"}}) {
    const RunSpec spec = parse(args);
    EXPECT_EQ(render(spec, run_command(spec)), render(spec, run_command(spec)));
  }
}

TEST(Config, FlagsOverrideFileOverridesDefaults) {
  const std::string path = ::testing::TempDir() + "qbc_cli_test.cfg";
  {
    std::ofstream cfg(path);
    cfg << "sigma-factor=2.5\nalpha=0.4\nvariant=four\n";
  }
  const RunSpec from_file = parse({"distance", "--config", path});
  EXPECT_EQ(from_file.sigma_factor, 2.5);
  EXPECT_EQ(from_file.alpha, 0.4);
  EXPECT_EQ(from_file.variant, "four");
  EXPECT_EQ(from_file.grid_step, 0.01);
  const RunSpec overridden = parse({"distance", "--config", path, "--alpha", "0.2"});
  EXPECT_EQ(overridden.alpha, 0.2);
  std::remove(path.c_str());
}

TEST(Errors, UnknownCommandAndFormat) {
  RunSpec spec;
  spec.command = "nope";
  EXPECT_THROW(run_command(spec), std::invalid_argument);
  spec.command = "honest";
  spec.format = "xml";
  EXPECT_THROW(run_command(spec), std::invalid_argument);
}
