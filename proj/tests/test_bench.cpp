#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "nxb/bench.hpp"
#include "support/temp_files.hpp"

using namespace nxb;
using nxb::testing::TempDir;

TEST_CASE("relative speedup arithmetic") {
  // the three published workflow comparisons, as percentages
  CHECK(std::abs(relative_speedup(58.9, 41.8) * 100.0 - 29.0) <= 0.5);
  CHECK(std::abs(relative_speedup(100.2, 80.9) * 100.0 - 19.0) <= 0.5);
  CHECK(std::abs(relative_speedup(99.0, 88.0) * 100.0 - 11.0) <= 0.5);

  CHECK(relative_speedup(5.0, 5.0) == 0.0);
  CHECK(relative_speedup(10.0, 12.5) == -0.25);  // regressions are negative
  CHECK_THROWS_AS(relative_speedup(0.0, 1.0), NonPositiveBaseline);
  CHECK_THROWS_AS(relative_speedup(-3.0, 1.0), NonPositiveBaseline);
}

TEST_CASE("one row per profile, mode and run") {
  TempDir dir;
  BenchConfig config;
  config.profiles = {"gpsans"};
  config.repeats = 3;
  config.event_scale = 0.001;
  config.meta_latency_us = 0;
  config.cache_mode = CacheMode::repeated;
  config.workdir = dir.path();

  BenchReport report = run_benchmark(config);
  CHECK(report.rows.size() == 6);  // 1 profile x 2 modes x 3 runs
  REQUIRE(report.summaries.size() == 1);

  int legacy_rows = 0;
  int indexed_rows = 0;
  for (const auto& row : report.rows) {
    CHECK(row.profile == "gpsans");
    if (row.mode == "legacy") ++legacy_rows;
    if (row.mode == "indexed") ++indexed_rows;
  }
  CHECK(legacy_rows == 3);
  CHECK(indexed_rows == 3);

  // metadata traffic is deterministic across runs
  for (const auto& row : report.rows) {
    for (const auto& other : report.rows) {
      if (row.mode != other.mode) continue;
      CHECK(row.list_children_calls == other.list_children_calls);
      CHECK(row.read_attribute_calls == other.read_attribute_calls);
      CHECK(row.bytes_read == other.bytes_read);
    }
  }

  CHECK(report.summaries[0].call_reduction_ratio >= 3.0);
}

TEST_CASE("fresh cache mode rewrites the file per run") {
  TempDir dir;
  BenchConfig config;
  config.profiles = {"nom"};
  config.repeats = 2;
  config.event_scale = 0.001;
  config.cache_mode = CacheMode::fresh;
  config.workdir = dir.path();

  BenchReport report = run_benchmark(config);
  CHECK(report.rows.size() == 4);
  CHECK(report.summaries.size() == 1);
  CHECK(report.summaries[0].call_reduction_ratio > 1.0);
}

TEST_CASE("injected latency predicts the wall-time gap") {
  TempDir dir;
  BenchConfig config;
  config.profiles = {"gpsans"};
  config.repeats = 5;
  config.event_scale = 0.001;
  config.meta_latency_us = 10;
  config.cache_mode = CacheMode::repeated;
  config.workdir = dir.path();

  BenchReport report = run_benchmark(config);
  const BenchSummary& summary = report.summaries.at(0);

  std::uint64_t legacy_calls = 0;
  std::uint64_t indexed_calls = 0;
  std::map<int, double> legacy_wall, indexed_wall;
  for (const auto& row : report.rows) {
    if (row.mode == "legacy") {
      legacy_calls = row.list_children_calls + row.read_attribute_calls;
      legacy_wall[row.run] = row.wall_ms;
    } else {
      indexed_calls = row.list_children_calls + row.read_attribute_calls;
      indexed_wall[row.run] = row.wall_ms;
    }
  }
  double predicted_ms =
      static_cast<double>(legacy_calls - indexed_calls) * 10.0 / 1000.0;
  std::vector<double> deltas;
  for (const auto& [run, wall] : legacy_wall) {
    deltas.push_back(wall - indexed_wall.at(run));
  }
  std::sort(deltas.begin(), deltas.end());
  double measured_ms = deltas[deltas.size() / 2];
  CHECK(measured_ms > 0.0);
  CHECK(std::abs(measured_ms - predicted_ms) <= 0.2 * predicted_ms);
  CHECK(summary.relative_speedup > 0.0);
}

TEST_CASE("speedup never decreases as metadata latency grows") {
  TempDir dir;
  for (const char* name : {"gpsans", "biosans", "eqsans", "corelli", "nom"}) {
    CAPTURE(name);
    double previous = -1.0;
    for (std::uint64_t latency : {2ull, 10ull, 50ull}) {
      BenchConfig config;
      config.profiles = {name};
      config.repeats = 3;
      config.event_scale = 0.001;
      config.meta_latency_us = latency;
      config.cache_mode = CacheMode::repeated;
      config.workdir = dir.path();
      BenchReport report = run_benchmark(config);
      double speedup = report.summaries.at(0).relative_speedup;
      CHECK(speedup >= previous);
      previous = speedup;
    }
  }
}

TEST_CASE("CSV layouts") {
  TempDir dir;
  BenchConfig config;
  config.profiles = {"gpsans"};
  config.repeats = 1;
  config.event_scale = 0.001;
  config.cache_mode = CacheMode::repeated;
  config.workdir = dir.path();
  BenchReport report = run_benchmark(config);

  std::string rows = rows_csv(report);
  CHECK(rows.starts_with(
      "profile,mode,run,wall_ms,list_children_calls,read_attribute_calls,"
      "read_dataset_calls,bytes_read\n"));
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 3);  // header + 2 rows

  std::string summary = summary_csv(report);
  CHECK(summary.starts_with(
      "profile,legacy_wall_ms_median,indexed_wall_ms_median,relative_speedup,"
      "call_reduction_ratio\n"));
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 2);
  CHECK(summary.find("gpsans,") != std::string::npos);

  auto rows_file = dir.file("rows.csv");
  auto summary_file = dir.file("summary.csv");
  write_rows_csv(report, rows_file);
  write_summary_csv(report, summary_file);
  CHECK(std::filesystem::file_size(rows_file) == rows.size());
  CHECK(std::filesystem::file_size(summary_file) == summary.size());
}
