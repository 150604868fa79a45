#pragma once

// Benchmark harness: repeated legacy vs. indexed loads of synthetic
// instrument files, wall-clock and call-count accounting, and the
// relative-speedup arithmetic used for reporting.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nxb/synth.hpp"

namespace nxb {

enum class CacheMode { fresh, repeated };

std::string_view to_string(CacheMode mode);

struct BenchConfig {
  std::vector<std::string> profiles;
  int repeats = 3;
  double event_scale = 0.01;
  std::uint64_t meta_latency_us = 0;
  // fresh: a new file is written for every run (cold-cache analog);
  // repeated: one file per profile is loaded repeatedly.
  CacheMode cache_mode = CacheMode::fresh;
  std::uint64_t seed = 1;
  std::filesystem::path workdir;  // empty: a fresh temp directory
};

struct BenchRow {
  std::string profile;
  std::string mode;
  int run = 0;
  double wall_ms = 0.0;
  std::uint64_t list_children_calls = 0;
  std::uint64_t read_attribute_calls = 0;
  std::uint64_t read_dataset_calls = 0;
  std::uint64_t bytes_read = 0;
};

struct BenchSummary {
  std::string profile;
  double legacy_wall_ms_median = 0.0;
  double indexed_wall_ms_median = 0.0;
  double relative_speedup = 0.0;
  // legacy metadata calls / indexed metadata calls, where metadata calls
  // are list_children_calls + read_attribute_calls.
  double call_reduction_ratio = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;          // one per (profile, mode, run)
  std::vector<BenchSummary> summaries; // one per profile
};

// (old - new) / old. Throws NonPositiveBaseline when old_ms <= 0.
double relative_speedup(double old_ms, double new_ms);

// Metadata traffic is deterministic, so call counts are identical across
// runs of one (profile, mode); only wall time varies. Summaries use
// medians across repeats.
BenchReport run_benchmark(const BenchConfig& config);

std::string rows_csv(const BenchReport& report);
std::string summary_csv(const BenchReport& report);
void write_rows_csv(const BenchReport& report, const std::filesystem::path& path);
void write_summary_csv(const BenchReport& report, const std::filesystem::path& path);

}  // namespace nxb
