#include "nxb/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "nxb/loader.hpp"

namespace nxb {

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::uint64_t metadata_calls(const BenchRow& row) {
  return row.list_children_calls + row.read_attribute_calls;
}

BenchRow timed_load(const std::filesystem::path& file, const std::string& profile,
                    LoadMode mode, int run, std::uint64_t latency_us) {
  auto start = std::chrono::steady_clock::now();
  StoreHandle handle = open_store(file);
  handle.set_meta_latency(std::chrono::microseconds(latency_us));
  EventWorkspace ws = load_event_nexus(handle, mode);
  auto stop = std::chrono::steady_clock::now();

  CallCounters c = handle.counters();
  BenchRow row;
  row.profile = profile;
  row.mode = std::string(to_string(mode));
  row.run = run;
  row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  row.list_children_calls = c.list_children_calls;
  row.read_attribute_calls = c.read_attribute_calls;
  row.read_dataset_calls = c.read_dataset_calls;
  row.bytes_read = c.bytes_read;
  // keep the workspace alive through the timed region
  (void)ws.total_events();
  return row;
}

void append_row_csv(std::ostringstream& out, const BenchRow& row) {
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.3f", row.wall_ms);
  out << row.profile << ',' << row.mode << ',' << row.run << ',' << wall << ','
      << row.list_children_calls << ',' << row.read_attribute_calls << ','
      << row.read_dataset_calls << ',' << row.bytes_read << '\n';
}

}  // namespace

std::string_view to_string(CacheMode mode) {
  return mode == CacheMode::fresh ? "fresh" : "repeated";
}

double relative_speedup(double old_ms, double new_ms) {
  if (!(old_ms > 0.0)) {
    throw NonPositiveBaseline("baseline wall time must be positive");
  }
  return (old_ms - new_ms) / old_ms;
}

BenchReport run_benchmark(const BenchConfig& config) {
  if (config.repeats < 1) {
    throw DataError("repeats must be >= 1");
  }

  std::filesystem::path workdir = config.workdir;
  bool own_workdir = workdir.empty();
  if (own_workdir) {
    workdir = std::filesystem::temp_directory_path() /
              ("nxb-bench-" + std::to_string(::getpid()));
    std::filesystem::create_directories(workdir);
  }

  BenchReport report;
  for (const auto& name : config.profiles) {
    InstrumentProfile profile = instrument_profile(name);
    FileModel model = generate(profile, config.seed, config.event_scale);
    std::filesystem::path file = workdir / (name + ".nxb");

    std::vector<BenchRow> legacy_rows;
    std::vector<BenchRow> indexed_rows;
    if (config.cache_mode == CacheMode::repeated) {
      write_store(model, file);
    }
    for (int run = 1; run <= config.repeats; ++run) {
      if (config.cache_mode == CacheMode::fresh) {
        std::filesystem::remove(file);
        write_store(model, file);
      }
      legacy_rows.push_back(
          timed_load(file, name, LoadMode::legacy, run, config.meta_latency_us));
      indexed_rows.push_back(
          timed_load(file, name, LoadMode::indexed, run, config.meta_latency_us));
    }

    for (const auto& rows : {&legacy_rows, &indexed_rows}) {
      for (const auto& row : *rows) {
        if (metadata_calls(row) != metadata_calls(rows->front()) ||
            row.bytes_read != rows->front().bytes_read) {
          throw Error("metadata traffic varied across runs for " + name);
        }
      }
    }

    BenchSummary summary;
    summary.profile = name;
    std::vector<double> legacy_wall, indexed_wall;
    for (const auto& row : legacy_rows) legacy_wall.push_back(row.wall_ms);
    for (const auto& row : indexed_rows) indexed_wall.push_back(row.wall_ms);
    summary.legacy_wall_ms_median = median(legacy_wall);
    summary.indexed_wall_ms_median = median(indexed_wall);
    summary.relative_speedup =
        relative_speedup(summary.legacy_wall_ms_median, summary.indexed_wall_ms_median);
    summary.call_reduction_ratio =
        static_cast<double>(metadata_calls(legacy_rows.front())) /
        static_cast<double>(metadata_calls(indexed_rows.front()));

    report.rows.insert(report.rows.end(), legacy_rows.begin(), legacy_rows.end());
    report.rows.insert(report.rows.end(), indexed_rows.begin(), indexed_rows.end());
    report.summaries.push_back(summary);

    std::filesystem::remove(file);
  }

  if (own_workdir) {
    std::error_code ec;
    std::filesystem::remove_all(workdir, ec);
  }
  return report;
}

std::string rows_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "profile,mode,run,wall_ms,list_children_calls,read_attribute_calls,"
         "read_dataset_calls,bytes_read\n";
  for (const auto& row : report.rows) {
    append_row_csv(out, row);
  }
  return out.str();
}

std::string summary_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "profile,legacy_wall_ms_median,indexed_wall_ms_median,relative_speedup,"
         "call_reduction_ratio\n";
  for (const auto& s : report.summaries) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.3f,%.3f,%.6f,%.6f", s.profile.c_str(),
                  s.legacy_wall_ms_median, s.indexed_wall_ms_median,
                  s.relative_speedup, s.call_reduction_ratio);
    out << buf << '\n';
  }
  return out.str();
}

namespace {
void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) {
    throw IoFailure("cannot open for writing: " + path.string());
  }
  file << text;
  if (!file.flush()) {
    throw IoFailure("write failed: " + path.string());
  }
}
}  // namespace

void write_rows_csv(const BenchReport& report, const std::filesystem::path& path) {
  write_text(rows_csv(report), path);
}

void write_summary_csv(const BenchReport& report, const std::filesystem::path& path) {
  write_text(summary_csv(report), path);
}

}  // namespace nxb
