// Command-line surface: generate synthetic instrument files, inspect and
// index NXB containers, run dual-mode loads and the benchmark harness.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nxb/bench.hpp"
#include "nxb/index.hpp"
#include "nxb/loader.hpp"
#include "nxb/synth.hpp"

namespace {

using nlohmann::json;

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw nxb::IoFailure("cannot open for writing: " + path.string());
  }
  out << text;
  if (!out.flush()) {
    throw nxb::IoFailure("write failed: " + path.string());
  }
}

int cmd_gen(const std::string& profile_name, std::uint64_t seed, double scale,
            const std::filesystem::path& output) {
  nxb::InstrumentProfile profile = nxb::instrument_profile(profile_name);
  nxb::FileModel model = nxb::generate(profile, seed, scale);
  nxb::write_store(model, output);
  std::filesystem::path sidecar = output;
  sidecar += ".provenance.txt";
  write_text_file(nxb::provenance_text(profile, seed, scale, model), sidecar);
  std::cout << output.string() << ": " << nxb::entry_count(model) << " entries, "
            << std::filesystem::file_size(output) << " bytes\n";
  return 0;
}

int cmd_inspect(const std::filesystem::path& path, bool tree) {
  nxb::StoreHandle handle = nxb::open_store(path);

  std::size_t groups = 0;
  std::size_t datasets = 0;
  std::uint64_t payload_bytes = 0;
  struct Item {
    nxb::NxPath path;
    nxb::EntryKind kind;
  };
  std::vector<Item> items;

  // walk through the counted interface so inspect exercises exactly what a
  // consumer sees
  std::vector<nxb::NxPath> pending{nxb::NxPath()};
  while (!pending.empty()) {
    nxb::NxPath group = std::move(pending.back());
    pending.pop_back();
    for (const auto& child : handle.list_children(group)) {
      nxb::NxPath path = group.child(child.name);
      items.push_back({path, child.kind});
      if (child.kind == nxb::EntryKind::dataset) {
        ++datasets;
        payload_bytes += handle.dataset_info(path).byte_length;
      } else {
        ++groups;
        pending.push_back(std::move(path));
      }
    }
  }

  std::cout << path.string() << ": " << groups + datasets << " entries ("
            << groups << " groups, " << datasets << " datasets), "
            << payload_bytes << " payload bytes\n";

  if (tree) {
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.path < b.path; });
    for (const auto& item : items) {
      std::string indent(2 * (item.path.depth() - 1), ' ');
      if (item.kind == nxb::EntryKind::group) {
        std::string cls = "NXunknown";
        try {
          cls = handle.read_attribute(item.path, nxb::kClassAttribute);
        } catch (const nxb::NoSuchAttribute&) {
        }
        std::cout << indent << item.path.leaf() << "/  [" << cls << "]\n";
      } else {
        nxb::DatasetInfo info = handle.dataset_info(item.path);
        std::cout << indent << item.path.leaf() << "  (" << nxb::dtype_name(info.dtype)
                  << "[" << info.element_count << "])\n";
      }
    }
  }
  return 0;
}

int cmd_index(const std::filesystem::path& path, bool dump) {
  nxb::StoreHandle handle = nxb::open_store(path);
  nxb::MetadataIndex index = nxb::build_index(handle);

  std::cout << path.string() << ": " << index.class_count() << " classes, "
            << index.total_entries() << " entries, largest class "
            << index.max_entries_per_class() << "\n";
  for (const auto& [cls, paths] : index.buckets()) {
    std::cout << "  " << cls.tag() << ": " << paths.size() << "\n";
  }

  if (dump) {
    std::cout << "\nKey: NX_class    Value: sorted absolute-path entries\n";
    for (const auto& [cls, paths] : index.buckets()) {
      std::string label = cls.tag();
      label.resize(std::max<std::size_t>(16, label.size() + 1), ' ');
      for (const auto& entry : paths) {
        std::cout << label << entry.text() << "\n";
        label.assign(label.size(), ' ');
      }
      std::cout << "\n";
    }
  }
  return 0;
}

int cmd_load(const std::filesystem::path& path, const std::string& mode_name,
             bool as_json, std::uint64_t latency_us) {
  nxb::LoadMode mode =
      mode_name == "legacy" ? nxb::LoadMode::legacy : nxb::LoadMode::indexed;
  nxb::StoreHandle handle = nxb::open_store(path);
  handle.set_meta_latency(std::chrono::microseconds(latency_us));

  auto start = std::chrono::steady_clock::now();
  nxb::EventWorkspace ws = nxb::load_event_nexus(handle, mode);
  auto stop = std::chrono::steady_clock::now();
  double wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();

  nxb::CallCounters c = handle.counters();
  if (as_json) {
    json banks = json::object();
    for (std::size_t i = 0; i < ws.bank_names.size(); ++i) {
      banks[ws.bank_names[i]] = ws.bank_totals[i];
    }
    json geometry = json::object();
    for (const auto& [name, range] : ws.geometry.banks) {
      geometry[name] = {{"pixel_id_offset", range.pixel_id_offset},
                        {"pixel_count", range.pixel_count}};
    }
    json out = {
        {"file", path.string()},
        {"mode", std::string(nxb::to_string(mode))},
        {"banks", banks},
        {"geometry", geometry},
        {"log_count", ws.logs.size()},
        {"monitor_count", ws.monitors.size()},
        {"pixel_count", ws.pixels.size()},
        {"total_events", ws.total_events()},
        {"counters",
         {{"list_children_calls", c.list_children_calls},
          {"read_attribute_calls", c.read_attribute_calls},
          {"dataset_info_calls", c.dataset_info_calls},
          {"read_dataset_calls", c.read_dataset_calls},
          {"bytes_read", c.bytes_read}}},
    };
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << path.string() << " [" << nxb::to_string(mode) << "] "
              << ws.total_events() << " events in " << ws.bank_names.size()
              << " banks, " << ws.logs.size() << " logs, " << ws.monitors.size()
              << " monitors, " << ws.pixels.size() << " pixels hit\n"
              << "wall_ms=" << wall_ms << " list_children=" << c.list_children_calls
              << " read_attribute=" << c.read_attribute_calls
              << " read_dataset=" << c.read_dataset_calls
              << " bytes_read=" << c.bytes_read << "\n";
  }
  return 0;
}

int cmd_bench(const std::vector<std::string>& profiles, int repeat, double scale,
              std::uint64_t latency_us, const std::string& cache,
              const std::filesystem::path& csv) {
  nxb::BenchConfig config;
  config.profiles = profiles;
  config.repeats = repeat;
  config.event_scale = scale;
  config.meta_latency_us = latency_us;
  config.cache_mode =
      cache == "repeated" ? nxb::CacheMode::repeated : nxb::CacheMode::fresh;

  nxb::BenchReport report = nxb::run_benchmark(config);
  nxb::write_rows_csv(report, csv);

  std::filesystem::path summary = csv;
  summary.replace_extension();
  summary += "_summary.csv";
  nxb::write_summary_csv(report, summary);

  std::cout << nxb::summary_csv(report);
  std::cerr << "rows: " << csv.string() << "\nsummary: " << summary.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NXB event-file tool: synthetic generation, metadata indexing, "
               "dual-mode loading and benchmarking"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic instrument file");
  std::string profile;
  std::uint64_t seed = 1;
  double scale = 0.01;
  std::filesystem::path output;
  gen->add_option("--profile", profile, "instrument profile name")->required();
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--scale", scale, "event payload scale in (0, 1]");
  gen->add_option("-o,--output", output, "output .nxb path")->required();

  // inspect
  auto* inspect = app.add_subcommand("inspect", "summarize a container file");
  std::filesystem::path inspect_path;
  bool tree = false;
  inspect->add_option("path", inspect_path, "input .nxb path")->required();
  inspect->add_flag("--tree", tree, "print the full hierarchy");

  // index
  auto* index_cmd = app.add_subcommand("index", "build and print the metadata index");
  std::filesystem::path index_path;
  bool dump = false;
  index_cmd->add_option("path", index_path, "input .nxb path")->required();
  index_cmd->add_flag("--dump", dump, "dump the full sorted index");

  // load
  auto* load = app.add_subcommand("load", "load a file into an event workspace");
  std::filesystem::path load_path;
  std::string mode = "indexed";
  bool as_json = false;
  std::uint64_t latency_us = 0;
  load->add_option("path", load_path, "input .nxb path")->required();
  load->add_option("--mode", mode, "traversal mode")
      ->check(CLI::IsMember({"legacy", "indexed"}))
      ->required();
  load->add_flag("--json", as_json, "emit a JSON summary");
  load->add_option("--meta-latency-us", latency_us,
                   "injected latency per metadata call");

  // bench
  auto* bench = app.add_subcommand("bench", "compare legacy and indexed loads");
  std::string profiles_csv;
  int repeat = 3;
  double bench_scale = 0.01;
  std::uint64_t bench_latency = 0;
  std::string cache = "fresh";
  std::filesystem::path csv;
  bench->add_option("--profiles", profiles_csv, "comma-separated profile names")
      ->required();
  bench->add_option("--repeat", repeat, "runs per profile and mode")->required();
  bench->add_option("--scale", bench_scale, "event payload scale");
  bench->add_option("--meta-latency-us", bench_latency,
                    "injected latency per metadata call");
  bench->add_option("--cache", cache, "fresh: new file per run; repeated: reuse")
      ->check(CLI::IsMember({"fresh", "repeated"}));
  bench->add_option("--csv", csv, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help/version exit with 0; every other parse problem is a usage error
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(profile, seed, scale, output);
    if (inspect->parsed()) return cmd_inspect(inspect_path, tree);
    if (index_cmd->parsed()) return cmd_index(index_path, dump);
    if (load->parsed()) return cmd_load(load_path, mode, as_json, latency_us);
    if (bench->parsed()) {
      std::vector<std::string> profiles;
      std::stringstream ss(profiles_csv);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) profiles.push_back(item);
      }
      return cmd_bench(profiles, repeat, bench_scale, bench_latency, cache, csv);
    }
  } catch (const nxb::IoFailure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const nxb::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
