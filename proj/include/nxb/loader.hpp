#pragma once

// Dual-mode event-file loading pipeline. Four stages (logs, monitors,
// geometry, bank data) build an EventWorkspace. Legacy mode gives each
// stage no shared metadata: every stage re-walks the hierarchy from the
// root and rebuilds its own transient metadata view. Indexed mode builds
// one MetadataIndex when the file is opened and shares it across all
// stages, so no stage issues further metadata calls.

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nxb/index.hpp"
#include "nxb/schema.hpp"
#include "nxb/store.hpp"

namespace nxb {

enum class LoadMode { legacy, indexed };

std::string_view to_string(LoadMode mode);

struct LoadContext {
  StoreHandle& handle;
  LoadMode mode = LoadMode::indexed;
  const MetadataIndex* index = nullptr;  // present iff mode == indexed
};

// Time-stamped process variable series.
struct LogSeries {
  std::string name;
  std::vector<double> times;   // seconds since run start, strictly increasing
  std::vector<double> values;
  double average_value = 0.0;
  double average_value_error = 0.0;

  friend bool operator==(const LogSeries&, const LogSeries&) = default;
};

// The five event datasets of one NXevent_data group.
struct BankEvents {
  NxPath bank_path;
  std::vector<std::uint32_t> event_id;          // detector pixel identifiers
  std::vector<float> event_time_offset;         // time-of-flight, microseconds
  std::vector<double> event_time_zero;          // pulse offsets, seconds
  std::vector<std::uint64_t> event_index;       // first event of each pulse
  std::uint64_t event_total_counts = 0;

  friend bool operator==(const BankEvents&, const BankEvents&) = default;
};

struct PixelRange {
  std::uint32_t pixel_id_offset = 0;
  std::uint32_t pixel_count = 0;

  friend bool operator==(const PixelRange&, const PixelRange&) = default;
};

struct Geometry {
  std::map<std::string, PixelRange> banks;  // detector name -> pixel range

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct PixelEvent {
  float tof = 0.0f;          // microseconds
  std::uint64_t pulse = 0;   // index within the bank's pulse list
  std::uint32_t bank = 0;    // index into EventWorkspace::bank_names

  friend bool operator==(const PixelEvent& a, const PixelEvent& b) {
    return std::bit_cast<std::uint32_t>(a.tof) == std::bit_cast<std::uint32_t>(b.tof) &&
           a.pulse == b.pulse && a.bank == b.bank;
  }
};

// Reduced in-memory result of a load: per-pixel event lists plus log time
// series. Within each pixel, events appear in (bank, original position)
// order regardless of the load schedule.
struct EventWorkspace {
  std::map<std::uint32_t, std::vector<PixelEvent>> pixels;
  std::map<std::string, LogSeries> logs;
  std::map<std::string, std::vector<std::uint64_t>> monitors;
  Geometry geometry;
  std::vector<std::string> bank_names;   // event-group names, path-sorted
  std::vector<std::uint64_t> bank_totals;

  std::uint64_t total_events() const;

  friend bool operator==(const EventWorkspace&, const EventWorkspace&) = default;
};

struct LoadOptions {
  bool parallel_banks = false;
};

// Stage 1: one LogSeries per NXlog group, keyed by group name.
std::map<std::string, LogSeries> load_logs(const LoadContext& ctx);

// Stage 2: one counts array per NXmonitor group; empty when absent.
std::map<std::string, std::vector<std::uint64_t>> load_monitors(const LoadContext& ctx);

// Stage 3: pixel ranges of all NXdetector groups, sorted by path.
Geometry load_geometry(const LoadContext& ctx);

// Stage 4 worker: the five event datasets of one bank. Indexed mode
// resolves dataset paths through the shared index with zero metadata
// calls; legacy mode lists the bank group.
BankEvents load_bank_data(const LoadContext& ctx, const NxPath& bank);

// Pulse index per event: event e belongs to pulse p when
// event_index[p] <= e < event_index[p+1]; the last pulse extends to
// event_total_counts.
std::vector<std::uint64_t> assign_pulses(const BankEvents& bank);

// Runs the four stages in order and assembles the workspace. Both modes
// read identical payload bytes and return structurally identical
// workspaces.
EventWorkspace load_event_nexus(StoreHandle& handle, LoadMode mode,
                                const LoadOptions& options = {});

}  // namespace nxb
