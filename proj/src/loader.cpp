#include "nxb/loader.hpp"

#include <algorithm>
#include <future>

namespace nxb {

namespace {

// Metadata available to one stage: the shared index in indexed mode, or a
// stage-private reconstruction in legacy mode. Rebuilding per stage is the
// measured legacy cost: one full hierarchy walk per stage.
class StageView {
public:
  explicit StageView(const LoadContext& ctx) {
    if (ctx.mode == LoadMode::indexed) {
      index_ = ctx.index;
    } else {
      transient_ = build_index(ctx.handle);
      index_ = &*transient_;
    }
  }

  const MetadataIndex& operator*() const { return *index_; }
  const MetadataIndex* operator->() const { return index_; }

private:
  std::optional<MetadataIndex> transient_;
  const MetadataIndex* index_ = nullptr;
};

template <typename T>
std::vector<T> take_array(DatasetValue value, const NxPath& path, const char* what) {
  auto* v = std::get_if<std::vector<T>>(&value);
  if (!v) {
    throw MissingDataset(std::string(what) + " has wrong dtype: " + path.text());
  }
  return std::move(*v);
}

double take_scalar_f64(DatasetValue value, const NxPath& path, const char* what) {
  auto v = take_array<double>(std::move(value), path, what);
  if (v.size() != 1) {
    throw MissingDataset(std::string(what) + " is not a scalar: " + path.text());
  }
  return v.front();
}

std::uint32_t take_scalar_u32(DatasetValue value, const NxPath& path, const char* what) {
  auto v = take_array<std::uint32_t>(std::move(value), path, what);
  if (v.size() != 1) {
    throw MissingDataset(std::string(what) + " is not a scalar: " + path.text());
  }
  return v.front();
}

// Dataset children of a group, keyed by name. Indexed mode goes through
// the shared index; legacy mode may pass a stage-private view.
std::map<std::string, NxPath, std::less<>> dataset_children(const MetadataIndex& view,
                                                            const NxPath& group) {
  std::map<std::string, NxPath, std::less<>> out;
  for (auto& path : view.datasets_under(group)) {
    std::string name(path.leaf());
    out.emplace(std::move(name), std::move(path));
  }
  return out;
}

const NxPath& require_dataset(const std::map<std::string, NxPath, std::less<>>& names,
                              std::string_view name, const NxPath& group) {
  auto it = names.find(name);
  if (it == names.end()) {
    throw MissingDataset("missing dataset \"" + std::string(name) + "\" under " +
                         group.text());
  }
  return it->second;
}

void validate_bank(const BankEvents& bank) {
  const auto& path = bank.bank_path;
  if (bank.event_id.size() != bank.event_total_counts ||
      bank.event_time_offset.size() != bank.event_total_counts) {
    throw MalformedBank("event arrays disagree with event_total_counts: " +
                        path.text());
  }
  if (bank.event_index.size() != bank.event_time_zero.size()) {
    throw MalformedBank("event_index and event_time_zero lengths differ: " +
                        path.text());
  }
  if (bank.event_index.empty() || bank.event_index.front() != 0) {
    throw MalformedBank("event_index must start at 0: " + path.text());
  }
  for (std::size_t i = 0; i < bank.event_index.size(); ++i) {
    if (bank.event_index[i] > bank.event_total_counts) {
      throw MalformedBank("event_index exceeds event_total_counts: " + path.text());
    }
    if (i > 0 && bank.event_index[i] < bank.event_index[i - 1]) {
      throw MalformedBank("event_index is not monotone: " + path.text());
    }
  }
}

// "bank7_events" -> "bank7"; the NXdetector group carrying the pixel range
// shares the stem of the NXevent_data group name.
std::string detector_name(std::string_view event_group_name) {
  constexpr std::string_view suffix = "_events";
  if (event_group_name.ends_with(suffix)) {
    return std::string(event_group_name.substr(0, event_group_name.size() - suffix.size()));
  }
  return std::string(event_group_name);
}

}  // namespace

std::string_view to_string(LoadMode mode) {
  return mode == LoadMode::legacy ? "legacy" : "indexed";
}

std::uint64_t EventWorkspace::total_events() const {
  std::uint64_t n = 0;
  for (const auto& t : bank_totals) n += t;
  return n;
}

std::map<std::string, LogSeries> load_logs(const LoadContext& ctx) {
  StageView view(ctx);
  std::map<std::string, LogSeries> out;
  for (const auto& group : view->entries_of_class(nx::log)) {
    auto names = dataset_children(*view, group);
    LogSeries series;
    series.name = std::string(group.leaf());
    series.times = take_array<double>(
        ctx.handle.read_dataset(require_dataset(names, "time", group)), group, "time");
    series.values = take_array<double>(
        ctx.handle.read_dataset(require_dataset(names, "value", group)), group, "value");
    series.average_value = take_scalar_f64(
        ctx.handle.read_dataset(require_dataset(names, "average_value", group)), group,
        "average_value");
    series.average_value_error = take_scalar_f64(
        ctx.handle.read_dataset(require_dataset(names, "average_value_error", group)),
        group, "average_value_error");

    if (series.times.size() != series.values.size()) {
      throw MalformedLog("time and value lengths differ: " + group.text());
    }
    for (std::size_t i = 1; i < series.times.size(); ++i) {
      if (series.times[i] <= series.times[i - 1]) {
        throw MalformedLog("times not strictly increasing: " + group.text());
      }
    }
    if (!out.emplace(series.name, std::move(series)).second) {
      throw MalformedLog("duplicate log name: " + std::string(group.leaf()));
    }
  }
  return out;
}

std::map<std::string, std::vector<std::uint64_t>> load_monitors(const LoadContext& ctx) {
  StageView view(ctx);
  std::map<std::string, std::vector<std::uint64_t>> out;
  for (const auto& group : view->entries_of_class(nx::monitor)) {
    auto names = dataset_children(*view, group);
    auto it = names.find("data");
    if (it == names.end()) {
      throw MalformedMonitor("missing \"data\" dataset under " + group.text());
    }
    DatasetValue value = ctx.handle.read_dataset(it->second);
    auto* counts = std::get_if<std::vector<std::uint64_t>>(&value);
    if (!counts) {
      throw MalformedMonitor("monitor data has wrong dtype: " + group.text());
    }
    out.emplace(std::string(group.leaf()), std::move(*counts));
  }
  return out;
}

Geometry load_geometry(const LoadContext& ctx) {
  StageView view(ctx);
  Geometry geometry;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (const auto& group : view->entries_of_class(nx::detector)) {
    auto names = dataset_children(*view, group);
    PixelRange range;
    range.pixel_id_offset = take_scalar_u32(
        ctx.handle.read_dataset(require_dataset(names, "pixel_id_offset", group)),
        group, "pixel_id_offset");
    range.pixel_count = take_scalar_u32(
        ctx.handle.read_dataset(require_dataset(names, "pixel_count", group)), group,
        "pixel_count");
    if (range.pixel_count > 0) {
      ranges.emplace_back(range.pixel_id_offset,
                          std::uint64_t(range.pixel_id_offset) + range.pixel_count);
    }
    geometry.banks.emplace(std::string(group.leaf()), range);
  }
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].first < ranges[i - 1].second) {
      throw OverlappingPixelRanges("detector pixel ranges overlap");
    }
  }
  return geometry;
}

BankEvents load_bank_data(const LoadContext& ctx, const NxPath& bank) {
  std::map<std::string, NxPath, std::less<>> names;
  if (ctx.mode == LoadMode::indexed) {
    names = dataset_children(*ctx.index, bank);
  } else {
    for (const auto& child : ctx.handle.list_children(bank)) {
      if (child.kind == EntryKind::dataset) {
        names.emplace(child.name, bank.child(child.name));
      }
    }
  }

  BankEvents events;
  events.bank_path = bank;
  events.event_id = take_array<std::uint32_t>(
      ctx.handle.read_dataset(require_dataset(names, "event_id", bank)), bank,
      "event_id");
  events.event_time_offset = take_array<float>(
      ctx.handle.read_dataset(require_dataset(names, "event_time_offset", bank)), bank,
      "event_time_offset");
  events.event_time_zero = take_array<double>(
      ctx.handle.read_dataset(require_dataset(names, "event_time_zero", bank)), bank,
      "event_time_zero");
  events.event_index = take_array<std::uint64_t>(
      ctx.handle.read_dataset(require_dataset(names, "event_index", bank)), bank,
      "event_index");

  const auto total = take_array<std::uint64_t>(
      ctx.handle.read_dataset(require_dataset(names, "event_total_counts", bank)), bank,
      "event_total_counts");
  if (total.size() != 1) {
    throw MalformedBank("event_total_counts is not a scalar: " + bank.text());
  }
  events.event_total_counts = total.front();

  validate_bank(events);
  return events;
}

std::vector<std::uint64_t> assign_pulses(const BankEvents& bank) {
  std::vector<std::uint64_t> pulses(bank.event_total_counts);
  std::size_t p = 0;
  for (std::uint64_t e = 0; e < bank.event_total_counts; ++e) {
    while (p + 1 < bank.event_index.size() && bank.event_index[p + 1] <= e) {
      ++p;
    }
    pulses[e] = p;
  }
  return pulses;
}

EventWorkspace load_event_nexus(StoreHandle& handle, LoadMode mode,
                                const LoadOptions& options) {
  std::optional<MetadataIndex> shared;
  LoadContext ctx{handle, mode, nullptr};

  if (mode == LoadMode::indexed) {
    shared = build_index(handle);
    ctx.index = &*shared;
    if (!shared->first_entry_of_class(nx::entry)) {
      throw MissingEntryGroup("file has no NXentry group");
    }
  } else {
    // Hierarchical entry lookup: list the root and classify every child.
    bool found = false;
    for (const auto& child : handle.list_children(NxPath())) {
      if (child.kind != EntryKind::group) continue;
      try {
        if (handle.read_attribute(NxPath().child(child.name), kClassAttribute) ==
            nx::entry.tag()) {
          found = true;
        }
      } catch (const NoSuchAttribute&) {
      }
    }
    if (!found) {
      throw MissingEntryGroup("file has no NXentry group");
    }
  }

  EventWorkspace ws;
  ws.logs = load_logs(ctx);
  ws.monitors = load_monitors(ctx);
  ws.geometry = load_geometry(ctx);

  // Stage 4: discover banks, load each, merge in sorted bank-path order.
  std::vector<NxPath> banks;
  {
    StageView view(ctx);
    const auto& bucket = view->entries_of_class(nx::event_data);
    banks.assign(bucket.begin(), bucket.end());
  }

  std::vector<BankEvents> loaded(banks.size());
  if (options.parallel_banks) {
    std::vector<std::future<BankEvents>> futures;
    futures.reserve(banks.size());
    for (const auto& bank : banks) {
      futures.push_back(std::async(std::launch::async, [&ctx, &bank] {
        return load_bank_data(ctx, bank);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
      loaded[i] = futures[i].get();
    }
  } else {
    for (std::size_t i = 0; i < banks.size(); ++i) {
      loaded[i] = load_bank_data(ctx, banks[i]);
    }
  }

  for (auto& bank : loaded) {
    std::string name(bank.bank_path.leaf());
    auto range = ws.geometry.banks.find(detector_name(name));
    if (range == ws.geometry.banks.end()) {
      throw MalformedBank("no detector pixel range for " + bank.bank_path.text());
    }
    std::uint64_t lo = range->second.pixel_id_offset;
    std::uint64_t hi = lo + range->second.pixel_count;

    auto pulses = assign_pulses(bank);
    auto ordinal = static_cast<std::uint32_t>(ws.bank_names.size());
    ws.bank_names.push_back(std::move(name));
    ws.bank_totals.push_back(bank.event_total_counts);
    for (std::uint64_t e = 0; e < bank.event_total_counts; ++e) {
      std::uint32_t pixel = bank.event_id[e];
      if (pixel < lo || pixel >= hi) {
        throw MalformedBank("event pixel id outside detector range: " +
                            bank.bank_path.text());
      }
      ws.pixels[pixel].push_back(PixelEvent{bank.event_time_offset[e], pulses[e], ordinal});
    }
  }
  return ws;
}

}  // namespace nxb
