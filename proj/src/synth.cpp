#include "nxb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nxb {

namespace {

// mt19937_64 with pinned reduction arithmetic, so models are reproducible
// across standard library implementations (std distributions are not).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {  // inclusive
    return lo + eng_() % (hi - lo + 1);
  }

  double unit() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

private:
  std::mt19937_64 eng_;
};

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Composition solved against the entry-count identity
//   entries = 3 + 5*logs + 2*monitors + 9*banks
// (entry, DASlogs and instrument groups; 1 group + 4 datasets per log;
// 1 group + 1 dataset per monitor; per bank 1 detector group + 2 datasets
// and 1 event group + 5 datasets).
const std::vector<InstrumentProfile>& builtin_profiles() {
  static const std::vector<InstrumentProfile> profiles = {
      {"gpsans", 48, 648, 4, 60, 160000, 1024, 3683, SizeClass::small, "CG2"},
      {"biosans", 44, 560, 2, 60, 200000, 1024, 3203, SizeClass::small, "CG3"},
      {"eqsans", 48, 418, 2, 240, 1200000, 1024, 2529, SizeClass::medium, "BL6"},
      {"corelli", 91, 366, 4, 240, 400000, 1024, 2660, SizeClass::medium, "BL9"},
      {"nom", 99, 134, 4, 240, 1400000, 1024, 1572, SizeClass::large, "BL1B"},
  };
  return profiles;
}

const char* kLogCategories[] = {"CS", "SE", "Chop", "Mot", "Det"};

std::string log_name(const InstrumentProfile& profile, std::uint32_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s:%s:Var%04u", profile.log_prefix.c_str(),
                kLogCategories[i % 5], i + 1);
  return buf;
}

float draw_tof(Rng& rng) {
  // exponential-like time-of-flight, mean 2500 us, clamped to one frame
  double tof = -2500.0 * std::log(1.0 - rng.unit());
  return static_cast<float>(std::min(tof, 16666.5));
}

}  // namespace

std::string_view to_string(SizeClass size_class) {
  switch (size_class) {
    case SizeClass::small: return "small";
    case SizeClass::medium: return "medium";
    case SizeClass::large: return "large";
  }
  return "small";
}

const std::vector<std::string>& profile_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& p : builtin_profiles()) out.push_back(p.name);
    return out;
  }();
  return names;
}

InstrumentProfile instrument_profile(std::string_view name) {
  for (const auto& profile : builtin_profiles()) {
    if (profile.name == name) return profile;
  }
  throw UnknownProfile("unknown instrument profile: \"" + std::string(name) + "\"");
}

FileModel generate(const InstrumentProfile& profile, std::uint64_t seed,
                   double event_scale) {
  if (!(event_scale > 0.0) || event_scale > 1.0) {
    throw InvalidScale("event_scale must be in (0, 1]");
  }
  Rng rng(seed ^ fnv1a(profile.name));

  ModelBuilder builder;
  NxPath entry = NxPath().child("entry");
  builder.group(entry, nx::entry);

  // DAS logs under one NXcollection container.
  NxPath daslogs = entry.child("DASlogs");
  builder.group(daslogs, nx::collection);
  for (std::uint32_t i = 0; i < profile.n_logs; ++i) {
    NxPath log = daslogs.child(log_name(profile, i));
    builder.group(log, nx::log);

    std::size_t len = rng.uniform(2, 24);
    std::vector<double> times(len), values(len);
    double t = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      t += 0.25 + 3.75 * rng.unit();
      times[k] = t;
      values[k] = -100.0 + 200.0 * rng.unit();
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(len);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(len - 1);

    builder.dataset(log.child("time"), times);
    builder.dataset(log.child("value"), values);
    builder.dataset(log.child("average_value"), std::vector<double>{mean});
    builder.dataset(log.child("average_value_error"),
                    std::vector<double>{std::sqrt(var / static_cast<double>(len))});
  }

  for (std::uint32_t i = 0; i < profile.n_monitors; ++i) {
    NxPath monitor = entry.child("monitor" + std::to_string(i + 1));
    builder.group(monitor, nx::monitor);
    std::vector<std::uint64_t> counts(profile.pulses);
    for (auto& c : counts) c = rng.uniform(0, 10000);
    builder.dataset(monitor.child("data"), std::move(counts));
  }

  NxPath instrument = entry.child("instrument");
  builder.group(instrument, nx::instrument);
  for (std::uint32_t i = 0; i < profile.n_banks; ++i) {
    NxPath det = instrument.child("bank" + std::to_string(i + 1));
    builder.group(det, nx::detector);
    builder.dataset(det.child("pixel_id_offset"),
                    std::vector<std::uint32_t>{i * profile.pixels_per_bank});
    builder.dataset(det.child("pixel_count"),
                    std::vector<std::uint32_t>{profile.pixels_per_bank});
  }

  std::vector<double> pulse_times(profile.pulses);
  for (std::uint32_t p = 0; p < profile.pulses; ++p) {
    pulse_times[p] = static_cast<double>(p) / 60.0;
  }

  for (std::uint32_t i = 0; i < profile.n_banks; ++i) {
    NxPath bank = entry.child("bank" + std::to_string(i + 1) + "_events");
    builder.group(bank, nx::event_data);

    double around = static_cast<double>(profile.mean_events_per_bank) * event_scale;
    auto n = static_cast<std::uint64_t>(std::llround(around * (0.8 + 0.4 * rng.unit())));

    std::uint32_t lo = i * profile.pixels_per_bank;
    std::vector<std::uint32_t> ids(n);
    std::vector<float> tof(n);
    for (std::uint64_t e = 0; e < n; ++e) {
      ids[e] = lo + static_cast<std::uint32_t>(
                        rng.uniform(0, profile.pixels_per_bank - 1));
      tof[e] = draw_tof(rng);
    }

    // Pulse boundaries: sorted cut points over [0, n].
    std::vector<std::uint64_t> index(profile.pulses);
    index[0] = 0;
    for (std::uint32_t p = 1; p < profile.pulses; ++p) {
      index[p] = n == 0 ? 0 : rng.uniform(0, n);
    }
    std::sort(index.begin(), index.end());

    builder.dataset(bank.child("event_id"), std::move(ids));
    builder.dataset(bank.child("event_index"), std::move(index));
    builder.dataset(bank.child("event_time_offset"), std::move(tof));
    builder.dataset(bank.child("event_time_zero"), pulse_times);
    builder.dataset(bank.child("event_total_counts"), std::vector<std::uint64_t>{n});
  }

  return builder.build();
}

std::string provenance_text(const InstrumentProfile& profile, std::uint64_t seed,
                            double event_scale, const FileModel& model) {
  std::uint64_t total_events = 0;
  std::size_t groups = 0;
  std::size_t datasets = 0;
  for (const auto& rec : model.records) {
    if (rec.kind == EntryKind::group) {
      ++groups;
    } else {
      ++datasets;
    }
  }
  for (const auto& [path, value] : model.payloads) {
    if (path.leaf() == "event_total_counts") {
      total_events += std::get<std::vector<std::uint64_t>>(value).front();
    }
  }

  std::ostringstream out;
  out << "nxb synthetic instrument file\n"
      << "profile: " << profile.name << "\n"
      << "seed: " << seed << "\n"
      << "event_scale: " << event_scale << "\n"
      << "size_class: " << to_string(profile.size_class) << "\n"
      << "composition:\n"
      << "  overhead_groups: 3 (entry, DASlogs, instrument)\n"
      << "  logs: " << profile.n_logs << " (1 group + 4 datasets each)\n"
      << "  monitors: " << profile.n_monitors << " (1 group + 1 dataset each)\n"
      << "  banks: " << profile.n_banks
      << " (1 detector group + 2 datasets, 1 event group + 5 datasets each)\n"
      << "  pulses_per_bank: " << profile.pulses << "\n"
      << "  pixels_per_bank: " << profile.pixels_per_bank << "\n"
      << "  mean_events_per_bank: " << profile.mean_events_per_bank << "\n"
      << "groups: " << groups - 1 << " (excluding root)\n"
      << "datasets: " << datasets << "\n"
      << "entries: " << entry_count(model) << "\n"
      << "target_entries: " << profile.target_entries << "\n"
      << "total_events: " << total_events << "\n";
  return out.str();
}

}  // namespace nxb
