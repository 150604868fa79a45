#pragma once

// Deterministic synthetic instrument-file generator. Profiles are
// calibrated so the generated entry count matches the representative file
// of each instrument; event payload sizes scale with event_scale while the
// metadata structure stays fixed.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nxb/store.hpp"

namespace nxb {

enum class SizeClass { small, medium, large };

std::string_view to_string(SizeClass size_class);

struct InstrumentProfile {
  std::string name;
  std::uint32_t n_banks = 0;
  std::uint32_t n_logs = 0;
  std::uint32_t n_monitors = 0;
  std::uint32_t pulses = 0;
  std::uint64_t mean_events_per_bank = 0;
  std::uint32_t pixels_per_bank = 0;
  std::uint64_t target_entries = 0;
  SizeClass size_class = SizeClass::small;
  std::string log_prefix;
};

const std::vector<std::string>& profile_names();

// Built-in profile; throws UnknownProfile for anything else.
InstrumentProfile instrument_profile(std::string_view name);

// Deterministic in (profile, seed, event_scale). Throws InvalidScale
// unless 0 < event_scale <= 1.
FileModel generate(const InstrumentProfile& profile, std::uint64_t seed,
                   double event_scale);

// Sidecar provenance: profile, seed, scale, solved composition and totals.
std::string provenance_text(const InstrumentProfile& profile, std::uint64_t seed,
                            double event_scale, const FileModel& model);

}  // namespace nxb
