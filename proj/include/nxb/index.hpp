#pragma once

// Two-level in-memory metadata index: class tag at the first level, sorted
// absolute-path entries at the second. Both levels are balanced ordered
// trees, so lookups cost O(log classes + log entries-per-class) and the
// sorted second level supports prefix range scans.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "nxb/schema.hpp"
#include "nxb/store.hpp"

namespace nxb {

class MetadataIndex {
public:
  // Optional instrumentation hook: every key comparison in either level
  // bumps the probe when one is attached.
  using Probe = std::atomic<std::uint64_t>;

  struct ClassLess {
    Probe* probe = nullptr;
    using is_transparent = void;
    bool operator()(const NxClass& a, const NxClass& b) const {
      hit();
      return a.tag() < b.tag();
    }
    bool operator()(const NxClass& a, std::string_view b) const {
      hit();
      return a.tag() < b;
    }
    bool operator()(std::string_view a, const NxClass& b) const {
      hit();
      return a < b.tag();
    }
    void hit() const {
      if (probe) probe->fetch_add(1, std::memory_order_relaxed);
    }
  };

  struct PathLess {
    Probe* probe = nullptr;
    using is_transparent = void;
    bool operator()(const NxPath& a, const NxPath& b) const {
      hit();
      return a.text() < b.text();
    }
    bool operator()(const NxPath& a, std::string_view b) const {
      hit();
      return a.text() < b;
    }
    bool operator()(std::string_view a, const NxPath& b) const {
      hit();
      return a < b.text();
    }
    void hit() const {
      if (probe) probe->fetch_add(1, std::memory_order_relaxed);
    }
  };

  using PathSet = std::set<NxPath, PathLess>;
  using BucketMap = std::map<NxClass, PathSet, ClassLess>;

  MetadataIndex() : MetadataIndex(nullptr) {}
  explicit MetadataIndex(Probe* probe)
      : buckets_(ClassLess{probe}), probe_(probe), empty_(PathLess{probe}) {}

  // Full bucket in sorted order; an empty set for absent classes.
  const PathSet& entries_of_class(const NxClass& cls) const;

  // Membership via one map lookup plus one set lookup.
  bool contains(const NxClass& cls, const NxPath& path) const;

  // Smallest path in the bucket, or absent.
  std::optional<NxPath> first_entry_of_class(const NxClass& cls) const;

  // SDS entries exactly one level below the group, found by a range scan
  // bounded by the group prefix.
  std::vector<NxPath> datasets_under(const NxPath& group) const;

  std::size_t class_count() const { return buckets_.size(); }
  std::size_t max_entries_per_class() const;
  std::size_t total_entries() const;
  const BucketMap& buckets() const { return buckets_; }

private:
  friend MetadataIndex build_index(StoreHandle& handle, Probe* probe);
  void insert(const NxClass& cls, NxPath path);

  BucketMap buckets_;
  Probe* probe_ = nullptr;
  PathSet empty_;
};

// One complete depth-first traversal of the metadata: exactly one
// list_children per group and one read_attribute ("NX_class") per non-root
// group; no dataset payload reads. Built as soon as a file is opened and
// shared read-only across loader stages.
MetadataIndex build_index(StoreHandle& handle, MetadataIndex::Probe* probe = nullptr);

}  // namespace nxb
