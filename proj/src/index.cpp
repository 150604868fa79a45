#include "nxb/index.hpp"

#include <algorithm>

namespace nxb {

const MetadataIndex::PathSet& MetadataIndex::entries_of_class(const NxClass& cls) const {
  auto it = buckets_.find(cls);
  return it == buckets_.end() ? empty_ : it->second;
}

bool MetadataIndex::contains(const NxClass& cls, const NxPath& path) const {
  auto it = buckets_.find(cls);
  if (it == buckets_.end()) return false;
  return it->second.find(path) != it->second.end();
}

std::optional<NxPath> MetadataIndex::first_entry_of_class(const NxClass& cls) const {
  auto it = buckets_.find(cls);
  if (it == buckets_.end() || it->second.empty()) return std::nullopt;
  return *it->second.begin();
}

std::vector<NxPath> MetadataIndex::datasets_under(const NxPath& group) const {
  std::vector<NxPath> out;
  auto bucket = buckets_.find(nx::sds);
  if (bucket == buckets_.end()) return out;

  std::string prefix = group.is_root() ? "/" : group.text() + "/";
  // One logarithmic descent to the start of the prefix range, then a
  // linear walk that never consults the comparator.
  for (auto it = bucket->second.lower_bound(std::string_view(prefix));
       it != bucket->second.end(); ++it) {
    const std::string& text = it->text();
    if (!text.starts_with(prefix)) break;
    std::string_view rest = std::string_view(text).substr(prefix.size());
    if (rest.find('/') == std::string_view::npos) {
      out.push_back(*it);
    }
  }
  return out;
}

std::size_t MetadataIndex::max_entries_per_class() const {
  std::size_t m = 0;
  for (const auto& [cls, paths] : buckets_) {
    m = std::max(m, paths.size());
  }
  return m;
}

std::size_t MetadataIndex::total_entries() const {
  std::size_t n = 0;
  for (const auto& [cls, paths] : buckets_) {
    n += paths.size();
  }
  return n;
}

void MetadataIndex::insert(const NxClass& cls, NxPath path) {
  auto [it, created] = buckets_.try_emplace(cls, PathLess{probe_});
  it->second.insert(std::move(path));
}

MetadataIndex build_index(StoreHandle& handle, MetadataIndex::Probe* probe) {
  MetadataIndex index(probe);

  std::vector<NxPath> pending;
  pending.push_back(NxPath());
  while (!pending.empty()) {
    NxPath group = std::move(pending.back());
    pending.pop_back();
    for (const auto& child : handle.list_children(group)) {
      NxPath path = group.child(child.name);
      if (child.kind == EntryKind::dataset) {
        index.insert(nx::sds, std::move(path));
        continue;
      }
      NxClass cls = nx::unknown;
      try {
        cls = NxClass(handle.read_attribute(path, kClassAttribute));
      } catch (const NoSuchAttribute&) {
        // unannotated group
      }
      index.insert(cls, path);
      pending.push_back(std::move(path));
    }
  }
  return index;
}

}  // namespace nxb
