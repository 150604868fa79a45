#pragma once

// Domain types for NeXus-style hierarchical entries: absolute entry paths,
// group class tags and entry records, plus the classification rule that
// assigns every entry to exactly one class.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nxb/errors.hpp"

namespace nxb {

// Absolute slash-separated entry path. Always canonical: leading "/",
// non-empty components, and no trailing "/" except the root path "/".
// Ordering is byte-wise lexicographic on the full text.
class NxPath {
public:
  NxPath() : text_("/") {}

  const std::string& text() const { return text_; }
  bool is_root() const { return text_.size() == 1; }

  // Last component. Precondition: not the root.
  std::string_view leaf() const;

  // Path with the last component removed; the parent of a depth-1 path is
  // the root. Throws RootHasNoParent for "/".
  NxPath parent() const;

  // Appends one component. Throws MalformedPath if name is empty or
  // contains '/'.
  NxPath child(std::string_view name) const;

  // Number of components; 0 for the root.
  std::size_t depth() const;

  friend auto operator<=>(const NxPath&, const NxPath&) = default;

private:
  explicit NxPath(std::string text) : text_(std::move(text)) {}
  friend NxPath parse_path(std::string_view raw);

  std::string text_;
};

// Validates raw text as a canonical absolute path. No rewriting is
// performed; non-canonical input throws MalformedPath.
NxPath parse_path(std::string_view raw);

// Entry type tag: one of the well-known NeXus class names or an open text
// value for anything else. "SDS" is reserved for dataset entries and never
// appears as a stored group attribute value.
class NxClass {
public:
  explicit NxClass(std::string tag) : tag_(std::move(tag)) {}

  const std::string& tag() const { return tag_; }

  friend auto operator<=>(const NxClass&, const NxClass&) = default;

private:
  std::string tag_;
};

// Well-known class tags.
namespace nx {
inline const NxClass entry{"NXentry"};
inline const NxClass collection{"NXcollection"};
inline const NxClass log{"NXlog"};
inline const NxClass event_data{"NXevent_data"};
inline const NxClass monitor{"NXmonitor"};
inline const NxClass instrument{"NXinstrument"};
inline const NxClass detector{"NXdetector"};
inline const NxClass geometry{"NXgeometry"};
inline const NxClass sds{"SDS"};
inline const NxClass unknown{"NXunknown"};
}  // namespace nx

// Attribute key carrying the group class tag.
inline constexpr std::string_view kClassAttribute = "NX_class";

enum class EntryKind : std::uint8_t { group = 0, dataset = 1 };

enum class Dtype : std::uint8_t { u32 = 0, u64 = 1, f32 = 2, f64 = 3, utf8 = 4 };

// Bytes per element; utf8 datasets are byte arrays.
std::size_t dtype_size(Dtype dtype);
std::string_view dtype_name(Dtype dtype);

struct DatasetInfo {
  Dtype dtype = Dtype::u32;
  std::uint64_t element_count = 0;
  std::uint64_t byte_length = 0;

  friend bool operator==(const DatasetInfo&, const DatasetInfo&) = default;
};

// One entry of a file's hierarchy. Group records carry no dataset info.
struct EntryRecord {
  NxPath path;
  EntryKind kind = EntryKind::group;
  std::map<std::string, std::string, std::less<>> attributes;
  std::optional<DatasetInfo> dataset;

  friend bool operator==(const EntryRecord&, const EntryRecord&) = default;
};

// Total classification rule: datasets are SDS unconditionally; groups take
// the value of their "NX_class" attribute, or "NXunknown" when absent.
NxClass classify_entry(const EntryRecord& rec);

}  // namespace nxb
