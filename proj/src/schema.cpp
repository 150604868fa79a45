#include "nxb/schema.hpp"

#include <algorithm>

namespace nxb {

std::string_view NxPath::leaf() const {
  auto pos = text_.rfind('/');
  return std::string_view(text_).substr(pos + 1);
}

NxPath NxPath::parent() const {
  if (is_root()) {
    throw RootHasNoParent("root path has no parent");
  }
  auto pos = text_.rfind('/');
  if (pos == 0) {
    return NxPath();
  }
  return NxPath(text_.substr(0, pos));
}

NxPath NxPath::child(std::string_view name) const {
  if (name.empty() || name.find('/') != std::string_view::npos) {
    throw MalformedPath("invalid path component: \"" + std::string(name) + "\"");
  }
  std::string out = is_root() ? "/" : text_ + "/";
  out += name;
  return NxPath(std::move(out));
}

std::size_t NxPath::depth() const {
  if (is_root()) {
    return 0;
  }
  return static_cast<std::size_t>(std::count(text_.begin(), text_.end(), '/'));
}

NxPath parse_path(std::string_view raw) {
  if (raw.empty()) {
    throw MalformedPath("empty path");
  }
  if (raw.front() != '/') {
    throw MalformedPath("path must begin with '/': \"" + std::string(raw) + "\"");
  }
  if (raw.size() == 1) {
    return NxPath();
  }
  if (raw.back() == '/') {
    throw MalformedPath("trailing '/' in path: \"" + std::string(raw) + "\"");
  }
  for (std::size_t i = 1; i < raw.size(); ++i) {
    if (raw[i] == '/' && raw[i - 1] == '/') {
      throw MalformedPath("empty component in path: \"" + std::string(raw) + "\"");
    }
  }
  return NxPath(std::string(raw));
}

std::size_t dtype_size(Dtype dtype) {
  switch (dtype) {
    case Dtype::u32: return 4;
    case Dtype::u64: return 8;
    case Dtype::f32: return 4;
    case Dtype::f64: return 8;
    case Dtype::utf8: return 1;
  }
  throw DataError("unreachable dtype");
}

std::string_view dtype_name(Dtype dtype) {
  switch (dtype) {
    case Dtype::u32: return "u32";
    case Dtype::u64: return "u64";
    case Dtype::f32: return "f32";
    case Dtype::f64: return "f64";
    case Dtype::utf8: return "utf8";
  }
  throw DataError("unreachable dtype");
}

NxClass classify_entry(const EntryRecord& rec) {
  if (rec.kind == EntryKind::dataset) {
    return nx::sds;
  }
  auto it = rec.attributes.find(kClassAttribute);
  if (it == rec.attributes.end()) {
    return nx::unknown;
  }
  return NxClass(it->second);
}

}  // namespace nxb
