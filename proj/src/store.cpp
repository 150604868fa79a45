#include "nxb/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <limits>

namespace nxb {

namespace {

constexpr char kMagic[4] = {'N', 'X', 'B', '1'};
constexpr std::uint8_t kVersion = 0x01;
constexpr std::size_t kHeaderBytes = 13;  // magic + version + record_count

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

std::uint16_t checked_u16(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint16_t>::max()) {
    throw InvalidModel(std::string(what) + " exceeds u16 range");
  }
  return static_cast<std::uint16_t>(v);
}

// Little-endian numeric array encoders; utf8 payloads are raw bytes.
struct PayloadEncoder {
  std::string& out;

  void operator()(const std::vector<std::uint32_t>& v) const {
    for (auto x : v) {
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
    }
  }
  void operator()(const std::vector<std::uint64_t>& v) const {
    for (auto x : v) put_u64(out, x);
  }
  void operator()(const std::vector<float>& v) const {
    for (auto x : v) {
      std::uint32_t bits;
      std::memcpy(&bits, &x, 4);
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
  }
  void operator()(const std::vector<double>& v) const {
    for (auto x : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, 8);
      put_u64(out, bits);
    }
  }
  void operator()(const std::string& v) const { out.append(v); }
};

// Sequential block-buffered parser over the metadata region. Buffering may
// touch at most one chunk past the record table; payloads themselves stay
// unread until a read_dataset call asks for them.
class HeaderReader {
public:
  HeaderReader(int fd, std::uint64_t file_size) : fd_(fd), file_size_(file_size) {}

  std::uint64_t offset() const { return offset_; }

  std::uint8_t u8() {
    std::uint8_t b;
    fill(&b, 1);
    return b;
  }

  std::uint16_t u16() {
    std::uint8_t b[2];
    fill(b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint64_t u64() {
    std::uint8_t b[8];
    fill(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    if (n > 0) fill(reinterpret_cast<std::uint8_t*>(s.data()), n);
    return s;
  }

private:
  static constexpr std::size_t kChunk = 256 * 1024;

  void fill(std::uint8_t* dst, std::size_t n) {
    if (offset_ + n > file_size_) {
      throw TruncatedRecord("record table runs past end of file");
    }
    while (n > 0) {
      if (buffer_pos_ == buffer_.size()) {
        refill();
      }
      std::size_t take = std::min(n, buffer_.size() - buffer_pos_);
      std::memcpy(dst, buffer_.data() + buffer_pos_, take);
      buffer_pos_ += take;
      offset_ += take;
      dst += take;
      n -= take;
    }
  }

  void refill() {
    std::uint64_t file_pos = offset_;
    std::size_t want =
        static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, file_size_ - file_pos));
    if (want == 0) {
      throw TruncatedRecord("unexpected end of file in record table");
    }
    buffer_.resize(want);
    std::size_t done = 0;
    while (done < want) {
      ssize_t r = ::pread(fd_, buffer_.data() + done, want - done,
                          static_cast<off_t>(file_pos + done));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw IoFailure(std::string("pread: ") + std::strerror(errno));
      }
      if (r == 0) {
        buffer_.resize(done);
        break;
      }
      done += static_cast<std::size_t>(r);
    }
    if (buffer_.empty()) {
      throw TruncatedRecord("unexpected end of file in record table");
    }
    buffer_pos_ = 0;
  }

  int fd_;
  std::uint64_t file_size_;
  std::uint64_t offset_ = 0;
  std::vector<std::uint8_t> buffer_;
  std::size_t buffer_pos_ = 0;
};

struct EncodedRecord {
  std::string head;   // bytes up to the dataset trailer
  bool is_dataset = false;
  std::uint64_t element_count = 0;
  std::uint64_t byte_length = 0;
};

std::size_t record_encoded_size(const EncodedRecord& rec) {
  return rec.head.size() + (rec.is_dataset ? 25 : 0);  // dtype + 3 x u64
}

}  // namespace

Dtype dtype_of(const DatasetValue& value) {
  return static_cast<Dtype>(value.index());
}

std::uint64_t element_count_of(const DatasetValue& value) {
  return std::visit([](const auto& v) { return static_cast<std::uint64_t>(v.size()); },
                    value);
}

std::uint64_t byte_length_of(const DatasetValue& value) {
  return element_count_of(value) * dtype_size(dtype_of(value));
}

void validate_model(const FileModel& model) {
  if (model.records.empty()) {
    throw InvalidModel("model has no records");
  }
  const auto& root = model.records.front();
  if (!root.path.is_root() || root.kind != EntryKind::group) {
    throw InvalidModel("first record must be the root group \"/\"");
  }
  std::map<NxPath, const EntryRecord*> seen;
  std::size_t dataset_count = 0;
  for (const auto& rec : model.records) {
    if (!seen.emplace(rec.path, &rec).second) {
      throw InvalidModel("duplicate path: " + rec.path.text());
    }
    if (!rec.path.is_root()) {
      auto parent = seen.find(rec.path.parent());
      if (parent == seen.end()) {
        throw InvalidModel("parent missing or out of order for " + rec.path.text());
      }
      if (parent->second->kind != EntryKind::group) {
        throw InvalidModel("parent is not a group for " + rec.path.text());
      }
    }
    if (rec.kind == EntryKind::group) {
      if (rec.dataset.has_value()) {
        throw InvalidModel("group record carries dataset info: " + rec.path.text());
      }
      auto attr = rec.attributes.find(kClassAttribute);
      if (attr != rec.attributes.end()) {
        if (attr->second.empty()) {
          throw InvalidModel("empty NX_class on " + rec.path.text());
        }
        if (attr->second == nx::sds.tag()) {
          throw InvalidModel("reserved SDS class on group " + rec.path.text());
        }
      }
    } else {
      ++dataset_count;
      if (!rec.dataset.has_value()) {
        throw InvalidModel("dataset record lacks dataset info: " + rec.path.text());
      }
      auto payload = model.payloads.find(rec.path);
      if (payload == model.payloads.end()) {
        throw InvalidModel("missing payload for " + rec.path.text());
      }
      const auto& info = *rec.dataset;
      if (dtype_of(payload->second) != info.dtype ||
          element_count_of(payload->second) != info.element_count ||
          byte_length_of(payload->second) != info.byte_length ||
          info.byte_length != info.element_count * dtype_size(info.dtype)) {
        throw InvalidModel("payload does not match dataset info: " + rec.path.text());
      }
    }
  }
  if (dataset_count != model.payloads.size()) {
    throw InvalidModel("payloads present for paths without dataset records");
  }
}

std::size_t entry_count(const FileModel& model) {
  std::size_t n = 0;
  for (const auto& rec : model.records) {
    if (!rec.path.is_root()) ++n;
  }
  return n;
}

ModelBuilder::ModelBuilder() {
  model_.records.push_back(EntryRecord{NxPath(), EntryKind::group, {}, {}});
}

ModelBuilder& ModelBuilder::group(const NxPath& path, const NxClass& cls) {
  model_.records.push_back(
      EntryRecord{path, EntryKind::group,
                  {{std::string(kClassAttribute), cls.tag()}}, {}});
  return *this;
}

ModelBuilder& ModelBuilder::group(const NxPath& path) {
  model_.records.push_back(EntryRecord{path, EntryKind::group, {}, {}});
  return *this;
}

ModelBuilder& ModelBuilder::attribute(const NxPath& path, std::string key,
                                      std::string value) {
  // callers annotate recently added records; scan from the back
  for (auto it = model_.records.rbegin(); it != model_.records.rend(); ++it) {
    if (it->path == path) {
      it->attributes[std::move(key)] = std::move(value);
      return *this;
    }
  }
  throw InvalidModel("attribute target not found: " + path.text());
}

ModelBuilder& ModelBuilder::dataset(const NxPath& path, DatasetValue value) {
  DatasetInfo info{dtype_of(value), element_count_of(value), byte_length_of(value)};
  model_.records.push_back(EntryRecord{path, EntryKind::dataset, {}, info});
  model_.payloads.emplace(path, std::move(value));
  return *this;
}

FileModel ModelBuilder::build() {
  validate_model(model_);
  return std::move(model_);
}

void write_store(const FileModel& model, const std::filesystem::path& destination) {
  validate_model(model);

  // First pass: encode record heads so the data region offset is known
  // before dataset offsets are written.
  std::vector<EncodedRecord> encoded;
  encoded.reserve(model.records.size());
  for (const auto& rec : model.records) {
    EncodedRecord enc;
    enc.head.push_back(static_cast<char>(rec.kind));
    put_u16(enc.head, checked_u16(rec.path.text().size(), "path length"));
    enc.head += rec.path.text();
    put_u16(enc.head, checked_u16(rec.attributes.size(), "attribute count"));
    for (const auto& [key, value] : rec.attributes) {
      put_u16(enc.head, checked_u16(key.size(), "attribute key length"));
      enc.head += key;
      put_u16(enc.head, checked_u16(value.size(), "attribute value length"));
      enc.head += value;
    }
    if (rec.kind == EntryKind::dataset) {
      enc.is_dataset = true;
      enc.element_count = rec.dataset->element_count;
      enc.byte_length = rec.dataset->byte_length;
    }
    encoded.push_back(std::move(enc));
  }

  std::uint64_t data_start = kHeaderBytes;
  for (const auto& enc : encoded) {
    data_start += record_encoded_size(enc);
  }

  std::string out;
  out.reserve(data_start);
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  put_u64(out, model.records.size());

  std::uint64_t cursor = data_start;
  for (std::size_t i = 0; i < model.records.size(); ++i) {
    const auto& rec = model.records[i];
    out += encoded[i].head;
    if (encoded[i].is_dataset) {
      out.push_back(static_cast<char>(rec.dataset->dtype));
      put_u64(out, encoded[i].element_count);
      put_u64(out, cursor);
      put_u64(out, encoded[i].byte_length);
      cursor += encoded[i].byte_length;
    }
  }

  // Data region, in record order.
  for (const auto& rec : model.records) {
    if (rec.kind == EntryKind::dataset) {
      std::visit(PayloadEncoder{out}, model.payloads.at(rec.path));
    }
  }

  std::ofstream file(destination, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw IoFailure("cannot open for writing: " + destination.string());
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  file.flush();
  if (!file) {
    throw IoFailure("write failed: " + destination.string());
  }
}

StoreHandle::FdOwner& StoreHandle::FdOwner::operator=(FdOwner&& other) noexcept {
  if (this != &other) {
    if (fd >= 0) ::close(fd);
    fd = other.fd;
    other.fd = -1;
  }
  return *this;
}

StoreHandle::FdOwner::~FdOwner() {
  if (fd >= 0) ::close(fd);
}

StoreHandle open_store(const std::filesystem::path& source) {
  int fd = ::open(source.c_str(), O_RDONLY);
  if (fd < 0) {
    throw IoFailure("cannot open " + source.string() + ": " + std::strerror(errno));
  }
  StoreHandle handle;
  handle.fd_ = StoreHandle::FdOwner(fd);
  handle.source_ = source;
  handle.state_ = std::make_unique<StoreHandle::State>();

  std::error_code ec;
  std::uint64_t file_size = std::filesystem::file_size(source, ec);
  if (ec) {
    throw IoFailure("cannot stat " + source.string() + ": " + ec.message());
  }

  HeaderReader in(fd, file_size);
  if (file_size < kHeaderBytes) {
    throw BadMagic("file too short for NXB header");
  }
  std::string magic = in.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw BadMagic("not an NXB file");
  }
  if (in.u8() != kVersion) {
    throw BadMagic("unsupported NXB version");
  }
  std::uint64_t record_count = in.u64();
  // A record is at least 6 bytes (kind, path_len, one path byte, attr_count).
  if (record_count > (file_size - kHeaderBytes) / 6) {
    throw TruncatedRecord("record count exceeds file capacity");
  }

  handle.records_.reserve(record_count);
  handle.data_offsets_.reserve(record_count);
  for (std::uint64_t i = 0; i < record_count; ++i) {
    std::uint8_t kind_byte = in.u8();
    if (kind_byte > 1) {
      throw TruncatedRecord("invalid record kind byte");
    }
    EntryRecord rec;
    rec.kind = static_cast<EntryKind>(kind_byte);
    rec.path = parse_path(in.bytes(in.u16()));
    std::uint16_t attr_count = in.u16();
    for (std::uint16_t a = 0; a < attr_count; ++a) {
      std::string key = in.bytes(in.u16());
      std::string value = in.bytes(in.u16());
      rec.attributes.emplace(std::move(key), std::move(value));
    }
    std::uint64_t data_offset = 0;
    if (rec.kind == EntryKind::dataset) {
      std::uint8_t dtype_byte = in.u8();
      if (dtype_byte > 4) {
        throw TruncatedRecord("invalid dtype byte");
      }
      DatasetInfo info;
      info.dtype = static_cast<Dtype>(dtype_byte);
      info.element_count = in.u64();
      data_offset = in.u64();
      info.byte_length = in.u64();
      rec.dataset = info;
    }
    handle.records_.push_back(std::move(rec));
    handle.data_offsets_.push_back(data_offset);
  }
  std::uint64_t table_end = in.offset();

  // Structural validation: unique paths, parents present, in order and
  // groups; dataset payload extents inside the data region.
  for (std::size_t i = 0; i < handle.records_.size(); ++i) {
    const auto& rec = handle.records_[i];
    if (!handle.by_path_.emplace(rec.path, i).second) {
      throw DuplicatePath("duplicate path: " + rec.path.text());
    }
    if (rec.path.is_root()) {
      if (rec.kind != EntryKind::group) {
        throw OrphanRecord("root record is not a group");
      }
      continue;
    }
    auto parent = handle.by_path_.find(rec.path.parent());
    if (parent == handle.by_path_.end()) {
      throw OrphanRecord("parent missing or out of order for " + rec.path.text());
    }
    if (handle.records_[parent->second].kind != EntryKind::group) {
      throw OrphanRecord("parent is not a group for " + rec.path.text());
    }
    if (rec.kind == EntryKind::dataset) {
      std::uint64_t off = handle.data_offsets_[i];
      std::uint64_t len = rec.dataset->byte_length;
      if (off < table_end || off + len > file_size || off + len < off) {
        throw TruncatedRecord("dataset payload extent outside data region: " +
                              rec.path.text());
      }
    }
  }
  if (handle.records_.empty() || !handle.records_.front().path.is_root()) {
    throw OrphanRecord("file has no root record");
  }

  // Child tables, sorted by name.
  handle.children_.resize(handle.records_.size());
  for (std::size_t i = 1; i < handle.records_.size(); ++i) {
    std::size_t parent = handle.by_path_.at(handle.records_[i].path.parent());
    handle.children_[parent].push_back(ChildEntry{
        std::string(handle.records_[i].path.leaf()), handle.records_[i].kind});
  }
  for (auto& kids : handle.children_) {
    std::sort(kids.begin(), kids.end(), [](const ChildEntry& a, const ChildEntry& b) {
      return a.name < b.name;
    });
  }
  return handle;
}

std::size_t StoreHandle::find(const NxPath& path) const {
  auto it = by_path_.find(path);
  if (it == by_path_.end()) {
    throw NoSuchPath("no such path: " + path.text());
  }
  return it->second;
}

void StoreHandle::meta_delay() const {
  auto us = state_->latency_us.load(std::memory_order_relaxed);
  if (us <= 0) return;
  auto end = std::chrono::steady_clock::now() + std::chrono::microseconds(us);
  while (std::chrono::steady_clock::now() < end) {
    // busy-wait; sleep_for would round 10 us up to the timer slack
  }
}

const std::vector<ChildEntry>& StoreHandle::list_children(const NxPath& group) const {
  state_->list_children.fetch_add(1, std::memory_order_relaxed);
  meta_delay();
  std::size_t i = find(group);
  if (records_[i].kind != EntryKind::group) {
    throw NotAGroup("not a group: " + group.text());
  }
  return children_[i];
}

std::string StoreHandle::read_attribute(const NxPath& entry,
                                        std::string_view key) const {
  state_->read_attribute.fetch_add(1, std::memory_order_relaxed);
  meta_delay();
  const auto& rec = records_[find(entry)];
  auto it = rec.attributes.find(key);
  if (it == rec.attributes.end()) {
    throw NoSuchAttribute("no attribute \"" + std::string(key) + "\" on " +
                          entry.text());
  }
  return it->second;
}

DatasetInfo StoreHandle::dataset_info(const NxPath& entry) const {
  state_->dataset_info.fetch_add(1, std::memory_order_relaxed);
  meta_delay();
  const auto& rec = records_[find(entry)];
  if (rec.kind != EntryKind::dataset) {
    throw NotADataset("not a dataset: " + entry.text());
  }
  return *rec.dataset;
}

DatasetValue StoreHandle::read_dataset(const NxPath& entry) const {
  state_->read_dataset.fetch_add(1, std::memory_order_relaxed);
  std::size_t i = find(entry);
  const auto& rec = records_[i];
  if (rec.kind != EntryKind::dataset) {
    throw NotADataset("not a dataset: " + entry.text());
  }
  const auto& info = *rec.dataset;
  if (info.byte_length != info.element_count * dtype_size(info.dtype)) {
    throw CorruptPayload("byte length inconsistent with element count: " +
                         entry.text());
  }

  std::string raw(info.byte_length, '\0');
  std::size_t done = 0;
  while (done < raw.size()) {
    ssize_t r = ::pread(fd_.fd, raw.data() + done, raw.size() - done,
                        static_cast<off_t>(data_offsets_[i] + done));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw IoFailure(std::string("pread: ") + std::strerror(errno));
    }
    if (r == 0) {
      throw CorruptPayload("short payload read: " + entry.text());
    }
    done += static_cast<std::size_t>(r);
  }

  const auto* bytes = reinterpret_cast<const std::uint8_t*>(raw.data());
  DatasetValue value;
  switch (info.dtype) {
    case Dtype::u32: {
      std::vector<std::uint32_t> v(info.element_count);
      for (std::size_t k = 0; k < v.size(); ++k) {
        std::uint32_t x = 0;
        for (int b = 3; b >= 0; --b) x = (x << 8) | bytes[k * 4 + b];
        v[k] = x;
      }
      value = std::move(v);
      break;
    }
    case Dtype::u64: {
      std::vector<std::uint64_t> v(info.element_count);
      for (std::size_t k = 0; k < v.size(); ++k) {
        std::uint64_t x = 0;
        for (int b = 7; b >= 0; --b) x = (x << 8) | bytes[k * 8 + b];
        v[k] = x;
      }
      value = std::move(v);
      break;
    }
    case Dtype::f32: {
      std::vector<float> v(info.element_count);
      for (std::size_t k = 0; k < v.size(); ++k) {
        std::uint32_t x = 0;
        for (int b = 3; b >= 0; --b) x = (x << 8) | bytes[k * 4 + b];
        float f;
        std::memcpy(&f, &x, 4);
        v[k] = f;
      }
      value = std::move(v);
      break;
    }
    case Dtype::f64: {
      std::vector<double> v(info.element_count);
      for (std::size_t k = 0; k < v.size(); ++k) {
        std::uint64_t x = 0;
        for (int b = 7; b >= 0; --b) x = (x << 8) | bytes[k * 8 + b];
        double d;
        std::memcpy(&d, &x, 8);
        v[k] = d;
      }
      value = std::move(v);
      break;
    }
    case Dtype::utf8:
      value = std::move(raw);
      break;
  }
  state_->bytes_read.fetch_add(info.byte_length, std::memory_order_relaxed);
  return value;
}

CallCounters StoreHandle::counters() const {
  CallCounters c;
  c.list_children_calls = state_->list_children.load(std::memory_order_relaxed);
  c.read_attribute_calls = state_->read_attribute.load(std::memory_order_relaxed);
  c.dataset_info_calls = state_->dataset_info.load(std::memory_order_relaxed);
  c.read_dataset_calls = state_->read_dataset.load(std::memory_order_relaxed);
  c.bytes_read = state_->bytes_read.load(std::memory_order_relaxed);
  return c;
}

void StoreHandle::set_meta_latency(std::chrono::microseconds latency) {
  state_->latency_us.store(latency.count(), std::memory_order_relaxed);
}

std::chrono::microseconds StoreHandle::meta_latency() const {
  return std::chrono::microseconds(state_->latency_us.load(std::memory_order_relaxed));
}

const std::vector<EntryRecord>& StoreHandle::records() const {
  return records_;
}

FileModel read_model(StoreHandle& handle) {
  FileModel model;
  model.records = handle.records();
  for (const auto& rec : model.records) {
    if (rec.kind == EntryKind::dataset) {
      model.payloads.emplace(rec.path, handle.read_dataset(rec.path));
    }
  }
  return model;
}

}  // namespace nxb
