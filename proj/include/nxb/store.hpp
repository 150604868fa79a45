#pragma once

// Single-file "NXB" container standing in for NeXus-on-HDF5, plus the
// instrumented read interface whose call counters make metadata traffic
// measurable.
//
// NXB format, version 1, all multi-byte integers little-endian:
//   bytes 0-3  magic "NXB1"
//   byte  4    format version 0x01
//   bytes 5-12 record_count (u64)
//   records    kind u8 (0=group, 1=dataset); path_len u16 + UTF-8 path;
//              attr_count u16, then per attribute key_len u16 + bytes and
//              value_len u16 + bytes; datasets additionally dtype u8
//              (0=u32, 1=u64, 2=f32, 3=f64, 4=utf8), element_count u64,
//              data_offset u64 (absolute), byte_length u64
//   data       contiguous little-endian payload arrays at the recorded
//              offsets, after the last record

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nxb/schema.hpp"

namespace nxb {

// Typed dataset payload. utf8 datasets are a byte string with one element
// per byte.
using DatasetValue = std::variant<std::vector<std::uint32_t>,
                                  std::vector<std::uint64_t>,
                                  std::vector<float>,
                                  std::vector<double>,
                                  std::string>;

Dtype dtype_of(const DatasetValue& value);
std::uint64_t element_count_of(const DatasetValue& value);
std::uint64_t byte_length_of(const DatasetValue& value);

// In-memory representation of a whole file: records with every parent group
// preceding all of its descendants, plus one payload per dataset record.
struct FileModel {
  std::vector<EntryRecord> records;
  std::map<NxPath, DatasetValue> payloads;

  friend bool operator==(const FileModel&, const FileModel&) = default;
};

// Throws InvalidModel when a FileModel invariant does not hold: duplicate
// paths, a non-root record whose parent is missing, out of order or not a
// group, dataset info inconsistent with the payload, a group tagged with
// the reserved "SDS" class, or a first record that is not the root group.
void validate_model(const FileModel& model);

// Number of non-root records.
std::size_t entry_count(const FileModel& model);

// Incremental FileModel construction; parents must be added before
// children, which keeps the record-order invariant by construction.
class ModelBuilder {
public:
  ModelBuilder();

  ModelBuilder& group(const NxPath& path, const NxClass& cls);
  ModelBuilder& group(const NxPath& path);  // no NX_class attribute
  ModelBuilder& attribute(const NxPath& path, std::string key, std::string value);
  ModelBuilder& dataset(const NxPath& path, DatasetValue value);

  FileModel build();  // validates before returning

private:
  FileModel model_;
};

struct CallCounters {
  std::uint64_t list_children_calls = 0;
  std::uint64_t read_attribute_calls = 0;
  std::uint64_t dataset_info_calls = 0;
  std::uint64_t read_dataset_calls = 0;
  std::uint64_t bytes_read = 0;

  friend bool operator==(const CallCounters&, const CallCounters&) = default;
};

struct ChildEntry {
  std::string name;
  EntryKind kind;

  friend bool operator==(const ChildEntry&, const ChildEntry&) = default;
};

// Opened NXB file. Record headers are fully resident after open; dataset
// payloads are read lazily on demand. After open the handle supports
// concurrent readers; counters update atomically.
class StoreHandle {
public:
  StoreHandle(StoreHandle&&) noexcept = default;
  StoreHandle& operator=(StoreHandle&&) noexcept = default;
  StoreHandle(const StoreHandle&) = delete;
  StoreHandle& operator=(const StoreHandle&) = delete;
  ~StoreHandle() = default;

  // Immediate children of a group in byte-lexicographic name order. The
  // table is resident after open; the returned reference stays valid for
  // the handle's lifetime.
  // Metadata call: increments list_children_calls and burns meta_latency.
  const std::vector<ChildEntry>& list_children(const NxPath& group) const;

  // Metadata call: increments read_attribute_calls.
  std::string read_attribute(const NxPath& entry, std::string_view key) const;

  // Metadata call: increments dataset_info_calls.
  DatasetInfo dataset_info(const NxPath& entry) const;

  // Payload call: decodes the full payload; increments read_dataset_calls
  // and adds the payload's byte_length to bytes_read. No meta_latency.
  DatasetValue read_dataset(const NxPath& entry) const;

  // Snapshot copy; does not itself increment anything.
  CallCounters counters() const;

  // Latency injected per metadata call (busy-wait, so small values are
  // honored exactly rather than rounded up to the kernel timer slack).
  void set_meta_latency(std::chrono::microseconds latency);
  std::chrono::microseconds meta_latency() const;

  // Resident metadata table in file order. Not part of the counted
  // interface; traversal emulation must go through the calls above.
  const std::vector<EntryRecord>& records() const;

  const std::filesystem::path& source() const { return source_; }

private:
  friend StoreHandle open_store(const std::filesystem::path& source);
  StoreHandle() = default;

  struct State {
    std::atomic<std::uint64_t> list_children{0};
    std::atomic<std::uint64_t> read_attribute{0};
    std::atomic<std::uint64_t> dataset_info{0};
    std::atomic<std::uint64_t> read_dataset{0};
    std::atomic<std::uint64_t> bytes_read{0};
    std::atomic<std::int64_t> latency_us{0};
  };

  struct FdOwner {
    int fd = -1;
    FdOwner() = default;
    explicit FdOwner(int f) : fd(f) {}
    FdOwner(FdOwner&& other) noexcept : fd(other.fd) { other.fd = -1; }
    FdOwner& operator=(FdOwner&& other) noexcept;
    FdOwner(const FdOwner&) = delete;
    FdOwner& operator=(const FdOwner&) = delete;
    ~FdOwner();
  };

  std::size_t find(const NxPath& path) const;  // throws NoSuchPath
  void meta_delay() const;

  std::filesystem::path source_;
  FdOwner fd_;
  std::vector<EntryRecord> records_;
  std::vector<std::uint64_t> data_offsets_;          // per record; 0 for groups
  std::map<NxPath, std::size_t> by_path_;
  std::vector<std::vector<ChildEntry>> children_;    // per record, name-sorted
  std::unique_ptr<State> state_;
};

// Emits the NXB byte layout. Byte-deterministic: two writes of the same
// model produce identical files. Throws InvalidModel or IoFailure.
void write_store(const FileModel& model, const std::filesystem::path& destination);

// Parses and validates all record headers; reads zero payload bytes.
// Throws IoFailure, BadMagic, TruncatedRecord, DuplicatePath, OrphanRecord.
StoreHandle open_store(const std::filesystem::path& source);

// Reconstructs the full FileModel through the counted interface (one
// read_dataset per dataset record).
FileModel read_model(StoreHandle& handle);

}  // namespace nxb
