#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace erprop {

/// Position of a record in its Dataset (file order).
using RecordIndex = std::size_t;

struct Attribute {
  std::string name;
  std::string value;  // empty when missing

  bool operator==(const Attribute&) const = default;
};

struct Record {
  std::string id;
  std::vector<Attribute> attributes;

  bool operator==(const Record&) const = default;
};

enum class RecordFormat { kCsv, kJsonl };

/// Ordered, validated collection of records. Read-only once built.
class Dataset {
 public:
  Dataset() = default;
  /// Throws ValidationError on empty input, empty or duplicate ids, or
  /// duplicate attribute names within a record.
  explicit Dataset(std::vector<Record> records);

  std::size_t size() const { return records_.size(); }
  const Record& operator[](RecordIndex i) const { return records_[i]; }
  const std::vector<Record>& records() const { return records_; }

  /// Index of the record with the given id, or size() if absent.
  RecordIndex find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != size(); }

  bool operator==(const Dataset& other) const { return records_ == other.records_; }

 private:
  std::vector<Record> records_;
  std::unordered_map<std::string, RecordIndex> index_;
};

/// record-id -> entity-id; a partition of (a subset of) the records.
class GroundTruth {
 public:
  GroundTruth() = default;
  /// Throws ValidationError if a record id appears twice.
  explicit GroundTruth(std::vector<std::pair<std::string, std::string>> assignment);

  std::size_t size() const { return assignment_.size(); }
  std::size_t entity_count() const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return assignment_; }

  /// Entity of a record id, or nullptr when unassigned.
  const std::string* entity_of(std::string_view record_id) const;

  /// Throws ValidationError naming the first record id unknown to `d`.
  void validate_against(const Dataset& d) const;

  /// Dense entity index per dataset record, in dataset order. Throws
  /// ValidationError if any record is missing from the assignment.
  std::vector<std::size_t> entity_indices(const Dataset& d) const;

 private:
  std::vector<std::pair<std::string, std::string>> assignment_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

struct DatasetStats {
  std::size_t n = 0;
  std::size_t entities = 0;
  std::size_t matches = 0;  // unordered intra-entity pairs
  double dispersion = 0.0;  // n / entities
};

Dataset load_records(const std::filesystem::path& path, RecordFormat format);
Dataset parse_records_csv(std::istream& in);
Dataset parse_records_jsonl(std::istream& in);
void write_records_csv(std::ostream& out, const Dataset& d);
void write_records_jsonl(std::ostream& out, const Dataset& d);

/// Guesses the format from the extension (.jsonl/.json -> JSONL, else CSV).
RecordFormat format_from_path(const std::filesystem::path& path);

GroundTruth load_ground_truth(const std::filesystem::path& path);
GroundTruth parse_ground_truth_csv(std::istream& in);
void write_ground_truth_csv(std::ostream& out, const GroundTruth& gt);

DatasetStats dataset_stats(const Dataset& d, const GroundTruth& gt);

}  // namespace erprop
