#include "erprop/records.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "erprop/csv.hpp"
#include "erprop/error.hpp"
#include "json.hpp"

namespace erprop {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

bool blank_row(const std::vector<std::string>& row) {
  return row.size() == 1 && row.front().empty();
}

std::string json_value_text(const nlohmann::ordered_json& v) {
  if (v.is_null()) return {};
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

Dataset::Dataset(std::vector<Record> records) : records_(std::move(records)) {
  if (records_.empty()) throw ValidationError("dataset has no records");
  index_.reserve(records_.size());
  for (RecordIndex i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    if (r.id.empty()) throw ValidationError("record " + std::to_string(i + 1) + " has an empty id");
    if (!index_.emplace(r.id, i).second) throw ValidationError("duplicate record id '" + r.id + "'");
    std::set<std::string_view> names;
    for (const auto& a : r.attributes) {
      if (!names.insert(a.name).second) {
        throw ValidationError("record '" + r.id + "' repeats attribute '" + a.name + "'");
      }
    }
  }
}

RecordIndex Dataset::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? size() : it->second;
}

GroundTruth::GroundTruth(std::vector<std::pair<std::string, std::string>> assignment)
    : assignment_(std::move(assignment)) {
  lookup_.reserve(assignment_.size());
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (!lookup_.emplace(assignment_[i].first, i).second) {
      throw ValidationError("record '" + assignment_[i].first + "' listed twice in ground truth");
    }
  }
}

std::size_t GroundTruth::entity_count() const {
  std::set<std::string_view> entities;
  for (const auto& [record, entity] : assignment_) entities.insert(entity);
  return entities.size();
}

const std::string* GroundTruth::entity_of(std::string_view record_id) const {
  auto it = lookup_.find(std::string(record_id));
  return it == lookup_.end() ? nullptr : &assignment_[it->second].second;
}

void GroundTruth::validate_against(const Dataset& d) const {
  for (const auto& [record, entity] : assignment_) {
    if (!d.contains(record)) throw ValidationError("ground truth names unknown record '" + record + "'");
  }
}

std::vector<std::size_t> GroundTruth::entity_indices(const Dataset& d) const {
  validate_against(d);
  std::unordered_map<std::string_view, std::size_t> dense;
  std::vector<std::size_t> out(d.size());
  for (RecordIndex i = 0; i < d.size(); ++i) {
    const std::string* e = entity_of(d[i].id);
    if (!e) throw ValidationError("ground truth does not cover record '" + d[i].id + "'");
    out[i] = dense.emplace(*e, dense.size()).first->second;
  }
  return out;
}

Dataset parse_records_csv(std::istream& in) {
  std::size_t line = 1;
  auto header = csv::read_row(in, line);
  if (!header || blank_row(*header)) throw ParseError("empty records file");
  if ((*header)[0] != "id") throw ParseError("first CSV column must be 'id'");

  std::vector<Record> records;
  while (true) {
    const std::size_t row_line = line;
    auto row = csv::read_row(in, line);
    if (!row) break;
    if (blank_row(*row)) continue;
    if (row->size() != header->size()) {
      throw ParseError("line " + std::to_string(row_line) + ": expected " +
                       std::to_string(header->size()) + " fields, found " +
                       std::to_string(row->size()));
    }
    Record r{(*row)[0], {}};
    r.attributes.reserve(row->size() - 1);
    for (std::size_t c = 1; c < row->size(); ++c) {
      r.attributes.push_back({(*header)[c], std::move((*row)[c])});
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ParseError("records file has a header but no rows");
  try {
    return Dataset(std::move(records));
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

Dataset parse_records_jsonl(std::istream& in) {
  std::vector<Record> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::ordered_json obj;
    try {
      obj = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id")) {
      throw ParseError("line " + std::to_string(line) + ": expected an object with an 'id' field");
    }
    Record r{json_value_text(obj["id"]), {}};
    for (const auto& [key, value] : obj.items()) {
      if (key == "id") continue;
      if (value.is_object() || value.is_array()) {
        throw ParseError("line " + std::to_string(line) + ": attribute '" + key + "' is not a scalar");
      }
      r.attributes.push_back({key, json_value_text(value)});
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ParseError("empty records file");
  try {
    return Dataset(std::move(records));
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

RecordFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") ? RecordFormat::kJsonl
                                                                 : RecordFormat::kCsv;
}

Dataset load_records(const std::filesystem::path& path, RecordFormat format) {
  auto in = open_input(path);
  return format == RecordFormat::kCsv ? parse_records_csv(in) : parse_records_jsonl(in);
}

void write_records_csv(std::ostream& out, const Dataset& d) {
  std::vector<std::string> header{"id"};
  for (const auto& a : d[0].attributes) header.push_back(a.name);
  csv::write_row(out, header);
  for (const auto& r : d.records()) {
    if (r.attributes.size() + 1 != header.size()) {
      throw ValidationError("record '" + r.id + "' does not fit the CSV header");
    }
    std::vector<std::string> row{r.id};
    for (std::size_t c = 0; c < r.attributes.size(); ++c) {
      if (r.attributes[c].name != header[c + 1]) {
        throw ValidationError("record '" + r.id + "' does not fit the CSV header");
      }
      row.push_back(r.attributes[c].value);
    }
    csv::write_row(out, row);
  }
}

void write_records_jsonl(std::ostream& out, const Dataset& d) {
  for (const auto& r : d.records()) {
    nlohmann::ordered_json obj;
    obj["id"] = r.id;
    for (const auto& a : r.attributes) obj[a.name] = a.value;
    out << obj.dump() << '\n';
  }
}

GroundTruth parse_ground_truth_csv(std::istream& in) {
  std::size_t line = 1;
  auto header = csv::read_row(in, line);
  if (!header || blank_row(*header)) throw ParseError("empty ground-truth file");
  if (header->size() != 2) throw ParseError("ground truth must have two columns");

  std::vector<std::pair<std::string, std::string>> assignment;
  while (true) {
    const std::size_t row_line = line;
    auto row = csv::read_row(in, line);
    if (!row) break;
    if (blank_row(*row)) continue;
    if (row->size() != 2 || (*row)[0].empty() || (*row)[1].empty()) {
      throw ParseError("line " + std::to_string(row_line) + ": expected record_id,entity_id");
    }
    assignment.emplace_back(std::move((*row)[0]), std::move((*row)[1]));
  }
  return GroundTruth(std::move(assignment));
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_ground_truth_csv(in);
}

void write_ground_truth_csv(std::ostream& out, const GroundTruth& gt) {
  csv::write_row(out, {"record_id", "entity_id"});
  for (const auto& [record, entity] : gt.entries()) csv::write_row(out, {record, entity});
}

DatasetStats dataset_stats(const Dataset& d, const GroundTruth& gt) {
  const auto entity = gt.entity_indices(d);
  std::vector<std::size_t> sizes;
  for (std::size_t e : entity) {
    if (e >= sizes.size()) sizes.resize(e + 1, 0);
    ++sizes[e];
  }
  DatasetStats s;
  s.n = d.size();
  s.entities = sizes.size();
  for (std::size_t c : sizes) s.matches += c * (c - 1) / 2;
  s.dispersion = static_cast<double>(s.n) / static_cast<double>(s.entities);
  return s;
}

}  // namespace erprop
