#pragma once

#include <cstdint>
#include <vector>

#include "erprop/records.hpp"

namespace erprop {

struct PlantedSpec {
  std::size_t entities = 60;
  /// Records per entity, cycled over entities (a single value applies to all).
  std::vector<std::size_t> sizes{5};
  double corruption = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlantedData {
  Dataset records;
  GroundTruth truth;
  /// Clean attribute values per entity, in entity order.
  std::vector<Record> bases;
  /// Entity position (into `bases`) of each record.
  std::vector<std::size_t> entity_of;
  /// Corruption operations applied to each record.
  std::vector<std::size_t> edits;
};

/// Synthetic people-style records: each entity gets clean attribute values,
/// and each of its records is a copy where every character is, with the
/// corruption probability, substituted or deleted. Records are shuffled.
PlantedData generate_planted(const PlantedSpec& spec);

}  // namespace erprop
