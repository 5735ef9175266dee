#include "erprop/planted.hpp"

#include <array>
#include <cstdio>
#include <numeric>
#include <set>
#include <string_view>

#include "erprop/error.hpp"
#include "erprop/rng.hpp"

namespace erprop {

namespace {

constexpr std::array<std::string_view, 40> kFirst = {
    "james",   "mary",    "robert", "patricia", "john",    "jennifer", "michael", "linda",
    "william", "barbara", "david",  "susan",    "richard", "jessica",  "joseph",  "sarah",
    "thomas",  "karen",   "charles", "nancy",   "daniel",  "lisa",     "matthew", "margaret",
    "anthony", "betty",   "mark",   "sandra",   "donald",  "ashley",   "steven",  "dorothy",
    "paul",    "kimberly", "andrew", "emily",   "joshua",  "donna",    "kenneth", "michelle"};

constexpr std::array<std::string_view, 40> kLast = {
    "smith",    "johnson",  "williams", "brown",    "jones",    "garcia",  "miller",  "davis",
    "rodriguez", "martinez", "hernandez", "lopez",   "gonzalez", "wilson",  "anderson", "thomas",
    "taylor",   "moore",    "jackson",  "martin",   "lee",      "perez",   "thompson", "white",
    "harris",   "sanchez",  "clark",    "ramirez",  "lewis",    "robinson", "walker",  "young",
    "allen",    "king",     "wright",   "scott",    "torres",   "nguyen",  "hill",    "flores"};

constexpr std::array<std::string_view, 24> kStreet = {
    "oak",     "maple",    "cedar",   "pine",     "elm",     "washington", "lake",   "hill",
    "park",    "main",     "church",  "highland", "sunset",  "riverside",  "meadow", "forest",
    "spring",  "valley",   "jackson", "lincoln",  "franklin", "madison",   "ridge",  "willow"};

constexpr std::array<std::string_view, 6> kStreetType = {"st", "ave", "rd", "blvd", "ln", "dr"};

constexpr std::array<std::string_view, 24> kCity = {
    "springfield", "riverton",  "fairview",   "georgetown", "salem",      "madison",
    "clinton",     "franklin",  "greenville", "bristol",    "dover",      "ashland",
    "burlington",  "manchester", "oxford",    "milton",     "newport",    "arlington",
    "chester",     "hudson",    "kingston",   "lexington",  "marion",     "winchester"};

constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& pool) {
  return pool[rng.index(N)];
}

std::string digits(Rng& rng, std::size_t count) {
  std::string s;
  for (std::size_t i = 0; i < count; ++i) s.push_back(static_cast<char>('0' + rng.index(10)));
  return s;
}

std::string padded(std::string_view prefix, std::size_t value, std::size_t width) {
  std::string num = std::to_string(value);
  if (num.size() < width) num.insert(0, width - num.size(), '0');
  return std::string(prefix) + num;
}

std::string corrupt(std::string_view clean, double rate, Rng& rng, std::size_t& edits) {
  std::string out;
  out.reserve(clean.size());
  for (char c : clean) {
    if (!rng.bernoulli(rate)) {
      out.push_back(c);
      continue;
    }
    ++edits;
    if (rng.bernoulli(0.5)) continue;  // deletion
    char sub;
    do {
      sub = kAlphabet[rng.index(kAlphabet.size())];
    } while (sub == c);
    out.push_back(sub);
  }
  return out;
}

}  // namespace

void PlantedSpec::validate() const {
  if (entities < 1) throw ValidationError("need at least one entity");
  if (sizes.empty()) throw ValidationError("need at least one entity size");
  for (std::size_t s : sizes) {
    if (s < 1) throw ValidationError("entity sizes must be positive");
  }
  if (!(corruption >= 0.0 && corruption < 1.0)) {
    throw ValidationError("corruption rate must lie in [0, 1)");
  }
}

PlantedData generate_planted(const PlantedSpec& spec) {
  spec.validate();
  Rng base_rng(spec.seed, "planted-bases");
  Rng noise_rng(spec.seed, "planted-corruption");
  Rng order_rng(spec.seed, "planted-order");

  PlantedData out;
  std::set<std::string> seen;
  for (std::size_t e = 0; e < spec.entities; ++e) {
    Record base;
    std::string name;
    do {
      name = std::string(pick(base_rng, kFirst)) + " " + std::string(pick(base_rng, kLast));
      base.attributes = {
          {"name", name},
          {"address", std::to_string(1 + base_rng.index(9999)) + " " +
                          std::string(pick(base_rng, kStreet)) + " " +
                          std::string(pick(base_rng, kStreetType))},
          {"city", std::string(pick(base_rng, kCity))},
          {"phone", digits(base_rng, 3) + "-" + digits(base_rng, 3) + "-" + digits(base_rng, 4)}};
    } while (!seen.insert(base.attributes[0].value + "|" + base.attributes[1].value).second);
    base.id = padded("e", e + 1, 4);
    out.bases.push_back(std::move(base));
  }

  struct Draft {
    Record record;
    std::size_t entity;
    std::size_t edits;
  };
  std::vector<Draft> drafts;
  for (std::size_t e = 0; e < spec.entities; ++e) {
    const std::size_t copies = spec.sizes[e % spec.sizes.size()];
    for (std::size_t c = 0; c < copies; ++c) {
      Draft d{{}, e, 0};
      for (const auto& a : out.bases[e].attributes) {
        d.record.attributes.push_back({a.name, corrupt(a.value, spec.corruption, noise_rng, d.edits)});
      }
      drafts.push_back(std::move(d));
    }
  }
  order_rng.shuffle(drafts);

  const std::size_t width = std::max<std::size_t>(4, std::to_string(drafts.size()).size());
  std::vector<Record> records;
  std::vector<std::pair<std::string, std::string>> truth;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    drafts[i].record.id = padded("r", i + 1, width);
    truth.emplace_back(drafts[i].record.id, out.bases[drafts[i].entity].id);
    out.entity_of.push_back(drafts[i].entity);
    out.edits.push_back(drafts[i].edits);
    records.push_back(std::move(drafts[i].record));
  }
  out.records = Dataset(std::move(records));
  out.truth = GroundTruth(std::move(truth));
  return out;
}

}  // namespace erprop
