#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erprop/embed.hpp"
#include "erprop/graph.hpp"
#include "erprop/labels.hpp"
#include "erprop/pricing.hpp"
#include "erprop/records.hpp"
#include "erprop/rng.hpp"

namespace erprop {

struct Candidate {
  RecordIndex record = 0;
  Label label = 0;

  bool operator==(const Candidate&) const = default;
};

/// One multiple-choice question: which candidate (if any) is the target?
struct OracleQuery {
  RecordIndex target = 0;
  std::vector<Candidate> candidates;  // distinct labels, target excluded
  std::string prompt;
};

struct OracleAnswer {
  std::optional<std::size_t> choice;  // 1-based candidate index; nullopt = NONE
  std::size_t tokens_in = 0;
  std::size_t tokens_out = 0;
  double cost = 0.0;
  std::string response;
  /// Set when no attempt produced a parsable reply. Tokens are still counted.
  bool unparsable = false;
};

/// Representatives of the top-m labels of `pi`: for each label, the member
/// closest to the target by cosine (ties: smaller index), never the target
/// itself. Labels whose cluster holds only the target are skipped. Returns
/// nullopt when nothing is left to ask about. The prompt is not rendered.
std::optional<OracleQuery> select_candidates(const LabelDistribution& pi, const ClusterIndex& clusters,
                                             std::span<const Embedding> embeddings,
                                             RecordIndex target, std::size_t m);

std::string render_prompt(const Record& target, std::span<const Record> candidates);
std::string render_prompt(const OracleQuery& q, const Dataset& d);

/// Strict reply parser: trimmed bare integer in [1, candidate_count] or
/// case-insensitive "none". Throws ResponseParseError otherwise.
std::optional<std::size_t> parse_response(std::string_view text, std::size_t candidate_count);

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual OracleAnswer ask(const OracleQuery& q) = 0;
};

/// Answers from the ground truth: the first candidate sharing the target's
/// entity, or NONE.
class TrueOracle : public Oracle {
 public:
  TrueOracle(std::vector<std::size_t> entity, Pricing pricing, TokenEstimator tokens = {});
  OracleAnswer ask(const OracleQuery& q) override;

 protected:
  std::optional<std::size_t> truth(const OracleQuery& q) const;
  OracleAnswer priced(const OracleQuery& q, std::optional<std::size_t> choice) const;

 private:
  std::vector<std::size_t> entity_;
  Pricing pricing_;
  TokenEstimator tokens_;
};

/// True oracle whose answer is replaced, with probability epsilon, by a
/// uniformly drawn wrong alternative (another index or NONE).
class NoisyOracle : public TrueOracle {
 public:
  NoisyOracle(std::vector<std::size_t> entity, double epsilon, std::uint64_t seed, Pricing pricing,
              TokenEstimator tokens = {});
  OracleAnswer ask(const OracleQuery& q) override;

 private:
  double epsilon_;
  std::uint64_t seed_;
};

struct HttpLlmConfig {
  std::string endpoint;  // full URL of a chat-completions route
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_seconds = 60.0;
  std::size_t retries = 2;
  std::chrono::milliseconds backoff{500};
  std::size_t reasks_on_parse_failure = 1;
};

/// Chat-completions client. Usage counts come from the provider's usage
/// block when present, otherwise from the token estimator.
class HttpLlmOracle : public Oracle {
 public:
  HttpLlmOracle(HttpLlmConfig config, Pricing pricing, TokenEstimator tokens = {});
  OracleAnswer ask(const OracleQuery& q) override;

 private:
  HttpLlmConfig config_;
  Pricing pricing_;
  TokenEstimator tokens_;
};

enum class OracleKind { kTrue, kNoisy, kHttpLlm };

struct OracleConfig {
  OracleKind kind = OracleKind::kTrue;
  double epsilon = 0.0;
  HttpLlmConfig http;

  void validate() const;
};

/// `entity` (per-record true entity) is required for the true and noisy
/// kinds; throws ValidationError when missing.
std::unique_ptr<Oracle> make_oracle(const OracleConfig& config,
                                    const std::vector<std::size_t>* entity, std::uint64_t seed,
                                    Pricing pricing, TokenEstimator tokens = {});

struct LocalUpdate {
  bool label_changed = false;
  std::size_t edges_linked = 0;  // target-member pairs set to sigma_llm
  std::size_t edges_removed = 0;  // directed edges actually removed
};

/// Applies an oracle answer. A match moves the target into the chosen
/// record's cluster and links it to every member at sigma_llm in both
/// directions; NONE removes edges between the target and every candidate.
LocalUpdate apply_local_update(EntityGraph& g, LabelState& ls, ClusterIndex& ci,
                               const OracleQuery& q, const OracleAnswer& a, double sigma_llm);

struct LabeledQuery {
  OracleQuery query;
  std::optional<std::size_t> expected;
};

/// Share of sample queries the oracle answers correctly. Throws
/// ValidationError on an empty sample.
double calibrate_delta_llm(std::span<const LabeledQuery> sample, Oracle& oracle);

}  // namespace erprop
