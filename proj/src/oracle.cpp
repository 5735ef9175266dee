#include "erprop/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <thread>

#include "erprop/error.hpp"
#include "http_util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace erprop {

namespace {

constexpr std::string_view kInstruction =
    "You are an entity resolution expert. Determine if the following entity matches any of the "
    "candidate entities.\n"
    "\n"
    "Requirements:\n"
    "1. Please respond with ONLY the number (1, 2, ...) of the matching candidate, or \"NONE\" if "
    "no match is found.\n"
    "2. Your response should be a single number or \"NONE\", nothing else.\n";

std::string_view trim(std::string_view s) {
  auto space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

std::string answer_text(std::optional<std::size_t> choice) {
  return choice ? std::to_string(*choice) : std::string("NONE");
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

std::optional<OracleQuery> select_candidates(const LabelDistribution& pi, const ClusterIndex& clusters,
                                             std::span<const Embedding> embeddings,
                                             RecordIndex target, std::size_t m) {
  if (pi.empty() || m == 0) return std::nullopt;
  OracleQuery q;
  q.target = target;
  for (Label label : pi.top(m)) {
    std::optional<RecordIndex> best;
    double best_cos = 0.0;
    for (RecordIndex r : clusters.members(label)) {
      if (r == target) continue;
      const double c = cosine(embeddings[target], embeddings[r]);
      if (!best || c > best_cos) {
        best = r;
        best_cos = c;
      }
    }
    if (best) q.candidates.push_back({*best, label});
  }
  if (q.candidates.empty()) return std::nullopt;
  return q;
}

std::string render_prompt(const Record& target, std::span<const Record> candidates) {
  std::string out(kInstruction);
  out += "\nQuery Entity:\n";
  out += serialize_record(target);
  out += "\n\nCandidate Entities:";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out += '\n';
    out += std::to_string(i + 1);
    out += ". ";
    out += serialize_record(candidates[i]);
  }
  return out;
}

std::string render_prompt(const OracleQuery& q, const Dataset& d) {
  std::vector<Record> candidates;
  candidates.reserve(q.candidates.size());
  for (const auto& c : q.candidates) candidates.push_back(d[c.record]);
  return render_prompt(d[q.target], candidates);
}

std::optional<std::size_t> parse_response(std::string_view text, std::size_t candidate_count) {
  const auto t = trim(text);
  if (t.size() == 4 && std::equal(t.begin(), t.end(), "none", [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == b;
      })) {
    return std::nullopt;
  }
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ResponseParseError("reply is neither a number nor NONE: '" + std::string(t) + "'");
  }
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || value < 1 || value > candidate_count) {
    throw ResponseParseError("reply " + std::string(t) + " is not a candidate index in [1, " +
                             std::to_string(candidate_count) + "]");
  }
  return value;
}

TrueOracle::TrueOracle(std::vector<std::size_t> entity, Pricing pricing, TokenEstimator tokens)
    : entity_(std::move(entity)), pricing_(pricing), tokens_(tokens) {}

std::optional<std::size_t> TrueOracle::truth(const OracleQuery& q) const {
  for (std::size_t i = 0; i < q.candidates.size(); ++i) {
    if (entity_.at(q.candidates[i].record) == entity_.at(q.target)) return i + 1;
  }
  return std::nullopt;
}

OracleAnswer TrueOracle::priced(const OracleQuery& q, std::optional<std::size_t> choice) const {
  OracleAnswer a;
  a.choice = choice;
  a.response = answer_text(choice);
  a.tokens_in = tokens_.count(q.prompt);
  a.tokens_out = tokens_.count(a.response);
  a.cost = pricing_.cost(a.tokens_in, a.tokens_out);
  return a;
}

OracleAnswer TrueOracle::ask(const OracleQuery& q) { return priced(q, truth(q)); }

NoisyOracle::NoisyOracle(std::vector<std::size_t> entity, double epsilon, std::uint64_t seed,
                         Pricing pricing, TokenEstimator tokens)
    : TrueOracle(std::move(entity), pricing, tokens), epsilon_(epsilon), seed_(derive_seed(seed, "noisy-oracle")) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0, 1)");
}

OracleAnswer NoisyOracle::ask(const OracleQuery& q) {
  auto choice = truth(q);
  // The draw depends only on the question, so re-asking it repeats the answer.
  std::uint64_t key = seed_ ^ (q.target * 0x9e3779b97f4a7c15ULL);
  for (const auto& c : q.candidates) key = derive_seed(key, std::to_string(c.record));
  Rng rng(key);
  if (rng.bernoulli(epsilon_)) {
    // Alternatives: every index plus NONE, minus the correct answer.
    std::vector<std::optional<std::size_t>> wrong;
    for (std::size_t i = 1; i <= q.candidates.size(); ++i) {
      if (choice != i) wrong.emplace_back(i);
    }
    if (choice) wrong.emplace_back(std::nullopt);
    if (!wrong.empty()) choice = wrong[rng.index(wrong.size())];
  }
  return priced(q, choice);
}

HttpLlmOracle::HttpLlmOracle(HttpLlmConfig config, Pricing pricing, TokenEstimator tokens)
    : config_(std::move(config)), pricing_(pricing), tokens_(tokens) {
  if (config_.endpoint.empty()) throw ValidationError("llm oracle needs an endpoint");
  detail::split_url(config_.endpoint);
}

OracleAnswer HttpLlmOracle::ask(const OracleQuery& q) {
  const auto url = detail::split_url(config_.endpoint);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (auto key = detail::env_or_empty(config_.api_key_env); !key.empty()) {
    headers.emplace("Authorization", "Bearer " + key);
  }
  const nlohmann::json request{
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", q.prompt}}})}};
  const std::string body = request.dump();

  OracleAnswer answer;
  for (std::size_t ask = 0; ask <= config_.reasks_on_parse_failure; ++ask) {
    std::string reply;
    bool delivered = false;
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.retries && !delivered; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
      auto res = client.Post(url.path, headers, body, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP " + std::to_string(res->status);
        if (!retryable_status(res->status)) break;
        continue;
      }
      try {
        const auto doc = nlohmann::json::parse(res->body);
        reply = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        std::size_t in = tokens_.count(q.prompt);
        std::size_t out = tokens_.count(reply);
        if (doc.contains("usage") && doc["usage"].is_object()) {
          const auto& usage = doc["usage"];
          if (usage.contains("prompt_tokens")) in = usage["prompt_tokens"].get<std::size_t>();
          if (usage.contains("completion_tokens")) out = usage["completion_tokens"].get<std::size_t>();
        }
        answer.tokens_in += in;
        answer.tokens_out += out;
        delivered = true;
      } catch (const nlohmann::json::exception& e) {
        last_error = std::string("malformed completion: ") + e.what();
      }
    }
    if (!delivered) {
      throw OracleTransportError("llm request failed after " + std::to_string(config_.retries + 1) +
                                 " attempts: " + last_error);
    }

    answer.response = reply;
    answer.cost = pricing_.cost(answer.tokens_in, answer.tokens_out);
    try {
      answer.choice = parse_response(reply, q.candidates.size());
      answer.unparsable = false;
      return answer;
    } catch (const ResponseParseError&) {
      answer.unparsable = true;
    }
  }
  answer.choice.reset();
  return answer;
}

void OracleConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0, 1)");
  if (kind == OracleKind::kHttpLlm && http.endpoint.empty()) {
    throw ValidationError("llm oracle needs an endpoint");
  }
}

std::unique_ptr<Oracle> make_oracle(const OracleConfig& config,
                                    const std::vector<std::size_t>* entity, std::uint64_t seed,
                                    Pricing pricing, TokenEstimator tokens) {
  config.validate();
  switch (config.kind) {
    case OracleKind::kTrue:
      if (!entity) throw ValidationError("the true oracle needs ground truth");
      return std::make_unique<TrueOracle>(*entity, pricing, tokens);
    case OracleKind::kNoisy:
      if (!entity) throw ValidationError("the noisy oracle needs ground truth");
      return std::make_unique<NoisyOracle>(*entity, config.epsilon, seed, pricing, tokens);
    case OracleKind::kHttpLlm:
      return std::make_unique<HttpLlmOracle>(config.http, pricing, tokens);
  }
  throw ValidationError("unknown oracle kind");
}

LocalUpdate apply_local_update(EntityGraph& g, LabelState& ls, ClusterIndex& ci,
                               const OracleQuery& q, const OracleAnswer& a, double sigma_llm) {
  LocalUpdate u;
  if (a.choice) {
    if (*a.choice < 1 || *a.choice > q.candidates.size()) {
      throw ValidationError("answer index " + std::to_string(*a.choice) + " out of range");
    }
    const Label label = ls[q.candidates[*a.choice - 1].record];
    u.label_changed = ls[q.target] != label;
    ci.move(ls, q.target, label);
    std::vector<RecordIndex> members;
    for (RecordIndex r : ci.members(label)) {
      if (r != q.target) members.push_back(r);
    }
    expand_neighborhood(g, q.target, members, sigma_llm);
    u.edges_linked = members.size();
    return u;
  }

  std::vector<RecordIndex> others;
  std::size_t before = g.neighbors(q.target).size();
  for (const auto& c : q.candidates) {
    others.push_back(c.record);
    before += g.neighbors(c.record).size();
  }
  remove_edges(g, q.target, others);
  std::size_t after = g.neighbors(q.target).size();
  for (RecordIndex r : others) after += g.neighbors(r).size();
  u.edges_removed = before - after;
  return u;
}

double calibrate_delta_llm(std::span<const LabeledQuery> sample, Oracle& oracle) {
  if (sample.empty()) throw ValidationError("calibration sample is empty");
  std::size_t correct = 0;
  for (const auto& item : sample) {
    if (oracle.ask(item.query).choice == item.expected) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(sample.size());
}

}  // namespace erprop
