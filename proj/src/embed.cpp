#include "erprop/embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "erprop/error.hpp"
#include "http_util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace erprop {

namespace {

std::uint64_t hash_gram(std::string_view gram, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : gram) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // Final avalanche so that nearby grams spread over all buckets.
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

Embedding normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  Embedding e;
  if (norm == 0.0) {
    e.values.assign(v.size(), 0.0);
    e.zero = true;
    return e;
  }
  for (double& x : v) x /= norm;
  e.values = std::move(v);
  return e;
}

std::vector<Embedding> fetch_http_embeddings(const std::vector<std::string>& texts,
                                             const EmbedderConfig& cfg) {
  const auto url = detail::split_url(cfg.endpoint);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(cfg.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  httplib::Headers headers;
  if (auto key = detail::env_or_empty(cfg.api_key_env); !key.empty()) {
    headers.emplace("Authorization", "Bearer " + key);
  }

  std::vector<Embedding> out;
  out.reserve(texts.size());
  const std::size_t batch = std::max<std::size_t>(cfg.batch_size, 1);
  for (std::size_t start = 0; start < texts.size(); start += batch) {
    const std::size_t end = std::min(texts.size(), start + batch);
    nlohmann::json request{{"model", cfg.model},
                           {"input", std::vector<std::string>(texts.begin() + start, texts.begin() + end)}};
    auto res = client.Post(url.path, headers, request.dump(), "application/json");
    if (!res) {
      throw EmbeddingProviderError("embedding request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw EmbeddingProviderError("embedding service returned HTTP " + std::to_string(res->status));
    }
    auto part = parse_embedding_response(res->body, end - start);
    for (auto& e : part) out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

void EmbedderConfig::validate() const {
  if (dimension < 8) throw ValidationError("embedding dimension must be at least 8");
  if (ngram < 2) throw ValidationError("n-gram length must be at least 2");
  if (provider == EmbeddingProvider::kHttp && endpoint.empty()) {
    throw ValidationError("http embedding provider needs an endpoint");
  }
}

std::string serialize_record(const Record& r) {
  std::string out;
  for (std::size_t i = 0; i < r.attributes.size(); ++i) {
    if (i) out += " | ";
    out += r.attributes[i].name;
    out += ": ";
    out += r.attributes[i].value;
  }
  return out;
}

Embedding embed_text_local(std::string_view text, const EmbedderConfig& cfg) {
  cfg.validate();
  std::vector<double> counts(cfg.dimension, 0.0);
  if (text.empty()) return normalized(std::move(counts));

  // Boundary padding lets words share their leading and trailing grams.
  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back(' ');
  for (unsigned char c : text) {
    padded.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  padded.push_back(' ');

  const std::string_view view(padded);
  if (view.size() < cfg.ngram) {
    counts[hash_gram(view, cfg.hash_seed) % cfg.dimension] += 1.0;
  } else {
    for (std::size_t i = 0; i + cfg.ngram <= view.size(); ++i) {
      counts[hash_gram(view.substr(i, cfg.ngram), cfg.hash_seed) % cfg.dimension] += 1.0;
    }
  }
  for (double& c : counts) c = std::log1p(c);
  return normalized(std::move(counts));
}

Embedding embed_record(const Record& r, const EmbedderConfig& cfg) {
  if (cfg.provider == EmbeddingProvider::kLocal) return embed_text_local(serialize_record(r), cfg);
  cfg.validate();
  return fetch_http_embeddings({serialize_record(r)}, cfg).front();
}

std::vector<Embedding> embed_dataset(const Dataset& d, const EmbedderConfig& cfg) {
  cfg.validate();
  std::vector<std::string> texts;
  texts.reserve(d.size());
  for (const auto& r : d.records()) texts.push_back(serialize_record(r));

  if (cfg.provider == EmbeddingProvider::kHttp) return fetch_http_embeddings(texts, cfg);

  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text_local(t, cfg));
  return out;
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dimension() != b.dimension()) {
    throw ValidationError("embedding dimension mismatch: " + std::to_string(a.dimension()) +
                          " vs " + std::to_string(b.dimension()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return std::clamp(dot, -1.0, 1.0);
}

std::vector<Embedding> parse_embedding_response(std::string_view body, std::size_t expected) {
  std::vector<std::vector<double>> vectors;
  try {
    const auto doc = nlohmann::json::parse(body);
    if (doc.contains("data")) {
      const auto& data = doc.at("data");
      vectors.resize(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t slot = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
        if (slot >= vectors.size()) throw EmbeddingProviderError("embedding index out of range");
        vectors[slot] = data[i].at("embedding").get<std::vector<double>>();
      }
    } else if (doc.contains("embeddings")) {
      vectors = doc.at("embeddings").get<std::vector<std::vector<double>>>();
    } else {
      throw EmbeddingProviderError("embedding response has neither 'data' nor 'embeddings'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw EmbeddingProviderError(std::string("malformed embedding response: ") + e.what());
  }
  if (vectors.size() != expected) {
    throw EmbeddingProviderError("expected " + std::to_string(expected) + " embeddings, got " +
                                 std::to_string(vectors.size()));
  }
  std::vector<Embedding> out;
  out.reserve(vectors.size());
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
  for (auto& v : vectors) {
    if (v.empty() || v.size() != dim) {
      throw EmbeddingProviderError("embedding vectors have inconsistent dimensions");
    }
    out.push_back(normalized(std::move(v)));
  }
  return out;
}

}  // namespace erprop
