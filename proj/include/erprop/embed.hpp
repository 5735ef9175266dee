#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erprop/records.hpp"

namespace erprop {

/// Unit-norm record vector. Records with no text map to the zero vector and
/// carry `zero = true`.
struct Embedding {
  std::vector<double> values;
  bool zero = false;

  std::size_t dimension() const { return values.size(); }
  bool operator==(const Embedding&) const = default;
};

enum class EmbeddingProvider { kLocal, kHttp };

inline constexpr std::uint64_t kDefaultHashSeed = 0x9e3779b97f4a7c15ULL;

struct EmbedderConfig {
  EmbeddingProvider provider = EmbeddingProvider::kLocal;
  std::size_t dimension = 512;
  std::size_t ngram = 3;
  std::uint64_t hash_seed = kDefaultHashSeed;

  // http provider
  std::string endpoint;  // e.g. http://localhost:8080/v1/embeddings
  std::string model;
  std::string api_key_env;  // name of the variable holding the key
  double timeout_seconds = 30.0;
  std::size_t batch_size = 64;

  /// Throws ValidationError when dimension < 8 or ngram < 2.
  void validate() const;
};

/// "name: value" segments joined by " | ", in attribute order.
std::string serialize_record(const Record& r);

/// Hashed character n-gram embedding of already-serialized text.
Embedding embed_text_local(std::string_view text, const EmbedderConfig& cfg);

Embedding embed_record(const Record& r, const EmbedderConfig& cfg);

/// Embeds every record. The http provider sends batches of
/// `cfg.batch_size`; failures surface as EmbeddingProviderError.
std::vector<Embedding> embed_dataset(const Dataset& d, const EmbedderConfig& cfg);

/// Dot product of two unit vectors clamped to [-1, 1]. Throws
/// ValidationError on dimension mismatch.
double cosine(const Embedding& a, const Embedding& b);

/// Parses an embedding-service reply. Accepts {"data":[{"embedding":[...]}]}
/// (index-ordered) or {"embeddings":[[...]]}.
std::vector<Embedding> parse_embedding_response(std::string_view body, std::size_t expected);

}  // namespace erprop
