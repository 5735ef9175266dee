#pragma once

#include <cstddef>
#include <string_view>

namespace erprop {

/// Per-million-token API prices in currency units.
struct Pricing {
  double input_per_million = 0.25;
  double output_per_million = 2.00;

  double cost(std::size_t tokens_in, std::size_t tokens_out) const {
    return static_cast<double>(tokens_in) / 1e6 * input_per_million +
           static_cast<double>(tokens_out) / 1e6 * output_per_million;
  }

  void validate() const;
};

/// Tokenizer-free size proxy: ceil(characters / chars_per_token).
struct TokenEstimator {
  double chars_per_token = 4.0;
  std::size_t output_tokens = 4;  // one index or "NONE"

  std::size_t count(std::string_view text) const;
  void validate() const;
};

}  // namespace erprop
