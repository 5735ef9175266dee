#include "erprop/pricing.hpp"

#include <cmath>

#include "erprop/error.hpp"

namespace erprop {

void Pricing::validate() const {
  if (!(input_per_million >= 0.0) || !(output_per_million >= 0.0) ||
      !std::isfinite(input_per_million) || !std::isfinite(output_per_million)) {
    throw ValidationError("pricing must be finite and non-negative");
  }
}

std::size_t TokenEstimator::count(std::string_view text) const {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(text.size()) / chars_per_token));
}

void TokenEstimator::validate() const {
  if (!(chars_per_token > 0.0)) throw ValidationError("chars_per_token must be positive");
}

}  // namespace erprop
