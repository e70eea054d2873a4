#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "botdet/rng.hpp"

namespace botdet {

// Walker/Vose alias table: O(n) construction, O(1) categorical sampling.
// Immutable after construction and safe to share across threads.
struct AliasTable {
  std::vector<double> prob;          // acceptance probability per slot
  std::vector<std::uint32_t> alias;  // fallback index per slot

  std::size_t size() const { return prob.size(); }

  // Probability mass the table assigns to each index (for verification).
  std::vector<double> reconstruct_probabilities() const;
};

// Builds the table for the distribution weights / sum(weights).
// Throws std::invalid_argument if weights is empty, contains a negative
// entry, or sums to zero.
AliasTable build_alias_table(std::span<const double> weights);

// Draws one index distributed per the table. One next_u64 + one next_double.
inline std::uint32_t sample_alias(const AliasTable& table, Rng& rng) {
  const auto slot =
      static_cast<std::uint32_t>(rng.next_below(table.prob.size()));
  return rng.next_double() < table.prob[slot] ? slot : table.alias[slot];
}

}  // namespace botdet
