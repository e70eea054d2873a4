#include "botdet/alias.hpp"

#include <stdexcept>
#include <vector>

namespace botdet {

AliasTable build_alias_table(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("alias table: empty weight vector");

  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("alias table: negative weight");
    total += w;
  }
  if (total <= 0.0)
    throw std::invalid_argument("alias table: weights sum to zero");

  AliasTable table;
  table.prob.assign(n, 0.0);
  table.alias.assign(n, 0);

  // Scaled weights; an entry is "small" if below average mass 1.
  std::vector<double> scaled(n);
  const double scale = static_cast<double>(n) / total;
  for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * scale;

  std::vector<std::uint32_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }

  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    table.prob[s] = scaled[s];
    table.alias[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers hold exactly mass 1 up to rounding.
  for (std::uint32_t i : large) {
    table.prob[i] = 1.0;
    table.alias[i] = i;
  }
  for (std::uint32_t i : small) {
    table.prob[i] = 1.0;
    table.alias[i] = i;
  }
  return table;
}

std::vector<double> AliasTable::reconstruct_probabilities() const {
  const std::size_t n = prob.size();
  std::vector<double> mass(n, 0.0);
  const double slot_mass = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    mass[i] += prob[i] * slot_mass;
    mass[alias[i]] += (1.0 - prob[i]) * slot_mass;
  }
  return mass;
}

}  // namespace botdet
