#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace richness {

// Presence/absence records: one row per observed species, one column per
// sampling unit (transect, quadrat, ...). Construction validates, so a held
// IncidenceMatrix is always well-formed: binary cells, distinct labels, no
// all-zero rows, at least one unit.
struct IncidenceMatrix {
  std::vector<std::string> species_labels;
  std::vector<std::vector<std::uint8_t>> detections;  // [species][unit], each 0 or 1
  int units = 0;

  // Validates and builds; throws std::invalid_argument describing the first
  // violation (duplicate label, non-binary cell, all-zero row, shape mismatch).
  static IncidenceMatrix create(std::vector<std::string> labels,
                                std::vector<std::vector<std::uint8_t>> detections,
                                int units);

  int species_count() const { return static_cast<int>(detections.size()); }
};

// S_obs plus the full incidence-frequency spectrum Q[1..T]:
// Q[k] = number of species detected in exactly k units.
struct FrequencyCounts {
  int s_obs = 0;
  std::vector<int> q;  // q[k-1] holds Q[k], dense over k = 1..units
  int units = 0;

  int q_at(int k) const {
    return (k >= 1 && k <= static_cast<int>(q.size())) ? q[static_cast<std::size_t>(k - 1)] : 0;
  }
  double q1() const { return q_at(1); }
  double q2() const { return q_at(2); }
};

FrequencyCounts tally_frequencies(const IncidenceMatrix& m);

}  // namespace richness
