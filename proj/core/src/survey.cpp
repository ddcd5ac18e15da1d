#include "richness/survey.hpp"

#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace richness {

IncidenceMatrix IncidenceMatrix::create(std::vector<std::string> labels,
                                        std::vector<std::vector<std::uint8_t>> detections,
                                        int units) {
  if (units < 1) throw std::invalid_argument("incidence matrix needs at least one sampling unit");
  if (labels.size() != detections.size())
    throw std::invalid_argument("species label count does not match detection row count");
  std::unordered_set<std::string> seen;
  seen.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!seen.insert(labels[i]).second)
      throw std::invalid_argument("duplicate species label '" + labels[i] + "'");
    const auto& row = detections[i];
    if (static_cast<int>(row.size()) != units)
      throw std::invalid_argument("row for species '" + labels[i] + "' has " +
                                  std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(units));
    int ones = 0;
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (row[t] > 1)
        throw std::invalid_argument("non-binary cell for species '" + labels[i] + "' in unit " +
                                    std::to_string(t + 1));
      ones += row[t];
    }
    if (ones == 0)
      throw std::invalid_argument("species '" + labels[i] +
                                  "' has no detections; drop it before construction");
  }
  IncidenceMatrix m;
  m.species_labels = std::move(labels);
  m.detections = std::move(detections);
  m.units = units;
  return m;
}

FrequencyCounts tally_frequencies(const IncidenceMatrix& m) {
  FrequencyCounts fc;
  fc.units = m.units;
  fc.s_obs = m.species_count();
  fc.q.assign(static_cast<std::size_t>(m.units), 0);
  for (const auto& row : m.detections) {
    const int k = std::accumulate(row.begin(), row.end(), 0);
    // Construction guarantees 1 <= k <= units.
    ++fc.q[static_cast<std::size_t>(k - 1)];
  }
  return fc;
}

}  // namespace richness
