#pragma once

#include <string>
#include <vector>

#include "biplink/types.hpp"

namespace biplink {

// Reconstructs the sampling-design tensor from the observed records:
//   zoocentric    -> focal animals are those with any record; all plants
//   phytocentric  -> focal plants are those with any record; all animals
//   network       -> all animals and all plants
//   pair          -> exactly the observed pairs of that study
// Studies whose kind-required side has no records get empty focal sets and a
// warning naming the study.
FocusTensor derive_focus(const ObservedTensor& A, const std::vector<StudyMeta>& studies,
                         std::vector<std::string>* warnings = nullptr);

// Proximity of the closest study (other than s itself) in which the species
// was observed. Falls back to different_zone when the species has never been
// observed outside s.
Tier classify_animal_tier(const ObservedTensor& A, const std::vector<StudyMeta>& studies,
                          int i, int s);
Tier classify_plant_tier(const ObservedTensor& A, const std::vector<StudyMeta>& studies,
                         int j, int s);

// Per-cell occurrence prior: 1 whenever the species was observed in the
// study, else the tier probability of its closest observation.
OccurrencePriorTable build_occurrence_prior(const ObservedTensor& A,
                                            const std::vector<StudyMeta>& studies,
                                            const TierMap& tiers);

}  // namespace biplink
