#include "biplink/focus.hpp"

#include <stdexcept>

namespace biplink {

namespace {

// Hierarchical proximity: a site match only counts within the same country
// and zone, a country match only within the same zone. Missing sites are
// unique singletons and never match.
Tier proximity(const StudyMeta& a, const StudyMeta& b) {
  if (a.zone != b.zone) return Tier::different_zone;
  if (a.country != b.country) return Tier::same_zone_only;
  if (a.site.empty() || b.site.empty() || a.site != b.site) return Tier::same_country_only;
  return Tier::same_site;
}

double tier_value(const TierMap& tiers, Tier t) {
  switch (t) {
    case Tier::same_study: return tiers.same_study;
    case Tier::same_site: return tiers.same_site;
    case Tier::same_country_only: return tiers.same_country_only;
    case Tier::same_zone_only: return tiers.same_zone_only;
    case Tier::different_zone: return tiers.different_zone;
  }
  return 0.0;
}

template <typename ObservedIn>
Tier classify(const std::vector<StudyMeta>& studies, int s, ObservedIn observed_in) {
  if (observed_in(s)) return Tier::same_study;
  Tier best = Tier::different_zone;
  for (int t = 0; t < static_cast<int>(studies.size()); ++t) {
    if (t == s || !observed_in(t)) continue;
    const Tier p = proximity(studies[s], studies[t]);
    if (static_cast<int>(p) < static_cast<int>(best)) best = p;
  }
  return best;
}

}  // namespace

FocusTensor derive_focus(const ObservedTensor& A, const std::vector<StudyMeta>& studies,
                         std::vector<std::string>* warnings) {
  if (static_cast<int>(studies.size()) != A.n_studies()) {
    throw std::invalid_argument("derive_focus: study metadata count does not match tensor");
  }
  const int nS = A.n_studies();
  std::vector<StudyFocus> focus(nS);
  std::vector<bool> any(nS, false);
  for (int s = 0; s < nS; ++s) focus[s].kind = studies[s].kind;
  for (const Triple& t : A.entries()) any[t.study] = true;

  std::vector<std::int32_t> all_animals(A.n_animals()), all_plants(A.n_plants());
  for (int i = 0; i < A.n_animals(); ++i) all_animals[i] = i;
  for (int j = 0; j < A.n_plants(); ++j) all_plants[j] = j;

  for (int s = 0; s < nS; ++s) {
    StudyFocus& f = focus[s];
    if (!any[s]) {
      if (warnings) {
        warnings->push_back("study '" + studies[s].id + "' has no observed interactions; it exposes nothing");
      }
      continue;
    }
    switch (f.kind) {
      case StudyKind::zoocentric: {
        for (int i = 0; i < A.n_animals(); ++i) {
          if (A.animal_observed_in(i, s)) f.animals.push_back(i);
        }
        f.plants = all_plants;
        break;
      }
      case StudyKind::phytocentric: {
        for (int j = 0; j < A.n_plants(); ++j) {
          if (A.plant_observed_in(j, s)) f.plants.push_back(j);
        }
        f.animals = all_animals;
        break;
      }
      case StudyKind::network: {
        f.animals = all_animals;
        f.plants = all_plants;
        break;
      }
      case StudyKind::pair: {
        for (const Triple& t : A.entries()) {
          if (t.study == s) f.prs.emplace_back(t.animal, t.plant);
        }
        break;
      }
    }
  }
  return FocusTensor(A.n_animals(), A.n_plants(), std::move(focus));
}

Tier classify_animal_tier(const ObservedTensor& A, const std::vector<StudyMeta>& studies,
                          int i, int s) {
  return classify(studies, s, [&](int t) { return A.animal_observed_in(i, t); });
}

Tier classify_plant_tier(const ObservedTensor& A, const std::vector<StudyMeta>& studies,
                         int j, int s) {
  return classify(studies, s, [&](int t) { return A.plant_observed_in(j, t); });
}

OccurrencePriorTable build_occurrence_prior(const ObservedTensor& A,
                                            const std::vector<StudyMeta>& studies,
                                            const TierMap& tiers) {
  if (!tiers.valid()) {
    throw std::invalid_argument(
        "build_occurrence_prior: tier map must be within [0,1] and monotone non-increasing");
  }
  if (static_cast<int>(studies.size()) != A.n_studies()) {
    throw std::invalid_argument("build_occurrence_prior: study metadata count mismatch");
  }
  OccurrencePriorTable out;
  out.P_OF.resize(A.n_animals(), A.n_studies());
  out.P_OP.resize(A.n_plants(), A.n_studies());
  for (int s = 0; s < A.n_studies(); ++s) {
    for (int i = 0; i < A.n_animals(); ++i) {
      const Tier t = classify_animal_tier(A, studies, i, s);
      out.P_OF(i, s) = t == Tier::same_study ? 1.0 : tier_value(tiers, t);
    }
    for (int j = 0; j < A.n_plants(); ++j) {
      const Tier t = classify_plant_tier(A, studies, j, s);
      out.P_OP(j, s) = t == Tier::same_study ? 1.0 : tier_value(tiers, t);
    }
  }
  return out;
}

}  // namespace biplink
