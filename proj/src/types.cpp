#include "biplink/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace biplink {

int SpeciesIndex::intern_animal(const std::string& label) {
  auto [it, inserted] = animal_id.try_emplace(label, n_animals());
  if (inserted) animal_labels.push_back(label);
  return it->second;
}

int SpeciesIndex::intern_plant(const std::string& label) {
  auto [it, inserted] = plant_id.try_emplace(label, n_plants());
  if (inserted) plant_labels.push_back(label);
  return it->second;
}

ObservedTensor::ObservedTensor(int n_animals, int n_plants, int n_studies,
                               std::vector<Triple> entries)
    : n_animals_(n_animals), n_plants_(n_plants), n_studies_(n_studies) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  entries_ = std::move(entries);
  animal_obs_.assign(static_cast<std::size_t>(n_animals_) * n_studies_, 0);
  plant_obs_.assign(static_cast<std::size_t>(n_plants_) * n_studies_, 0);
  pair_obs_.assign(static_cast<std::size_t>(n_animals_) * n_plants_, 0);
  keys_.reserve(entries_.size() * 2);
  for (const Triple& t : entries_) {
    if (t.animal < 0 || t.animal >= n_animals_ || t.plant < 0 || t.plant >= n_plants_ ||
        t.study < 0 || t.study >= n_studies_) {
      throw std::out_of_range("ObservedTensor: entry outside declared dimensions");
    }
    keys_.insert((static_cast<std::uint64_t>(t.study) * n_animals_ + t.animal) * n_plants_ +
                 t.plant);
    animal_obs_[idx_is(t.animal, t.study)] = 1;
    plant_obs_[idx_js(t.plant, t.study)] = 1;
    pair_obs_[idx_ij(t.animal, t.plant)] = 1;
  }
}

bool ObservedTensor::contains(int i, int j, int s) const {
  return keys_.count((static_cast<std::uint64_t>(s) * n_animals_ + i) * n_plants_ + j) > 0;
}

bool ObservedTensor::animal_observed_anywhere(int i) const {
  for (int s = 0; s < n_studies_; ++s) {
    if (animal_observed_in(i, s)) return true;
  }
  return false;
}

bool ObservedTensor::plant_observed_anywhere(int j) const {
  for (int s = 0; s < n_studies_; ++s) {
    if (plant_observed_in(j, s)) return true;
  }
  return false;
}

std::vector<std::pair<int, int>> ObservedTensor::observed_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_animals_; ++i) {
    for (int j = 0; j < n_plants_; ++j) {
      if (pair_obs_[idx_ij(i, j)]) out.emplace_back(i, j);
    }
  }
  return out;
}

ObservedTensor ObservedTensor::without_pairs(
    const std::vector<std::pair<int, int>>& pairs) const {
  std::unordered_set<std::uint64_t> drop;
  for (auto [i, j] : pairs) drop.insert(static_cast<std::uint64_t>(i) * n_plants_ + j);
  std::vector<Triple> kept;
  kept.reserve(entries_.size());
  for (const Triple& t : entries_) {
    if (!drop.count(static_cast<std::uint64_t>(t.animal) * n_plants_ + t.plant)) {
      kept.push_back(t);
    }
  }
  return ObservedTensor(n_animals_, n_plants_, n_studies_, std::move(kept));
}

const char* study_kind_name(StudyKind k) {
  switch (k) {
    case StudyKind::zoocentric: return "zoocentric";
    case StudyKind::phytocentric: return "phytocentric";
    case StudyKind::network: return "network";
    case StudyKind::pair: return "pair";
  }
  return "?";
}

FocusTensor::FocusTensor(int n_animals, int n_plants, std::vector<StudyFocus> studies)
    : n_animals_(n_animals), n_plants_(n_plants), studies_(std::move(studies)) {
  for (StudyFocus& f : studies_) {
    std::sort(f.animals.begin(), f.animals.end());
    std::sort(f.plants.begin(), f.plants.end());
    std::sort(f.prs.begin(), f.prs.end());
  }
}

bool FocusTensor::at(int i, int j, int s) const {
  if (pair_excluded(i, j)) return false;
  const StudyFocus& f = studies_[s];
  if (f.kind == StudyKind::pair) {
    return std::binary_search(f.prs.begin(), f.prs.end(),
                              std::pair<std::int32_t, std::int32_t>{i, j});
  }
  return std::binary_search(f.animals.begin(), f.animals.end(), i) &&
         std::binary_search(f.plants.begin(), f.plants.end(), j);
}

bool FocusTensor::pair_excluded(int i, int j) const {
  return !excluded_.empty() && excluded_.count(pair_key(i, j)) > 0;
}

FocusTensor FocusTensor::with_excluded_pairs(
    const std::vector<std::pair<int, int>>& pairs) const {
  FocusTensor out = *this;
  for (auto [i, j] : pairs) out.excluded_.insert(out.pair_key(i, j));
  return out;
}

PhyloCorrelation PhyloCorrelation::identity(int n_animals, int n_plants) {
  PhyloCorrelation c;
  c.C_animal = Eigen::MatrixXd::Identity(n_animals, n_animals);
  c.C_plant = Eigen::MatrixXd::Identity(n_plants, n_plants);
  return c;
}

bool TierMap::valid() const {
  const double v[5] = {same_study, same_site, same_country_only, same_zone_only, different_zone};
  for (int k = 0; k < 5; ++k) {
    if (!(v[k] >= 0.0 && v[k] <= 1.0)) return false;
    if (k > 0 && v[k] > v[k - 1]) return false;
  }
  return true;
}

TierMap TierMap::naive() { return {1.0, 0.0, 0.0, 0.0, 0.0}; }
TierMap TierMap::default75() { return {1.0, 0.75, 0.75, 0.75, 0.75}; }
TierMap TierMap::expert() { return {1.0, 0.75, 0.50, 0.25, 0.0}; }

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::same_study: return "same_study";
    case Tier::same_site: return "same_site";
    case Tier::same_country_only: return "same_country_only";
    case Tier::same_zone_only: return "same_zone_only";
    case Tier::different_zone: return "different_zone";
  }
  return "?";
}

}  // namespace biplink
