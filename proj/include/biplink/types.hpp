#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace biplink {

// Contiguous 0-based ids per side, assigned in first-appearance order.
struct SpeciesIndex {
  std::vector<std::string> animal_labels;
  std::vector<std::string> plant_labels;
  std::unordered_map<std::string, int> animal_id;
  std::unordered_map<std::string, int> plant_id;

  int n_animals() const { return static_cast<int>(animal_labels.size()); }
  int n_plants() const { return static_cast<int>(plant_labels.size()); }

  int intern_animal(const std::string& label);
  int intern_plant(const std::string& label);
};

struct Triple {
  std::int32_t animal;
  std::int32_t plant;
  std::int32_t study;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Set-semantics presence/absence tensor: one entry per distinct (i, j, s).
class ObservedTensor {
 public:
  ObservedTensor() = default;
  ObservedTensor(int n_animals, int n_plants, int n_studies, std::vector<Triple> entries);

  int n_animals() const { return n_animals_; }
  int n_plants() const { return n_plants_; }
  int n_studies() const { return n_studies_; }
  const std::vector<Triple>& entries() const { return entries_; }

  bool contains(int i, int j, int s) const;
  bool animal_observed_in(int i, int s) const { return animal_obs_[idx_is(i, s)] != 0; }
  bool plant_observed_in(int j, int s) const { return plant_obs_[idx_js(j, s)] != 0; }
  bool pair_observed(int i, int j) const { return pair_obs_[idx_ij(i, j)] != 0; }
  bool animal_observed_anywhere(int i) const;
  bool plant_observed_anywhere(int j) const;

  // Distinct (i, j) pairs with at least one entry, sorted.
  std::vector<std::pair<int, int>> observed_pairs() const;

  // Copy with every entry of the given pairs removed.
  ObservedTensor without_pairs(const std::vector<std::pair<int, int>>& pairs) const;

 private:
  std::size_t idx_is(int i, int s) const { return static_cast<std::size_t>(i) * n_studies_ + s; }
  std::size_t idx_js(int j, int s) const { return static_cast<std::size_t>(j) * n_studies_ + s; }
  std::size_t idx_ij(int i, int j) const { return static_cast<std::size_t>(i) * n_plants_ + j; }

  int n_animals_ = 0;
  int n_plants_ = 0;
  int n_studies_ = 0;
  std::vector<Triple> entries_;
  std::unordered_set<std::uint64_t> keys_;
  std::vector<std::uint8_t> animal_obs_;
  std::vector<std::uint8_t> plant_obs_;
  std::vector<std::uint8_t> pair_obs_;
};

enum class StudyKind { zoocentric, phytocentric, network, pair };

const char* study_kind_name(StudyKind k);

struct StudyMeta {
  std::string id;
  StudyKind kind = StudyKind::network;
  std::string site;     // empty = missing; missing sites match nothing
  std::string country;
  std::string zone;
};

// Sampling-design tensor. F is stored per study as explicit focal sets so
// that every kind reduces to the same membership test; a study with empty
// focal sets exposes nothing.
struct StudyFocus {
  StudyKind kind = StudyKind::network;
  std::vector<std::int32_t> animals;                       // sorted
  std::vector<std::int32_t> plants;                        // sorted
  std::vector<std::pair<std::int32_t, std::int32_t>> prs;  // pair studies, sorted
};

class FocusTensor {
 public:
  FocusTensor() = default;
  FocusTensor(int n_animals, int n_plants, std::vector<StudyFocus> studies);

  int n_animals() const { return n_animals_; }
  int n_plants() const { return n_plants_; }
  int n_studies() const { return static_cast<int>(studies_.size()); }
  const std::vector<StudyFocus>& studies() const { return studies_; }

  bool at(int i, int j, int s) const;
  bool pair_excluded(int i, int j) const;
  const std::unordered_set<std::uint64_t>& excluded_pairs() const { return excluded_; }

  // Copy with the given pairs masked out of every study (holdout support).
  FocusTensor with_excluded_pairs(const std::vector<std::pair<int, int>>& pairs) const;

 private:
  std::uint64_t pair_key(int i, int j) const {
    return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n_plants_) + j;
  }

  int n_animals_ = 0;
  int n_plants_ = 0;
  std::vector<StudyFocus> studies_;
  std::unordered_set<std::uint64_t> excluded_;
};

enum class TraitKind { continuous, binary };

struct TraitTable {
  Eigen::MatrixXd X;  // n_animals x p_M, continuous columns standardized
  Eigen::MatrixXd W;  // n_plants x p_P
  std::vector<TraitKind> x_kinds;
  std::vector<TraitKind> w_kinds;
  std::vector<std::string> x_names;
  std::vector<std::string> w_names;

  int p_animal() const { return static_cast<int>(X.cols()); }
  int p_plant() const { return static_cast<int>(W.cols()); }
};

struct PhyloCorrelation {
  Eigen::MatrixXd C_animal;  // n_animals x n_animals, correlation matrix
  Eigen::MatrixXd C_plant;

  static PhyloCorrelation identity(int n_animals, int n_plants);
};

struct OccurrencePriorTable {
  Eigen::MatrixXd P_OF;  // n_animals x n_studies, in [0,1]
  Eigen::MatrixXd P_OP;  // n_plants x n_studies
};

// Monotone non-increasing tier probabilities keyed by observation proximity.
struct TierMap {
  double same_study = 1.0;
  double same_site = 0.0;
  double same_country_only = 0.0;
  double same_zone_only = 0.0;
  double different_zone = 0.0;

  bool valid() const;

  static TierMap naive();      // 0/100: only in-study observation counts
  static TierMap default75();  // flat 75% outside the study
  static TierMap expert();     // graded decay with distance
};

enum class Tier { same_study = 0, same_site = 1, same_country_only = 2, same_zone_only = 3, different_zone = 4 };

const char* tier_name(Tier t);

struct DataBundle {
  SpeciesIndex species;
  ObservedTensor A;
  std::vector<StudyMeta> studies;
  FocusTensor F;
  TraitTable traits;
  PhyloCorrelation phylo;
  OccurrencePriorTable occ_prior;
};

}  // namespace biplink
