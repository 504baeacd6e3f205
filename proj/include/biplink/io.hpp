#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "biplink/types.hpp"

namespace biplink {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IngestResult {
  SpeciesIndex species;
  ObservedTensor A;
  std::vector<StudyMeta> studies;
  std::size_t rows_read = 0;
  std::size_t unique_triples = 0;
  std::size_t unique_pairs = 0;
};

// Reads the interaction records (header study_id,animal_id,plant_id) and the
// study metadata (header study_id,kind,site,country,zone). Duplicate rows
// collapse to set semantics; ids are assigned in first-appearance order of
// the records file. Studies present in the metadata but never referenced by
// a record receive no index.
IngestResult ingest_records(const std::string& records_path, const std::string& studies_path);

struct TraitColumns {
  Eigen::MatrixXd M;
  std::vector<std::string> names;
  std::vector<TraitKind> kinds;
};

// Header species_id,<trait>,... ; column kinds are declared by the caller
// (run config). Continuous columns are standardized to mean 0, sd 1; binary
// columns must already be 0/1. Every indexed species needs a row.
TraitColumns read_traits(const std::string& path, const std::vector<std::string>& labels,
                         const std::vector<TraitKind>& kinds, const std::string& side);

// Dense square matrix; first row and first column carry species labels.
// Rows/columns are reordered to the index order of `labels`.
Eigen::MatrixXd read_phylo(const std::string& path, const std::vector<std::string>& labels,
                           const std::string& side);

struct LabeledMatrix {
  Eigen::MatrixXd M;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

LabeledMatrix read_labeled_matrix(const std::string& path);

void write_labeled_matrix(const std::string& path, const Eigen::MatrixXd& M,
                          const std::vector<std::string>& row_labels,
                          const std::vector<std::string>& col_labels,
                          const std::string& corner = "");

void write_interactions_csv(const std::string& path, const SpeciesIndex& species,
                            const ObservedTensor& A,
                            const std::vector<StudyMeta>& studies);

void write_studies_csv(const std::string& path, const std::vector<StudyMeta>& studies);

void write_traits_csv(const std::string& path, const Eigen::MatrixXd& M,
                      const std::vector<std::string>& species_labels,
                      const std::vector<std::string>& trait_names);

// Standardize one column in place to mean 0, population sd 1.
void standardize_column(Eigen::Ref<Eigen::VectorXd> col, const std::string& what);

std::vector<std::string> split_fields(const std::string& line, char delim = ',');

StudyKind parse_study_kind(const std::string& text);

}  // namespace biplink
