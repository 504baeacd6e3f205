#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "biplink/gibbs.hpp"
#include "biplink/types.hpp"

namespace biplink {

struct HoldoutSpec {
  std::vector<std::pair<int, int>> heldout_pairs;  // distinct, sorted
  int replicate_id = 0;
  std::uint64_t seed = 0;
};

struct Holdout {
  ObservedTensor A;  // every record of a held-out pair removed
  FocusTensor F;     // held-out pairs masked out of every study
  HoldoutSpec spec;
  std::vector<Triple> removed_entries;  // the dropped records, original order
};

// Samples n_pairs distinct observed pairs and blanks them out of both
// tensors; the inputs are untouched. Draws come from the evaluation seed
// stream, so holdouts never collide with sampler streams.
Holdout make_holdout(const ObservedTensor& A, const FocusTensor& F, int n_pairs,
                     std::uint64_t seed, int replicate_id = 0);

// Rebuilds the pre-holdout tensors from a holdout (records re-added, pair
// masks lifted). Equal to the originals as tensors; record order may differ.
std::pair<ObservedTensor, FocusTensor> un_holdout(const Holdout& h);

// mean(mean_prob over held-out pairs) / mean(mean_prob over all pairs).
double pseudo_precision(const Eigen::MatrixXd& mean_prob, const HoldoutSpec& holdout);

// The admissible interval (1, 1/prevalence) a holdout fit's pseudo-precision
// is reported against.
std::pair<double, double> pseudo_precision_bounds(double prevalence);

// Fraction of held-out pairs with mean_prob above the threshold.
double recall_at(const Eigen::MatrixXd& mean_prob, const HoldoutSpec& holdout, double threshold);

// Retained link-probability samples on the logit scale, pooled across
// chains. Rows index the species carrying the analyzed trait: pass
// plant_side = true to transpose so plants see animals as partners.
std::vector<Eigen::MatrixXd> logit_link_samples(const std::vector<ChainOutput>& outputs,
                                                bool plant_side);

struct TraitImportance {
  double value = 0.0;           // |T_hat - mean(T0)| / sd(T0)
  double t_hat = 0.0;           // mean squared correlation with the intact trait
  long degenerate_skipped = 0;  // constant partner columns dropped from the mean
};

// Permutation test of the mean squared correlation between a trait column
// and the per-partner logit probabilities, averaged over retained samples
// and partners. Permutations re-use the evaluation seed stream.
TraitImportance variable_importance(const Eigen::VectorXd& trait,
                                    const std::vector<Eigen::MatrixXd>& logit_samples,
                                    int n_permutations = 100, std::uint64_t seed = 1);

// Mean over samples of corr(trait, logit column), one entry per partner
// species; NaN where every sample's column is constant.
Eigen::VectorXd signed_trait_correlations(const Eigen::VectorXd& trait,
                                          const std::vector<Eigen::MatrixXd>& logit_samples);

struct CvRow {
  int replicate = 0;
  std::string variant;
  double pseudo_precision = 0.0;
  double recall_50 = 0.0;
  double recall_75 = 0.0;
};

void write_cv_report(const std::string& path, const std::vector<CvRow>& rows);

}  // namespace biplink
