#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "biplink/gibbs.hpp"
#include "biplink/types.hpp"

namespace biplink {

// Pooled posterior summaries across chains. mean_prob averages the retained
// Rao-Blackwellized link probabilities; new_link_counts[t] counts pairs with
// mean_prob above thresholds[t] and no observed record for the pair anywhere;
// prevalence[t] is the fraction of all pairs above thresholds[t].
struct PosteriorSummary {
  Eigen::MatrixXd mean_prob;  // n_F x n_P
  std::vector<double> thresholds;
  std::vector<long> new_link_counts;
  std::vector<double> prevalence;
  Eigen::MatrixXd occ_tier_table;  // 5 tiers x 2 sides (frugivore, plant); empty unless studies given
  int n_samples = 0;               // retained samples per chain
  int n_chains = 0;
};

// Pools chains into a PosteriorSummary. All chains must agree on variant,
// retained-sample count, and matrix dimensions (and with A's dimensions).
// When `studies` is supplied the occurrence tier table is filled in.
PosteriorSummary summarize(const std::vector<ChainOutput>& outputs, const ObservedTensor& A,
                           const std::vector<StudyMeta>* studies = nullptr,
                           const std::vector<double>& thresholds = {0.5, 0.75});

// Mean posterior occurrence probability per proximity tier and side.
// Rows follow the Tier enum order; column 0 is the frugivore side, column 1
// the plant side. Cells (species, study) are grouped by the proximity of the
// closest observation; a tier with no cells reports NaN.
Eigen::MatrixXd occurrence_tier_summary(const std::vector<ChainOutput>& outputs,
                                        const ObservedTensor& A,
                                        const std::vector<StudyMeta>& studies);

// Potential scale reduction factor on a scalar series, conservative form
// sqrt((W + B/n) / W) so that identical chains give exactly 1. Requires at
// least two chains of equal length >= 10. All-constant chains with equal
// values give 1; constant chains at different values give infinity.
double gelman_rubin(const std::vector<std::vector<double>>& traces);

// One column per chain, header names chain1..chainK. Chains may have unequal
// lengths; short columns are left blank at the tail.
void write_trace_csv(const std::string& path, const std::string& name,
                     const std::vector<std::vector<double>>& traces);

// Binary archive holding every chain's retained samples and traces, so that
// summarize/diagnostics can run in a separate invocation from the fit.
void save_archive(const std::string& path, const std::vector<ChainOutput>& outputs);
std::vector<ChainOutput> load_archive(const std::string& path);

}  // namespace biplink
