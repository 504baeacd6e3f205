#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "biplink/model.hpp"
#include "biplink/types.hpp"

namespace biplink {

// Generative mirror of the fitted model: latent factors with clade-block
// correlation, links from the factor logit, spatially decaying occurrence
// around a home study, kind-specific focal designs (zoocentric studies get a
// single focal animal), detection thinning, and factor-driven trait columns
// (one planted continuous signal, one pure-noise column, one binary column
// per side).
struct SynthConfig {
  int n_F = 40;
  int n_P = 60;
  int n_S = 50;
  int H_true = 3;

  double rho_u_true = 0.9;
  double rho_v_true = 0.9;
  double lambda0_true = -1.0;
  double lambda_true = 1.2;  // shared loading for every true factor

  int clade_size = 10;      // block width of the synthetic clade correlation
  double clade_corr = 0.7;  // within-block correlation

  double det_logit_min = -1.0;  // species detection logits ~ U(min, max)
  double det_logit_max = 2.0;

  double trait_effect = 2.0;    // factor loading of the planted trait columns
  double trait_noise_sd = 0.5;  // residual sd of the planted continuous trait

  // Study kind mix; must sum to 1.
  double frac_zoocentric = 0.66;
  double frac_phytocentric = 0.12;
  double frac_network = 0.12;
  double frac_pair = 0.10;

  // Occurrence rates by proximity between a study and the species' home
  // study (the home itself always counts as occupied).
  double occ_same_site = 0.75;
  double occ_same_country = 0.5;
  double occ_same_zone = 0.25;
  double occ_diff_zone = 0.05;

  int n_zones = 3;
  int countries_per_zone = 2;
  int sites_per_country = 2;

  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

// Ground truth aligned to the emitted bundle's (restricted) species/study
// indexing. Species and studies that produced no record are dropped from
// both the bundle and the truth, exactly as ingestion would drop them.
struct SynthTruth {
  Eigen::MatrixXd L;      // n_F x n_P, 0/1 true links
  Eigen::MatrixXd theta;  // n_F x n_P, true link probabilities
  Eigen::MatrixXd O_F;    // n_F x n_S, 0/1 true occurrences
  Eigen::MatrixXd O_P;    // n_P x n_S
  Eigen::VectorXd p;      // true detection probabilities
  Eigen::VectorXd q;
  Eigen::MatrixXd U;  // n_F x H_true latent factors
  Eigen::MatrixXd V;  // n_P x H_true
  double rho_u = 0.0;
  double rho_v = 0.0;

  // Pre-restriction record-count moments over the exposed design, for
  // density checks: sum of per-cell Bernoulli means and variances given the
  // drawn latents.
  double expected_records = 0.0;
  double records_variance = 0.0;
};

struct SynthResult {
  DataBundle bundle;  // occ_prior defaults to the graded tier map; override per run
  SynthTruth truth;
};

SynthResult generate(const SynthConfig& config);

// Emits the bundle in the ingestable file formats plus the truth matrices:
// interactions.csv, studies.csv, {animal,plant}_traits.csv,
// {animal,plant}_phylo.csv, truth_L.csv, truth_O_F.csv, truth_O_P.csv,
// truth_p.csv, truth_q.csv.
void write_dataset(const std::string& dir, const SynthResult& r);

struct TinyMarginals {
  Eigen::MatrixXd link;   // n_F x n_P
  Eigen::MatrixXd occ_f;  // n_F x n_S
  Eigen::MatrixXd occ_p;  // n_P x n_S
};

// Exact posterior marginals of (L, O_F, O_P) under frozen continuous
// parameters, by enumeration of every binary configuration. The occurrence
// prior enters as its per-cell effective Bernoulli weight: the raw center
// under plain sampling, the truncated-normal mean when occurrence
// probabilities are sampled. Throws if the joint state space exceeds 2^12
// or if no configuration is consistent with the records.
TinyMarginals exact_posterior_tiny(const DataBundle& bundle, const LatentState& state,
                                   Variant variant, double occ_prior_sd = 1.0);

}  // namespace biplink
