#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "biplink/kernels.hpp"
#include "biplink/model.hpp"
#include "biplink/types.hpp"

namespace biplink {

struct ChainConfig {
  int n_iter = 20000;
  int n_burn = 10000;
  double thin_keep_fraction = 0.05;  // fraction of post-burn-in sweeps retained
  int n_chains = 4;
  std::uint64_t seed = 1;
  Variant sampler_variant = Variant::coil;
  Hyperparams hyperparams;

  BackendKind backend = BackendKind::indexed;
  int chain_index = 0;  // which chain this run is; keys the chain's RNG stream

  // Checkpointing. With a non-empty path and a positive interval the chain
  // state is serialized every `checkpoint_every` sweeps; with `resume` set, an
  // existing file restarts the run from the sweep after the saved one. All
  // randomness is keyed by (seed, chain, sweep, block, unit), so a resumed
  // run is bit-identical to an uninterrupted one.
  std::string checkpoint_path;
  int checkpoint_every = 0;
  bool resume = false;

  void validate() const;  // throws std::invalid_argument
};

struct ChainOutput {
  // Retained per-sample matrices: Rao-Blackwellized link probabilities (the
  // Bernoulli parameter of the link update, 1 for observed pairs), and the
  // occurrence state per side — occurrence probabilities for the extended
  // variant, raw 0/1 indicators for the plain one (its probabilities are
  // pinned at the prior centers).
  std::vector<Eigen::MatrixXd> prob_samples;
  std::vector<Eigen::MatrixXd> occ_f_samples;
  std::vector<Eigen::MatrixXd> occ_p_samples;

  // Per-sweep traces over the whole run, burn-in included.
  std::vector<double> loglik_trace;
  std::vector<double> rho_u_trace;
  std::vector<double> rho_v_trace;
  std::vector<double> lambda0_trace;

  // Occurrence MH bookkeeping (extended variant; zero for the plain one).
  long occ_proposals = 0;
  long occ_accepts = 0;

  Variant variant = Variant::coil;
  int n_iter = 0;
  int n_burn = 0;

  LatentState final_state;

  double occ_acceptance() const {
    return occ_proposals > 0 ? static_cast<double>(occ_accepts) / occ_proposals : 0.0;
  }
};

// Number of retained samples implied by the thinning rule.
inline int thin_target(int n_iter, int n_burn, double keep_fraction) {
  return static_cast<int>(keep_fraction * (n_iter - n_burn));
}

// Evenly spread retention: the k-th post-burn-in sweep (k = 1..post) is kept
// exactly when floor(k*target/post) increments, giving target samples total.
inline bool thin_keeps(int k, int post, int target) {
  const auto lo = static_cast<long long>(k - 1) * target / post;
  const auto hi = static_cast<long long>(k) * target / post;
  return hi > lo;
}

// ---------------------------------------------------------------------------
// Single-block sweep steps. run_chain composes these; they are exposed so the
// tests can drive one conditional at a time against closed-form oracles.
// Discrete-state blocks (links, detection trials, occurrence) live on the
// SamplerBackend interface instead, since their gathers differ per backend.
// ---------------------------------------------------------------------------

// Draw every column of one side's factor matrix from its Gaussian full
// conditional; rebuilds ws.eta after each column.
void update_factor_side(Side side, int iter, const RngStream& root, LatentState& st,
                        SweepWorkspace& ws, const TraitTable& traits,
                        const Eigen::MatrixXd& sigma_inv);

// Conjugate draw of the interaction intercept given the logistic auxiliaries.
void update_intercept(int iter, const RngStream& root, LatentState& st,
                      SweepWorkspace& ws, double coef_prior_var);

// Log-scale random-walk step on each shrinkage increment against the
// collapsed Bernoulli link likelihood; refreshes the weights and ws.eta on
// acceptance.
void update_shrinkage(int iter, const RngStream& root, LatentState& st,
                      SweepWorkspace& ws, const Hyperparams& hp);

// Griddy draw of one side's phylogeny weight; returns the picked grid index
// and writes the weight into the state.
int update_rho_side(Side side, int iter, const RngStream& root, LatentState& st,
                    const GpCache& cache);

// Conjugate (continuous) or logistic-auxiliary (binary) draw of each trait
// column's intercept and loadings, plus the residual variance for continuous
// columns.
void update_trait_side(Side side, int iter, const RngStream& root, LatentState& st,
                       SweepWorkspace& ws, const TraitTable& traits,
                       const Hyperparams& hp);

// Draw both sides' detection coefficient vectors from the collapsed trial
// sums, then refresh the stored per-species detection probabilities.
void update_detection_coefs(int iter, const RngStream& root, LatentState& st,
                            SweepWorkspace& ws, const Hyperparams& hp);

// One full MCMC chain: per sweep, logistic auxiliaries -> link exposure counts
// -> links -> detection trials -> latent factor columns -> interaction
// intercept -> shrinkage increments -> phylogeny weights -> trait
// coefficients -> detection redraw and coefficients -> occurrence. Numeric
// failures are rethrown with the sweep index and block name attached.
ChainOutput run_chain(const DataBundle& bundle, const ChainConfig& config);

// config.n_chains sequential chains with chain_index 0..n_chains-1; per-chain
// checkpoint paths get ".chain<k>" appended.
std::vector<ChainOutput> run_chains(const DataBundle& bundle, const ChainConfig& config);

// Long-run marginal frequencies of the discrete state under the links +
// occurrence blocks alone, with every continuous parameter frozen at its
// value in `start`. This is the chain projection whose stationary law is
// exactly enumerable on tiny instances.
struct FrozenTally {
  Eigen::MatrixXd link_freq;   // mean of L over sweeps
  Eigen::MatrixXd occ_f_freq;  // mean of O_F
  Eigen::MatrixXd occ_p_freq;
  long sweeps = 0;
};

FrozenTally run_frozen_tally(const DataBundle& bundle, const Hyperparams& hp,
                             Variant variant, const LatentState& start, long n_sweeps,
                             std::uint64_t seed, int chain_index = 0,
                             BackendKind backend = BackendKind::indexed);

}  // namespace biplink
