#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "biplink/rng.hpp"
#include "biplink/types.hpp"

namespace biplink {

enum class Variant { coil, coil_plus };
enum class Side { animal, plant };

const char* variant_name(Variant v);

using BinMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Numerical floor applied inside every log/logit transform.
inline double clamp_prob(double x) {
  if (x < 1e-12) return 1e-12;
  if (x > 1.0 - 1e-12) return 1.0 - 1e-12;
  return x;
}

inline double logistic(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double x) {
  const double c = clamp_prob(x);
  return std::log(c) - std::log(1.0 - c);
}

// log(1 + e^x), stable on both tails.
inline double log1pexp(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

struct Hyperparams {
  int H = 10;                   // latent dimension
  double mgp_a1 = 2.0;          // first shrinkage increment shape, Gamma(a1, 1)
  double mgp_a2 = 3.0;          // later increments, Gamma(a2, 1)
  double coef_prior_var = 4.0;  // N(0, v) on every intercept and loading
  std::vector<double> rho_grid; // defaults to {0.01, 0.05, ..., 0.95, 0.99}
  double occ_prior_sd = 1.0;    // truncated-normal sd around the prior center
  double mh_step = 0.1;         // occurrence proposal variance (sd = sqrt)
  double p01 = 0.25;            // occurrence flip proposal 0 -> 1
  double p10 = 0.65;            // occurrence flip proposal 1 -> 0
  double trait_var_shape = 2.0; // residual variance ~ InvGamma(shape, rate)
  double trait_var_rate = 1.0;
  double mgp_mh_step = 0.4;     // log-scale random-walk sd for shrinkage increments

  static std::vector<double> default_rho_grid();
  Hyperparams();
  void validate() const;  // throws std::invalid_argument on violations
};

// Per-exposed-triple detection indicators. A triple is exposed when
// F * O_F * O_P * L = 1; the observation then requires joint detection, so
// A = 1 forces (1,1) and A = 0 admits only {(0,0),(1,0),(0,1)}. The list is
// kept in study-major (s, i, j) order, the canonical triple order used by
// every accumulation in the samplers.
struct DetectionTrials {
  std::vector<Triple> triples;
  std::vector<std::uint8_t> a;    // observed indicator
  std::vector<std::uint8_t> d_f;  // animal detected
  std::vector<std::uint8_t> d_p;  // plant detected

  std::size_t size() const { return triples.size(); }
  void clear();
};

struct LatentState {
  Eigen::MatrixXd U;  // n_F x H
  Eigen::MatrixXd V;  // n_P x H

  double lambda0 = 0.0;
  Eigen::VectorXd lambda;      // H, positive interaction weights
  Eigen::VectorXd mgp_deltas;  // H, positive shrinkage increments

  double rho_U = 0.5;
  double rho_V = 0.5;

  Eigen::VectorXd beta0;   // p_M trait intercepts (animal)
  Eigen::MatrixXd beta;    // p_M x H loadings
  Eigen::VectorXd gamma0;  // p_P
  Eigen::MatrixXd gamma;   // p_P x H
  Eigen::VectorXd trait_vars_animal;  // p_M residual variances (1 for binary)
  Eigen::VectorXd trait_vars_plant;   // p_P

  double delta0 = 0.0;
  Eigen::VectorXd delta;  // H animal detection loadings
  double zeta0 = 0.0;
  Eigen::VectorXd zeta;   // H plant detection loadings
  Eigen::VectorXd p;      // n_F detection probabilities
  Eigen::VectorXd q;      // n_P

  BinMatrix L;    // n_F x n_P latent true links
  BinMatrix O_F;  // n_F x n_S occurrence indicators
  BinMatrix O_P;  // n_P x n_S
  Eigen::MatrixXd pi_F;  // n_F x n_S occurrence probabilities
  Eigen::MatrixXd pi_P;  // n_P x n_S

  DetectionTrials trials;

  int n_animals() const { return static_cast<int>(U.rows()); }
  int n_plants() const { return static_cast<int>(V.rows()); }
  int n_studies() const { return static_cast<int>(O_F.cols()); }
  int H() const { return static_cast<int>(U.cols()); }
};

// lambda0 + sum_h lambda_h U_ih V_jh.
double interaction_logit(const LatentState& state, int i, int j);

// Full n_F x n_P matrix of interaction logits, accumulated dimension by
// dimension (h ascending) — the canonical order shared by all samplers.
Eigen::MatrixXd interaction_logit_matrix(const LatentState& state);

// rho * C + (1 - rho) * I. rho must lie strictly inside (0, 1).
Eigen::MatrixXd build_sigma(double rho, const Eigen::MatrixXd& C);

// Eq-style conditional observation probability: 0 unless l*f*o = 1, else p*q.
double observation_prob(int l, int f, int o, double p_i, double q_j);

// Sum over triples with F*O_F*O_P*L = 1 of a*log(p q) + (1-a)*log(1 - p q),
// accumulated study-major. Returns -infinity when any observed triple sits on
// a cell with F*O*L = 0 (inconsistent state).
double log_likelihood(const LatentState& state, const ObservedTensor& A, const FocusTensor& F);

// Linear predictor of one trait column: intercept + factor loadings. The
// link (identity vs logit) is applied downstream by kind.
Eigen::VectorXd trait_predictor(const LatentState& state, Side side, int col);

// delta0 + U_i . delta (animal) or zeta0 + V_j . zeta (plant).
double detection_logit(const LatentState& state, Side side, int index);

// Cached per-grid-point prior pieces for the griddy occupancy-correlation
// step: Sigma(rho_g) inverse and log-determinant for one species side.
struct GpCache {
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> sigma_inv;
  std::vector<double> logdet;
};

GpCache build_gp_cache(const Eigen::MatrixXd& C, const std::vector<double>& grid);

// Deterministic initialization: lambda0 at the logit of observed density,
// factors at small noise, shrinkage increments at their prior means,
// detection probabilities at 1/2, occurrence at the prior centers. All draws
// come from streams forked off (seed, chain) with iteration label 0.
LatentState init_state(const DataBundle& bundle, const Hyperparams& hp, Variant variant,
                       std::uint64_t seed, int chain_index);

// Cross-field invariants of a sampler state given the data; throws
// std::logic_error naming the first violated invariant. Used by tests and
// debug builds.
void check_state_invariants(const LatentState& state, const ObservedTensor& A,
                            const FocusTensor& F, Variant variant);

}  // namespace biplink
