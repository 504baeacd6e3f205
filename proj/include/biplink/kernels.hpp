#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "biplink/model.hpp"
#include "biplink/pg.hpp"
#include "biplink/rng.hpp"
#include "biplink/streams.hpp"
#include "biplink/truncnorm.hpp"
#include "biplink/types.hpp"

namespace biplink {

// Per-sweep auxiliary quantities. Everything here is recomputed every
// iteration; none of it is part of the checkpointed state except the
// detection indicators, which live in LatentState::trials.
struct SweepWorkspace {
  Eigen::MatrixXd eta;         // interaction logits, n_F x n_P
  Eigen::MatrixXd omega_link;  // logistic auxiliaries for the link likelihood
  Eigen::MatrixXd r_link;      // conditional link probabilities from the last link pass
  Eigen::MatrixXi m_link;      // per-pair count of exposing studies
  Eigen::MatrixXd omega_xbin;  // auxiliaries for binary animal-trait columns
  Eigen::MatrixXd omega_wbin;  // ... and plant-trait columns
  std::vector<double> trial_omega_f;  // per detection trial, animal side
  std::vector<double> trial_omega_p;
  Eigen::VectorXd det_omega_sum_f;  // per animal: sum of trial auxiliaries
  Eigen::VectorXd det_kappa_f;      // per animal: sum of (d - 1/2) over trials
  Eigen::VectorXd det_omega_sum_p;  // per plant
  Eigen::VectorXd det_kappa_p;
  long occ_proposals = 0;  // occurrence MH bookkeeping, cumulative
  long occ_accepts = 0;

  void init(int n_f, int n_p, int p_m, int p_p);
};

// ---------------------------------------------------------------------------
// Shared per-unit update routines. Both sampler backends call these with the
// same forked stream per unit, so their outputs are bit-identical; backends
// differ only in how they gather the counts and sums fed in, and in whether
// units fan out to worker threads.
// ---------------------------------------------------------------------------

// Conditional probability that a never-observed pair is a true link, given
// that it went unobserved in m exposing studies.
inline double link_probability(double eta_ij, double p_i, double q_j, int m) {
  const double pq = clamp_prob(p_i * q_j);
  return logistic(eta_ij + static_cast<double>(m) * std::log1p(-pq));
}

// One unobserved-pair link update; consumes exactly one uniform.
inline std::uint8_t draw_link(double r, RngStream& g) { return g.uniform01() < r ? 1 : 0; }

// Detection indicators for one exposed triple. An observation forces joint
// detection (no randomness); a non-observation picks one of the three
// admissible states. Afterwards one logistic auxiliary is drawn per side at
// the current detection logits.
struct TrialDraw {
  std::uint8_t d_f, d_p;
  double omega_f, omega_p;
};

inline TrialDraw draw_trial(int a, double p_i, double q_j, double z_f, double z_p,
                            RngStream& g) {
  TrialDraw out;
  if (a) {
    out.d_f = 1;
    out.d_p = 1;
  } else {
    const double w00 = (1.0 - p_i) * (1.0 - q_j);
    const double w10 = p_i * (1.0 - q_j);
    const double w01 = (1.0 - p_i) * q_j;
    const double u = g.uniform01() * (w00 + w10 + w01);
    if (u < w00) {
      out.d_f = 0;
      out.d_p = 0;
    } else if (u < w00 + w10) {
      out.d_f = 1;
      out.d_p = 0;
    } else {
      out.d_f = 0;
      out.d_p = 1;
    }
  }
  out.omega_f = sample_pg1(z_f, g);
  out.omega_p = sample_pg1(z_p, g);
  return out;
}

// Occurrence Gibbs draw for the plain sampler: the probability table is the
// fixed prior center, so P(O=1 | rest) = logistic(logit(pi) + loglik1) where
// loglik1 sums log(1 - p q) over currently exposed true links in the cell.
// Cells with center 0 or 1 are pinned and never reach this function.
inline std::uint8_t occurrence_draw_fixed(double pi, double loglik1, RngStream& g) {
  const double r = logistic(logit(pi) + loglik1);
  return g.uniform01() < r ? 1 : 0;
}

// One blocked proposal for the extended sampler: joint (pi*, O*) move with a
// normal step on pi (variance hp.mh_step) and an asymmetric flip on O,
// accepted against truncated-normal prior x Bernoulli(pi) x likelihood.
struct OccMhResult {
  double pi;
  std::uint8_t o;
  bool accepted;
};

inline OccMhResult occurrence_step_blocked(double center, double pi, std::uint8_t o,
                                           double loglik1, const Hyperparams& hp,
                                           RngStream& g) {
  OccMhResult out{pi, o, false};
  const double pi_star = pi + std::sqrt(hp.mh_step) * g.normal();
  if (!(pi_star > 0.0 && pi_star < 1.0)) return out;  // zero prior mass
  const double flip_to_one = o ? (1.0 - hp.p10) : hp.p01;
  const std::uint8_t o_star = g.uniform01() < flip_to_one ? 1 : 0;

  auto log_target = [&](double x, std::uint8_t occ) {
    const double d = (x - center) / hp.occ_prior_sd;
    const double prior = -0.5 * d * d;  // truncation constant cancels
    const double occ_term = occ ? std::log(x) : std::log1p(-x);
    return prior + occ_term + (occ ? loglik1 : 0.0);
  };
  auto log_flip = [&](std::uint8_t from, std::uint8_t to) {
    const double p1 = from ? (1.0 - hp.p10) : hp.p01;
    return to ? std::log(p1) : std::log1p(-p1);
  };

  const double log_alpha = log_target(pi_star, o_star) - log_target(pi, o) +
                           log_flip(o_star, o) - log_flip(o, o_star);
  if (std::log(g.uniform01()) < log_alpha) {
    out.pi = pi_star;
    out.o = o_star;
    out.accepted = true;
  }
  return out;
}

// Sample x ~ N(Q^{-1} b, Q^{-1}) via Cholesky; on factorization failure adds
// a 1e-8 ridge once, then raises. Consumes dim(Q) normal draws.
Eigen::VectorXd draw_mvn_from_precision(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b,
                                        RngStream& g);

// ---------------------------------------------------------------------------
// Conditional assembly (shared by both backends; exposed for oracle tests).
// ---------------------------------------------------------------------------

struct FactorConditional {
  Eigen::MatrixXd Q;
  Eigen::VectorXd b;
};

// Full conditional precision/shift for one latent factor column, combining
// the Gaussian-process prior with the logistic link likelihood, the trait
// regressions, and the detection trials of that side.
FactorConditional factor_conditional(Side side, int h, const LatentState& state,
                                     const SweepWorkspace& ws, const TraitTable& traits,
                                     const Eigen::MatrixXd& sigma_inv);

// Full conditional for one trait column's (intercept, loadings) given the
// current factors; continuous columns are Gaussian, binary columns use the
// logistic auxiliaries drawn at sweep start.
FactorConditional trait_conditional(Side side, int col, const LatentState& state,
                                    const SweepWorkspace& ws, const TraitTable& traits,
                                    double coef_prior_var);

// Full conditional for the detection coefficients of one side, from the
// per-species trial sums in the workspace.
FactorConditional detection_conditional(Side side, const LatentState& state,
                                        const SweepWorkspace& ws, double coef_prior_var);

// ---------------------------------------------------------------------------
// Sampler backends. The indexed backend walks per-study focal sets and fans
// conditionally independent units out to OpenMP threads; the reference
// backend re-derives every quantity from dense triple loops, serially. Both
// consume identical per-unit streams, so a chain run is bit-identical across
// backends and thread counts.
// ---------------------------------------------------------------------------

enum class BackendKind { indexed, reference };

class SamplerBackend {
 public:
  explicit SamplerBackend(const DataBundle& bundle) : bundle_(bundle) {}
  virtual ~SamplerBackend() = default;
  virtual const char* name() const = 0;

  // omega ~ PG(1, eta) for every pair; binary-trait auxiliaries.
  virtual void draw_link_aux(const RngStream& root, int iter, SweepWorkspace& ws) = 0;
  virtual void draw_trait_aux(const RngStream& root, int iter, const LatentState& state,
                              SweepWorkspace& ws) = 0;

  // m_link(i,j) = number of studies exposing the pair under current occurrence.
  virtual void count_link_exposure(const LatentState& state, SweepWorkspace& ws) = 0;

  // Link resampling for every pair (observed pairs pinned at 1, r = 1).
  virtual void update_links(const RngStream& root, int iter, LatentState& state,
                            SweepWorkspace& ws) = 0;

  // Rebuild the exposed-triple list in study-major order, draw detection
  // indicators and logistic auxiliaries for each, and reduce per-species sums.
  virtual void refresh_trials(const RngStream& root, int iter, StreamBlock block,
                              LatentState& state, SweepWorkspace& ws) = 0;

  // Occurrence pass: animal cells given plant occurrence, then plant cells
  // given the updated animal occurrence.
  virtual void update_occurrence(const RngStream& root, int iter, LatentState& state,
                                 SweepWorkspace& ws, Variant variant,
                                 const Hyperparams& hp) = 0;

  virtual double log_likelihood(const LatentState& state) const = 0;

 protected:
  const DataBundle& bundle_;
};

std::unique_ptr<SamplerBackend> make_backend(BackendKind kind, const DataBundle& bundle);

}  // namespace biplink
