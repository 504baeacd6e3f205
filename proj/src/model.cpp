#include "biplink/model.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace biplink {

const char* variant_name(Variant v) {
  return v == Variant::coil ? "coil" : "coilplus";
}

std::vector<double> Hyperparams::default_rho_grid() {
  std::vector<double> g;
  g.push_back(0.01);
  for (int k = 1; k <= 19; ++k) g.push_back(0.05 * k);
  g.push_back(0.99);
  return g;
}

Hyperparams::Hyperparams() : rho_grid(default_rho_grid()) {}

void Hyperparams::validate() const {
  if (H < 1) throw std::invalid_argument("latent dimension must be at least 1");
  if (mgp_a1 <= 0.0 || mgp_a2 <= 0.0) {
    throw std::invalid_argument("shrinkage shapes must be positive");
  }
  if (coef_prior_var <= 0.0) throw std::invalid_argument("coefficient prior variance must be positive");
  if (rho_grid.empty()) throw std::invalid_argument("rho grid must be non-empty");
  for (double r : rho_grid) {
    if (!(r > 0.0 && r < 1.0)) {
      throw std::invalid_argument("rho grid must lie strictly inside (0,1)");
    }
  }
  if (occ_prior_sd <= 0.0) throw std::invalid_argument("occurrence prior sd must be positive");
  if (mh_step <= 0.0) throw std::invalid_argument("occurrence proposal variance must be positive");
  if (!(p01 > 0.0 && p01 < 1.0) || !(p10 > 0.0 && p10 < 1.0)) {
    throw std::invalid_argument("switching probabilities must lie in (0,1)");
  }
  if (trait_var_shape <= 0.0 || trait_var_rate <= 0.0) {
    throw std::invalid_argument("trait variance prior parameters must be positive");
  }
  if (mgp_mh_step <= 0.0) throw std::invalid_argument("shrinkage step size must be positive");
}

void DetectionTrials::clear() {
  triples.clear();
  a.clear();
  d_f.clear();
  d_p.clear();
}

double interaction_logit(const LatentState& state, int i, int j) {
  double acc = state.lambda0;
  for (int h = 0; h < state.H(); ++h) {
    acc += state.lambda(h) * (state.U(i, h) * state.V(j, h));
  }
  return acc;
}

Eigen::MatrixXd interaction_logit_matrix(const LatentState& state) {
  Eigen::MatrixXd eta =
      Eigen::MatrixXd::Constant(state.n_animals(), state.n_plants(), state.lambda0);
  for (int h = 0; h < state.H(); ++h) {
    eta.noalias() += state.lambda(h) * (state.U.col(h) * state.V.col(h).transpose());
  }
  return eta;
}

Eigen::MatrixXd build_sigma(double rho, const Eigen::MatrixXd& C) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("phylogeny weight must lie strictly inside (0,1)");
  }
  Eigen::MatrixXd S = rho * C;
  S.diagonal().array() += 1.0 - rho;
  return S;
}

double observation_prob(int l, int f, int o, double p_i, double q_j) {
  if (l * f * o == 0) return 0.0;
  return p_i * q_j;
}

double log_likelihood(const LatentState& state, const ObservedTensor& A, const FocusTensor& F) {
  // Any observation on a cell the current state cannot produce is a hard zero.
  for (const Triple& t : A.entries()) {
    if (!F.at(t.animal, t.plant, t.study) || state.L(t.animal, t.plant) == 0 ||
        state.O_F(t.animal, t.study) == 0 || state.O_P(t.plant, t.study) == 0) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  double acc = 0.0;
  for (int s = 0; s < F.n_studies(); ++s) {
    for (int i = 0; i < F.n_animals(); ++i) {
      if (state.O_F(i, s) == 0) continue;
      double row = 0.0;
      for (int j = 0; j < F.n_plants(); ++j) {
        if (state.L(i, j) == 0 || state.O_P(j, s) == 0 || !F.at(i, j, s)) continue;
        const double pq = clamp_prob(state.p(i) * state.q(j));
        row += A.contains(i, j, s) ? std::log(pq) : std::log1p(-pq);
      }
      acc += row;
    }
  }
  return acc;
}

Eigen::VectorXd trait_predictor(const LatentState& state, Side side, int col) {
  if (side == Side::animal) {
    return Eigen::VectorXd::Constant(state.n_animals(), state.beta0(col)) +
           state.U * state.beta.row(col).transpose();
  }
  return Eigen::VectorXd::Constant(state.n_plants(), state.gamma0(col)) +
         state.V * state.gamma.row(col).transpose();
}

double detection_logit(const LatentState& state, Side side, int index) {
  if (side == Side::animal) return state.delta0 + state.U.row(index).dot(state.delta);
  return state.zeta0 + state.V.row(index).dot(state.zeta);
}

GpCache build_gp_cache(const Eigen::MatrixXd& C, const std::vector<double>& grid) {
  GpCache cache;
  cache.grid = grid;
  cache.sigma_inv.reserve(grid.size());
  cache.logdet.reserve(grid.size());
  const int n = static_cast<int>(C.rows());
  for (double rho : grid) {
    const Eigen::MatrixXd S = build_sigma(rho, C);
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("phylogeny covariance is not positive definite on the grid");
    }
    cache.sigma_inv.push_back(llt.solve(Eigen::MatrixXd::Identity(n, n)));
    double ld = 0.0;
    for (int k = 0; k < n; ++k) ld += 2.0 * std::log(llt.matrixLLT()(k, k));
    cache.logdet.push_back(ld);
  }
  return cache;
}

}  // namespace biplink
