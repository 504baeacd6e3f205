#include <cmath>
#include <stdexcept>
#include <string>

#include "biplink/model.hpp"
#include "biplink/streams.hpp"

namespace biplink {

namespace {

double clamp_open(double x, double eps) {
  if (x < eps) return eps;
  if (x > 1.0 - eps) return 1.0 - eps;
  return x;
}

}  // namespace

LatentState init_state(const DataBundle& bundle, const Hyperparams& hp, Variant variant,
                       std::uint64_t seed, int chain_index) {
  hp.validate();
  const int nF = bundle.species.n_animals();
  const int nP = bundle.species.n_plants();
  const int nS = bundle.A.n_studies();
  const int H = hp.H;
  RngStream root(seed, static_cast<std::uint64_t>(chain_index));

  LatentState st;
  st.U.resize(nF, H);
  st.V.resize(nP, H);
  for (int h = 0; h < H; ++h) {
    RngStream g = root.fork(0, kInitFactors, static_cast<std::uint64_t>(h));
    for (int i = 0; i < nF; ++i) st.U(i, h) = 0.1 * g.normal();
  }
  for (int h = 0; h < H; ++h) {
    RngStream g = root.fork(0, kInitFactors, static_cast<std::uint64_t>(H + h));
    for (int j = 0; j < nP; ++j) st.V(j, h) = 0.1 * g.normal();
  }

  // Baseline score at the logit of the observed pair density.
  const double density =
      static_cast<double>(bundle.A.observed_pairs().size()) / (static_cast<double>(nF) * nP);
  st.lambda0 = logit(clamp_open(density, 1e-6));

  // Shrinkage increments start at their prior means, so the weights decay.
  st.mgp_deltas.resize(H);
  st.lambda.resize(H);
  double prod = 1.0;
  for (int h = 0; h < H; ++h) {
    st.mgp_deltas(h) = h == 0 ? hp.mgp_a1 : hp.mgp_a2;
    prod *= st.mgp_deltas(h);
    st.lambda(h) = 1.0 / prod;
  }

  st.rho_U = 0.5;
  st.rho_V = 0.5;

  const int pM = bundle.traits.p_animal();
  const int pP = bundle.traits.p_plant();
  st.beta0 = Eigen::VectorXd::Zero(pM);
  st.beta = Eigen::MatrixXd::Zero(pM, H);
  st.gamma0 = Eigen::VectorXd::Zero(pP);
  st.gamma = Eigen::MatrixXd::Zero(pP, H);
  st.trait_vars_animal = Eigen::VectorXd::Ones(pM);
  st.trait_vars_plant = Eigen::VectorXd::Ones(pP);

  st.delta0 = 0.0;
  st.delta = Eigen::VectorXd::Zero(H);
  st.zeta0 = 0.0;
  st.zeta = Eigen::VectorXd::Zero(H);
  st.p = Eigen::VectorXd::Constant(nF, 0.5);
  st.q = Eigen::VectorXd::Constant(nP, 0.5);

  // Links: observation-implied ones plus sparse noise.
  st.L = BinMatrix::Zero(nF, nP);
  for (int i = 0; i < nF; ++i) {
    for (int j = 0; j < nP; ++j) {
      if (bundle.A.pair_observed(i, j)) {
        st.L(i, j) = 1;
      } else {
        RngStream g = root.fork(0, kInitLinks, static_cast<std::uint64_t>(i) * nP + j);
        st.L(i, j) = g.bernoulli(0.05) ? 1 : 0;
      }
    }
  }

  // Occurrence: pinned 1 where observed; elsewhere the prior center decides.
  // The probability table is the prior center itself (the coil sampler keeps
  // it fixed), clamped into the open interval when it is itself sampled.
  st.O_F = BinMatrix::Zero(nF, nS);
  st.O_P = BinMatrix::Zero(nP, nS);
  st.pi_F.resize(nF, nS);
  st.pi_P.resize(nP, nS);
  const bool plus = variant == Variant::coil_plus;
  for (int i = 0; i < nF; ++i) {
    for (int s = 0; s < nS; ++s) {
      const double center = bundle.occ_prior.P_OF(i, s);
      st.pi_F(i, s) = plus ? clamp_open(center, 1e-3) : center;
      if (bundle.A.animal_observed_in(i, s)) {
        st.O_F(i, s) = 1;
      } else {
        RngStream g = root.fork(0, kInitOccAnimal, static_cast<std::uint64_t>(i) * nS + s);
        st.O_F(i, s) = g.bernoulli(st.pi_F(i, s)) ? 1 : 0;
      }
    }
  }
  for (int j = 0; j < nP; ++j) {
    for (int s = 0; s < nS; ++s) {
      const double center = bundle.occ_prior.P_OP(j, s);
      st.pi_P(j, s) = plus ? clamp_open(center, 1e-3) : center;
      if (bundle.A.plant_observed_in(j, s)) {
        st.O_P(j, s) = 1;
      } else {
        RngStream g = root.fork(0, kInitOccPlant, static_cast<std::uint64_t>(j) * nS + s);
        st.O_P(j, s) = g.bernoulli(st.pi_P(j, s)) ? 1 : 0;
      }
    }
  }

  return st;
}

void check_state_invariants(const LatentState& state, const ObservedTensor& A,
                            const FocusTensor& F, Variant variant) {
  auto fail = [](const std::string& what) { throw std::logic_error("state invariant: " + what); };

  for (int h = 0; h < state.H(); ++h) {
    if (!(state.lambda(h) > 0.0)) fail("interaction weights must stay positive");
    if (!(state.mgp_deltas(h) > 0.0)) fail("shrinkage increments must stay positive");
  }
  if (!(state.rho_U > 0.0 && state.rho_U < 1.0) || !(state.rho_V > 0.0 && state.rho_V < 1.0)) {
    fail("phylogeny weights must lie in (0,1)");
  }
  for (int i = 0; i < state.n_animals(); ++i) {
    if (!(state.p(i) > 0.0 && state.p(i) < 1.0)) fail("animal detection probability out of (0,1)");
  }
  for (int j = 0; j < state.n_plants(); ++j) {
    if (!(state.q(j) > 0.0 && state.q(j) < 1.0)) fail("plant detection probability out of (0,1)");
  }
  for (const Triple& t : A.entries()) {
    if (state.L(t.animal, t.plant) != 1) fail("observed pair requires a true link");
    if (state.O_F(t.animal, t.study) != 1 || state.O_P(t.plant, t.study) != 1) {
      fail("observed interaction requires occurrence on both sides");
    }
    if (!F.at(t.animal, t.plant, t.study)) fail("observed interaction outside the design");
  }
  if (variant == Variant::coil_plus) {
    for (int s = 0; s < state.n_studies(); ++s) {
      for (int i = 0; i < state.n_animals(); ++i) {
        if (!(state.pi_F(i, s) > 0.0 && state.pi_F(i, s) < 1.0)) {
          fail("occurrence probabilities must lie in (0,1)");
        }
      }
      for (int j = 0; j < state.n_plants(); ++j) {
        if (!(state.pi_P(j, s) > 0.0 && state.pi_P(j, s) < 1.0)) {
          fail("occurrence probabilities must lie in (0,1)");
        }
      }
    }
  }
  // Trials are rebuilt from the exposure pattern mid-sweep and the occurrence
  // step may flip cells afterwards, so the list is only checked for internal
  // consistency, not against the current L and O.
  for (std::size_t t = 0; t < state.trials.size(); ++t) {
    if (state.trials.a[t]) {
      if (!state.trials.d_f[t] || !state.trials.d_p[t]) {
        fail("observation requires joint detection");
      }
    } else if (state.trials.d_f[t] && state.trials.d_p[t]) {
      fail("joint detection without observation");
    }
  }
}

}  // namespace biplink
