#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biplink/checkpoint.hpp"
#include "biplink/focus.hpp"
#include "biplink/gibbs.hpp"
#include "biplink/kernels.hpp"
#include "biplink/model.hpp"
#include "biplink/pg.hpp"
#include "biplink/truncnorm.hpp"
#include "biplink/types.hpp"
#include "testutil.hpp"

using namespace biplink;

namespace {

LatentState frozen_state(int nF, int nP, int nS, int H, int pM = 0, int pP = 0) {
  LatentState st;
  st.U = Eigen::MatrixXd::Zero(nF, H);
  st.V = Eigen::MatrixXd::Zero(nP, H);
  st.lambda0 = 0.0;
  st.lambda = Eigen::VectorXd::Ones(H);
  st.mgp_deltas = Eigen::VectorXd::Ones(H);
  st.beta0 = Eigen::VectorXd::Zero(pM);
  st.beta = Eigen::MatrixXd::Zero(pM, H);
  st.gamma0 = Eigen::VectorXd::Zero(pP);
  st.gamma = Eigen::MatrixXd::Zero(pP, H);
  st.trait_vars_animal = Eigen::VectorXd::Ones(pM);
  st.trait_vars_plant = Eigen::VectorXd::Ones(pP);
  st.delta = Eigen::VectorXd::Zero(H);
  st.zeta = Eigen::VectorXd::Zero(H);
  st.p = Eigen::VectorXd::Constant(nF, 0.5);
  st.q = Eigen::VectorXd::Constant(nP, 0.5);
  st.L = BinMatrix::Ones(nF, nP);
  st.O_F = BinMatrix::Ones(nF, nS);
  st.O_P = BinMatrix::Ones(nP, nS);
  st.pi_F = Eigen::MatrixXd::Constant(nF, nS, 0.5);
  st.pi_P = Eigen::MatrixXd::Constant(nP, nS, 0.5);
  return st;
}

// Deterministic, unstructured matrix fill in [-scale, scale].
Eigen::MatrixXd wiggle(int rows, int cols, double scale, double phase) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * std::sin(phase + 1.3 * i + 2.1 * j);
  }
  return m;
}

// Four animals x four plants x one study of each kind, traits on both sides,
// clustered animal phylogeny. Every species is observed somewhere.
DataBundle demo_bundle() {
  DataBundle b;
  for (const char* n : {"a0", "a1", "a2", "a3"}) b.species.intern_animal(n);
  for (const char* n : {"p0", "p1", "p2", "p3"}) b.species.intern_plant(n);
  b.A = ObservedTensor(4, 4, 4,
                       {{0, 0, 0}, {1, 1, 0}, {0, 1, 1}, {2, 2, 1},
                        {1, 3, 2}, {3, 3, 2}, {2, 1, 3}, {3, 0, 3}});
  b.studies = {
      {"s0", StudyKind::network, "x1", "BR", "neotropic"},
      {"s1", StudyKind::zoocentric, "x2", "BR", "neotropic"},
      {"s2", StudyKind::phytocentric, "y1", "CO", "neotropic"},
      {"s3", StudyKind::pair, "z1", "KE", "afrotropic"},
  };
  b.F = derive_focus(b.A, b.studies, nullptr);
  b.traits.X.resize(4, 2);
  b.traits.X << -1.2, 0.0, -0.4, 1.0, 0.4, 1.0, 1.2, 0.0;
  b.traits.x_kinds = {TraitKind::continuous, TraitKind::binary};
  b.traits.x_names = {"body_mass", "nocturnal"};
  b.traits.W.resize(4, 2);
  b.traits.W << -0.9, 1.0, -0.3, 0.0, 0.3, 0.0, 0.9, 1.0;
  b.traits.w_kinds = {TraitKind::continuous, TraitKind::binary};
  b.traits.w_names = {"fruit_diameter", "fleshy"};
  Eigen::MatrixXd CA = Eigen::MatrixXd::Identity(4, 4);
  CA(0, 1) = CA(1, 0) = 0.5;
  CA(2, 3) = CA(3, 2) = 0.5;
  b.phylo.C_animal = CA;
  b.phylo.C_plant = Eigen::MatrixXd::Identity(4, 4);
  b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::expert());
  return b;
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("link probability collapses exposure into the interaction prior") {
  // no exposing study: the conditional is the interaction prior itself
  CHECK(link_probability(0.3, 0.5, 0.5, 0) == doctest::Approx(logistic(0.3)).epsilon(1e-12));
  // one exposing study with joint detection 1/2 at an even prior gives 1/3
  const double r = link_probability(0.0, std::sqrt(0.5), std::sqrt(0.5), 1);
  CHECK(r == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // each additional silent study makes a true link less plausible
  double prev = 1.0;
  for (int m = 0; m <= 5; ++m) {
    const double cur = link_probability(0.4, 0.7, 0.6, m);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("factor conditional matches an explicit design-matrix assembly") {
  const int nF = 3, nP = 2, H = 2, pM = 2, pP = 1;
  LatentState st = frozen_state(nF, nP, 1, H, pM, pP);
  st.U = wiggle(nF, H, 0.8, 0.2);
  st.V = wiggle(nP, H, 0.7, 1.1);
  st.lambda0 = 0.3;
  st.lambda << 1.2, 0.7;
  st.beta0 << 0.1, -0.2;
  st.beta = wiggle(pM, H, 0.5, 2.3);
  st.trait_vars_animal << 0.8, 1.0;
  st.gamma0 << 0.4;
  st.gamma = wiggle(pP, H, 0.3, 0.8);
  st.trait_vars_plant << 1.4;
  st.delta0 = -0.3;
  st.delta << 0.4, -0.6;
  st.zeta0 = 0.1;
  st.zeta << -0.2, 0.5;
  st.L << 1, 0, 0, 1, 1, 1;

  TraitTable traits;
  traits.X.resize(nF, pM);
  traits.X << 0.6, 1.0, -0.2, 0.0, -0.4, 1.0;
  traits.x_kinds = {TraitKind::continuous, TraitKind::binary};
  traits.x_names = {"t0", "t1"};
  traits.W.resize(nP, pP);
  traits.W << 0.9, -0.5;
  traits.w_kinds = {TraitKind::continuous};
  traits.w_names = {"w0"};

  SweepWorkspace ws;
  ws.init(nF, nP, pM, pP);
  ws.eta = interaction_logit_matrix(st);
  ws.omega_link = (wiggle(nF, nP, 0.2, 0.5).array() + 0.4).matrix();
  ws.omega_xbin = (wiggle(nF, pM, 0.1, 1.7).array() + 0.3).matrix();
  ws.det_omega_sum_f << 0.7, 0.0, 1.3;
  ws.det_kappa_f << 0.5, 0.0, -1.0;
  ws.det_omega_sum_p << 0.6, 1.1;
  ws.det_kappa_p << -0.5, 1.0;

  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(nF, nF);
  C(0, 1) = C(1, 0) = 0.6;
  C(1, 2) = C(2, 1) = 0.3;
  const Eigen::MatrixXd sig_inv_f = build_sigma(0.85, C).inverse();
  const Eigen::MatrixXd sig_inv_p = Eigen::MatrixXd::Identity(nP, nP) * 1.25;

  for (int h = 0; h < H; ++h) {
    // --- animal side ---
    {
      const FactorConditional fc = factor_conditional(Side::animal, h, st, ws, traits, sig_inv_f);
      Eigen::MatrixXd Q = sig_inv_f;
      Eigen::VectorXd bb = Eigen::VectorXd::Zero(nF);
      // link rows, one per pair, as a stacked weighted regression on U.col(h)
      {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nF * nP, nF);
        Eigen::VectorXd om(nF * nP), resid(nF * nP);
        int r = 0;
        for (int i = 0; i < nF; ++i) {
          for (int j = 0; j < nP; ++j, ++r) {
            D(r, i) = st.lambda(h) * st.V(j, h);
            om(r) = ws.omega_link(i, j);
            const double off = ws.eta(i, j) - D(r, i) * st.U(i, h);
            resid(r) = ((st.L(i, j) ? 1.0 : 0.0) - 0.5) - om(r) * off;
          }
        }
        Q += D.transpose() * om.asDiagonal() * D;
        bb += D.transpose() * resid;
      }
      // trait rows
      for (int l = 0; l < pM; ++l) {
        const double c = st.beta(l, h);
        const Eigen::VectorXd off =
            trait_predictor(st, Side::animal, l) - c * st.U.col(h);
        if (traits.x_kinds[l] == TraitKind::continuous) {
          const double w = 1.0 / st.trait_vars_animal(l);
          Q.diagonal().array() += w * c * c;
          bb += c * w * (traits.X.col(l) - off);
        } else {
          const Eigen::VectorXd om = ws.omega_xbin.col(l);
          Q.diagonal() += c * c * om;
          bb += c * ((traits.X.col(l).array() - 0.5).matrix() -
                     (om.array() * off.array()).matrix());
        }
      }
      // collapsed detection rows, one per animal
      {
        const double c = st.delta(h);
        Eigen::VectorXd z(nF);
        for (int i = 0; i < nF; ++i) z(i) = detection_logit(st, Side::animal, i);
        const Eigen::VectorXd off = z - c * st.U.col(h);
        Q.diagonal() += c * c * ws.det_omega_sum_f;
        bb += c * (ws.det_kappa_f - (ws.det_omega_sum_f.array() * off.array()).matrix());
      }
      CHECK((fc.Q - Q).norm() < 1e-10);
      CHECK((fc.b - bb).norm() < 1e-10);
    }
    // --- plant side ---
    {
      const FactorConditional fc = factor_conditional(Side::plant, h, st, ws, traits, sig_inv_p);
      Eigen::MatrixXd Q = sig_inv_p;
      Eigen::VectorXd bb = Eigen::VectorXd::Zero(nP);
      {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nF * nP, nP);
        Eigen::VectorXd om(nF * nP), resid(nF * nP);
        int r = 0;
        for (int i = 0; i < nF; ++i) {
          for (int j = 0; j < nP; ++j, ++r) {
            D(r, j) = st.lambda(h) * st.U(i, h);
            om(r) = ws.omega_link(i, j);
            const double off = ws.eta(i, j) - D(r, j) * st.V(j, h);
            resid(r) = ((st.L(i, j) ? 1.0 : 0.0) - 0.5) - om(r) * off;
          }
        }
        Q += D.transpose() * om.asDiagonal() * D;
        bb += D.transpose() * resid;
      }
      for (int l = 0; l < pP; ++l) {
        const double c = st.gamma(l, h);
        const Eigen::VectorXd off = trait_predictor(st, Side::plant, l) - c * st.V.col(h);
        const double w = 1.0 / st.trait_vars_plant(l);
        Q.diagonal().array() += w * c * c;
        bb += c * w * (traits.W.col(l) - off);
      }
      {
        const double c = st.zeta(h);
        Eigen::VectorXd z(nP);
        for (int j = 0; j < nP; ++j) z(j) = detection_logit(st, Side::plant, j);
        const Eigen::VectorXd off = z - c * st.V.col(h);
        Q.diagonal() += c * c * ws.det_omega_sum_p;
        bb += c * (ws.det_kappa_p - (ws.det_omega_sum_p.array() * off.array()).matrix());
      }
      CHECK((fc.Q - Q).norm() < 1e-10);
      CHECK((fc.b - bb).norm() < 1e-10);
    }
  }
}

TEST_CASE("factor draws revert to the phylogeny-blended prior when weights vanish") {
  const int nF = 3, nP = 2, H = 1;
  LatentState st = frozen_state(nF, nP, 1, H);
  st.lambda.setZero();
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(nF, nF);
  C(0, 1) = C(1, 0) = 0.6;
  C(0, 2) = C(2, 0) = 0.6;
  C(1, 2) = C(2, 1) = 0.6;
  const Eigen::MatrixXd Sigma = build_sigma(0.9, C);
  const Eigen::MatrixXd sigma_inv = Sigma.inverse();

  SweepWorkspace ws;
  ws.init(nF, nP, 0, 0);
  ws.omega_link.setConstant(0.8);  // weights are zero, so these must not matter
  ws.eta = interaction_logit_matrix(st);

  RngStream root(2026, 0);
  TraitTable no_traits;
  const int n = 20000;
  Eigen::MatrixXd draws(n, nF);
  for (int rep = 1; rep <= n; ++rep) {
    update_factor_side(Side::animal, rep, root, st, ws, no_traits, sigma_inv);
    draws.row(rep - 1) = st.U.col(0).transpose();
  }
  const Eigen::RowVectorXd m = draws.colwise().mean();
  for (int k = 0; k < nF; ++k) CHECK(std::abs(m(k)) < 0.03);
  const Eigen::MatrixXd centered = draws.rowwise() - m;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  for (int k = 0; k < nF; ++k) {
    for (int l = 0; l < nF; ++l) CHECK(std::abs(cov(k, l) - Sigma(k, l)) < 0.05);
  }
}

TEST_CASE("interaction intercept draw is the conjugate normal") {
  const int nF = 2, nP = 2, H = 1;
  LatentState st = frozen_state(nF, nP, 1, H);
  st.U = wiggle(nF, H, 0.9, 0.4);
  st.V = wiggle(nP, H, 0.8, 1.9);
  st.lambda << 1.5;
  st.lambda0 = 0.2;
  st.L << 1, 0, 1, 1;
  SweepWorkspace ws;
  ws.init(nF, nP, 0, 0);
  ws.eta = interaction_logit_matrix(st);
  ws.omega_link << 0.3, 0.7, 0.5, 0.2;

  const double v = 4.0;
  double prec = 1.0 / v, num = 0.0;
  for (int i = 0; i < nF; ++i) {
    for (int j = 0; j < nP; ++j) {
      const double om = ws.omega_link(i, j);
      const double bilinear = ws.eta(i, j) - st.lambda0;  // invariant across draws
      prec += om;
      num += ((st.L(i, j) ? 1.0 : 0.0) - 0.5) - om * bilinear;
    }
  }
  const double want_mean = num / prec;
  const double want_var = 1.0 / prec;

  RngStream root(7, 0);
  std::vector<double> xs;
  xs.reserve(30000);
  for (int rep = 1; rep <= 30000; ++rep) {
    update_intercept(rep, root, st, ws, v);
    xs.push_back(st.lambda0);
  }
  CHECK(std::abs(testutil::mean(xs) - want_mean) <
        4.5 * std::sqrt(want_var / static_cast<double>(xs.size())));
  const double s = testutil::sd(xs);
  CHECK(s * s == doctest::Approx(want_var).epsilon(0.06));
}

TEST_CASE("shrinkage increments revert to their gamma priors without signal") {
  const int H = 2;
  LatentState st = frozen_state(2, 2, 1, H);  // U = V = 0: the likelihood is flat
  Hyperparams hp;
  hp.H = H;
  st.mgp_deltas << 2.0, 3.0;
  st.lambda << 0.5, 1.0 / 6.0;
  SweepWorkspace ws;
  ws.init(2, 2, 0, 0);
  ws.eta = interaction_logit_matrix(st);

  RngStream root(99, 0);
  const int n_it = 60000, thin = 25;
  std::vector<double> d1, d2;
  for (int it = 1; it <= n_it; ++it) {
    update_shrinkage(it, root, st, ws, hp);
    if (it % thin == 0) {
      d1.push_back(st.mgp_deltas(0));
      d2.push_back(st.mgp_deltas(1));
    }
  }
  CHECK(std::abs(testutil::mean(d1) - 2.0) < 0.15);
  CHECK(std::abs(testutil::mean(d2) - 3.0) < 0.20);
  // closed-form gamma CDFs with integer shape
  auto cdf_g2 = [](double x) { return 1.0 - std::exp(-x) * (1.0 + x); };
  auto cdf_g3 = [](double x) { return 1.0 - std::exp(-x) * (1.0 + x + 0.5 * x * x); };
  CHECK(testutil::ks1_pvalue(d1, cdf_g2) > 1e-3);
  CHECK(testutil::ks1_pvalue(d2, cdf_g3) > 1e-3);
  // the weights stay the reciprocal running products of the increments
  CHECK(st.lambda(0) == doctest::Approx(1.0 / st.mgp_deltas(0)).epsilon(1e-12));
  CHECK(st.lambda(1) ==
        doctest::Approx(1.0 / (st.mgp_deltas(0) * st.mgp_deltas(1))).epsilon(1e-12));
}

TEST_CASE("phylogeny weight draw is uniform when the phylogeny is uninformative") {
  const int nF = 4, H = 2;
  LatentState st = frozen_state(nF, 3, 1, H);
  st.U = wiggle(nF, H, 1.0, 0.7);
  Hyperparams hp;
  const GpCache cache = build_gp_cache(Eigen::MatrixXd::Identity(nF, nF), hp.rho_grid);
  RngStream root(5, 0);
  const int n = 42000;
  std::vector<int> counts(hp.rho_grid.size(), 0);
  for (int it = 1; it <= n; ++it) {
    const int idx = update_rho_side(Side::animal, it, root, st, cache);
    REQUIRE(idx >= 0);
    REQUIRE(idx < static_cast<int>(hp.rho_grid.size()));
    ++counts[idx];
  }
  // the written weight is always a grid value
  bool on_grid = false;
  for (double g : hp.rho_grid) on_grid = on_grid || st.rho_U == g;
  CHECK(on_grid);
  const double want = 1.0 / static_cast<double>(hp.rho_grid.size());
  for (std::size_t g = 0; g < counts.size(); ++g) {
    CHECK(std::abs(counts[g] / static_cast<double>(n) - want) < 0.01);
  }
}

TEST_CASE("phylogeny weight concentrates near the generating blend") {
  const int n = 60, H = 8;
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
  for (int blk = 0; blk < 6; ++blk) {
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        if (i != j) C(10 * blk + i, 10 * blk + j) = 0.7;
      }
    }
  }
  const double rho_true = 0.9;
  const Eigen::MatrixXd Sigma = build_sigma(rho_true, C);
  const Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  REQUIRE(llt.info() == Eigen::Success);

  RngStream gen(123, 9);
  LatentState st = frozen_state(n, 2, 1, H);
  for (int h = 0; h < H; ++h) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = gen.normal();
    st.U.col(h) = llt.matrixL() * z;
  }
  Hyperparams hp;
  const GpCache cache = build_gp_cache(C, hp.rho_grid);
  RngStream root(321, 0);
  std::vector<int> counts(hp.rho_grid.size(), 0);
  for (int it = 1; it <= 200; ++it) {
    ++counts[update_rho_side(Side::animal, it, root, st, cache)];
    CHECK(st.rho_U > 0.0);
    CHECK(st.rho_U < 1.0);
  }
  int mode = 0;
  for (std::size_t g = 1; g < counts.size(); ++g) {
    if (counts[g] > counts[mode]) mode = static_cast<int>(g);
  }
  CHECK(std::abs(hp.rho_grid[mode] - rho_true) <= 0.1);
}

TEST_CASE("trait-column conditional matches an explicit design-matrix assembly") {
  const int nF = 4, H = 2, pM = 2;
  LatentState st = frozen_state(nF, 3, 1, H, pM, 0);
  st.U = wiggle(nF, H, 0.9, 0.3);
  st.beta0 << 0.2, -0.1;
  st.beta = wiggle(pM, H, 0.6, 1.2);
  st.trait_vars_animal << 0.7, 1.0;
  TraitTable traits;
  traits.X.resize(nF, pM);
  traits.X << 0.8, 1.0, -0.5, 0.0, 0.1, 0.0, -0.4, 1.0;
  traits.x_kinds = {TraitKind::continuous, TraitKind::binary};
  traits.x_names = {"c", "b"};
  SweepWorkspace ws;
  ws.init(nF, 3, pM, 0);
  ws.omega_xbin = (wiggle(nF, pM, 0.15, 0.9).array() + 0.35).matrix();
  const double v = 4.0;

  Eigen::MatrixXd Xd(nF, H + 1);
  Xd.col(0).setOnes();
  Xd.rightCols(H) = st.U;
  const Eigen::MatrixXd prior = Eigen::MatrixXd::Identity(H + 1, H + 1) / v;
  {
    const FactorConditional fc = trait_conditional(Side::animal, 0, st, ws, traits, v);
    const Eigen::MatrixXd Q =
        prior + Xd.transpose() * Xd / st.trait_vars_animal(0);
    const Eigen::VectorXd bb = Xd.transpose() * traits.X.col(0) / st.trait_vars_animal(0);
    CHECK((fc.Q - Q).norm() < 1e-10);
    CHECK((fc.b - bb).norm() < 1e-10);
  }
  {
    const FactorConditional fc = trait_conditional(Side::animal, 1, st, ws, traits, v);
    const Eigen::VectorXd om = ws.omega_xbin.col(1);
    const Eigen::MatrixXd Q = prior + Xd.transpose() * om.asDiagonal() * Xd;
    const Eigen::VectorXd bb =
        Xd.transpose() * (traits.X.col(1).array() - 0.5).matrix();
    CHECK((fc.Q - Q).norm() < 1e-10);
    CHECK((fc.b - bb).norm() < 1e-10);
  }
}

TEST_CASE("trait updates recover a noiseless regression and keep binary variances pinned") {
  const int nF = 40, H = 2, pM = 2;
  LatentState st = frozen_state(nF, 2, 1, H, pM, 0);
  st.U = wiggle(nF, H, 1.0, 0.45);
  Eigen::VectorXd beta_true(H + 1);
  beta_true << 0.5, 1.0, -0.7;
  Eigen::MatrixXd Xd(nF, H + 1);
  Xd.col(0).setOnes();
  Xd.rightCols(H) = st.U;

  TraitTable traits;
  traits.X.resize(nF, pM);
  traits.X.col(0) = Xd * beta_true;  // exact linear response
  for (int i = 0; i < nF; ++i) traits.X(i, 1) = st.U(i, 1) > 0.0 ? 1.0 : 0.0;
  traits.x_kinds = {TraitKind::continuous, TraitKind::binary};
  traits.x_names = {"c", "b"};

  Hyperparams hp;
  hp.H = H;
  SweepWorkspace ws;
  ws.init(nF, 2, pM, 0);
  RngStream root(17, 0);
  std::vector<double> b0s, b1s, b2s, svars, sep;
  for (int it = 1; it <= 600; ++it) {
    // refresh the binary column's logistic auxiliaries at the current predictor
    const Eigen::VectorXd zb = trait_predictor(st, Side::animal, 1);
    for (int i = 0; i < nF; ++i) {
      RngStream g = root.fork(it, StreamBlock::kOmegaTraitX, i * pM + 1);
      ws.omega_xbin(i, 1) = sample_pg1(zb(i), g);
    }
    update_trait_side(Side::animal, it, root, st, ws, traits, hp);
    if (it > 300) {
      b0s.push_back(st.beta0(0));
      b1s.push_back(st.beta(0, 0));
      b2s.push_back(st.beta(0, 1));
      svars.push_back(st.trait_vars_animal(0));
      sep.push_back(st.beta(1, 1));
    }
  }
  CHECK(std::abs(testutil::mean(b0s) - beta_true(0)) < 0.1);
  CHECK(std::abs(testutil::mean(b1s) - beta_true(1)) < 0.1);
  CHECK(std::abs(testutil::mean(b2s) - beta_true(2)) < 0.1);
  CHECK(testutil::mean(svars) < 0.15);  // residual variance collapses on a perfect fit
  // the binary column separates on the second factor, so its loading is
  // confidently positive
  CHECK(testutil::mean(sep) > 0.8);
  CHECK(st.trait_vars_animal(1) == 1.0);
}

TEST_CASE("detection trial draw matches the three-state enumeration") {
  const double p = 0.37, q = 0.81;
  RngStream root(31, 0);
  const int n = 200000;
  int c00 = 0, c10 = 0, c01 = 0, c11 = 0;
  for (int rep = 1; rep <= n; ++rep) {
    RngStream g = root.fork(rep, StreamBlock::kTrialAux, 0);
    const TrialDraw t = draw_trial(0, p, q, 0.2, -0.3, g);
    if (t.d_f && t.d_p) {
      ++c11;
    } else if (t.d_f) {
      ++c10;
    } else if (t.d_p) {
      ++c01;
    } else {
      ++c00;
    }
  }
  CHECK(c11 == 0);  // joint detection of a non-observation is impossible
  const double wt = (1.0 - p) * (1.0 - q) + p * (1.0 - q) + (1.0 - p) * q;
  CHECK(std::abs(c00 / static_cast<double>(n) - (1.0 - p) * (1.0 - q) / wt) < 0.005);
  CHECK(std::abs(c10 / static_cast<double>(n) - p * (1.0 - q) / wt) < 0.005);
  CHECK(std::abs(c01 / static_cast<double>(n) - (1.0 - p) * q / wt) < 0.005);
  // the animal-side rate equals the collapsed form p(1-q)/(1-pq)
  CHECK(std::abs(c10 / static_cast<double>(n) - p * (1.0 - q) / (1.0 - p * q)) < 0.005);

  // an observation forces joint detection and still draws both auxiliaries
  RngStream g = root.fork(0, StreamBlock::kTrialAux, 1);
  const TrialDraw t = draw_trial(1, p, q, 0.0, 0.0, g);
  CHECK(t.d_f == 1);
  CHECK(t.d_p == 1);
  CHECK(t.omega_f > 0.0);
  CHECK(t.omega_p > 0.0);

  // symmetric detection probabilities make the three states equally likely
  int e00 = 0, e10 = 0, e01 = 0;
  const int n2 = 90000;
  for (int rep = 1; rep <= n2; ++rep) {
    RngStream g2 = root.fork(rep, StreamBlock::kDetRedraw, 0);
    const TrialDraw t2 = draw_trial(0, 0.5, 0.5, 0.0, 0.0, g2);
    if (t2.d_f) {
      ++e10;
    } else if (t2.d_p) {
      ++e01;
    } else {
      ++e00;
    }
  }
  CHECK(std::abs(e00 / static_cast<double>(n2) - 1.0 / 3.0) < 0.007);
  CHECK(std::abs(e10 / static_cast<double>(n2) - 1.0 / 3.0) < 0.007);
  CHECK(std::abs(e01 / static_cast<double>(n2) - 1.0 / 3.0) < 0.007);
}

TEST_CASE("detection coefficient conditional and probability refresh are consistent") {
  const int nF = 3, nP = 2, H = 2;
  LatentState st = frozen_state(nF, nP, 1, H);
  st.U = wiggle(nF, H, 0.8, 0.6);
  st.V = wiggle(nP, H, 0.9, 1.4);
  st.delta0 = 0.2;
  st.delta << 0.5, -0.4;
  st.zeta0 = -0.1;
  st.zeta << 0.3, 0.6;
  SweepWorkspace ws;
  ws.init(nF, nP, 0, 0);
  ws.det_omega_sum_f << 1.2, 0.4, 2.0;
  ws.det_kappa_f << 0.5, -0.5, 1.5;
  ws.det_omega_sum_p << 0.9, 1.4;
  ws.det_kappa_p << -1.0, 2.0;
  const double v = 4.0;

  {
    const FactorConditional fc = detection_conditional(Side::animal, st, ws, v);
    Eigen::MatrixXd Xd(nF, H + 1);
    Xd.col(0).setOnes();
    Xd.rightCols(H) = st.U;
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(H + 1, H + 1) / v +
                              Xd.transpose() * ws.det_omega_sum_f.asDiagonal() * Xd;
    const Eigen::VectorXd bb = Xd.transpose() * ws.det_kappa_f;
    CHECK((fc.Q - Q).norm() < 1e-10);
    CHECK((fc.b - bb).norm() < 1e-10);
  }
  {
    const FactorConditional fc = detection_conditional(Side::plant, st, ws, v);
    Eigen::MatrixXd Xd(nP, H + 1);
    Xd.col(0).setOnes();
    Xd.rightCols(H) = st.V;
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(H + 1, H + 1) / v +
                              Xd.transpose() * ws.det_omega_sum_p.asDiagonal() * Xd;
    const Eigen::VectorXd bb = Xd.transpose() * ws.det_kappa_p;
    CHECK((fc.Q - Q).norm() < 1e-10);
    CHECK((fc.b - bb).norm() < 1e-10);
  }

  Hyperparams hp;
  hp.H = H;
  RngStream root(3, 0);
  update_detection_coefs(1, root, st, ws, hp);
  for (int i = 0; i < nF; ++i) {
    CHECK(st.p(i) ==
          doctest::Approx(clamp_prob(logistic(detection_logit(st, Side::animal, i))))
              .epsilon(1e-12));
  }
  for (int j = 0; j < nP; ++j) {
    CHECK(st.q(j) ==
          doctest::Approx(clamp_prob(logistic(detection_logit(st, Side::plant, j))))
              .epsilon(1e-12));
  }
}

TEST_CASE("fixed-prior occurrence draw hits the collapsed ratio") {
  RngStream root(41, 0);
  const int n = 100000;
  int ones = 0;
  for (int rep = 1; rep <= n; ++rep) {
    RngStream g = root.fork(rep, StreamBlock::kOccAnimal, 0);
    ones += occurrence_draw_fixed(0.5, std::log(0.5), g);
  }
  CHECK(std::abs(ones / static_cast<double>(n) - 1.0 / 3.0) < 0.006);

  // with no exposed links the draw is a coin flip at the prior center
  int ones2 = 0;
  for (int rep = 1; rep <= n; ++rep) {
    RngStream g = root.fork(rep, StreamBlock::kOccPlant, 0);
    ones2 += occurrence_draw_fixed(0.3, 0.0, g);
  }
  CHECK(std::abs(ones2 / static_cast<double>(n) - 0.3) < 0.006);
}

TEST_CASE("blocked occurrence proposals leave the joint target invariant") {
  Hyperparams hp;
  RngStream root(53, 0);
  const int n = 200000;

  // likelihood-free: P(O = 1) and E[pi] both equal the truncated-prior mean
  double pi = 0.3;
  std::uint8_t o = 0;
  long ones = 0, acc = 0;
  double pisum = 0.0;
  for (int it = 1; it <= n; ++it) {
    RngStream g = root.fork(it, StreamBlock::kOccAnimal, 0);
    const OccMhResult r = occurrence_step_blocked(0.3, pi, o, 0.0, hp, g);
    pi = r.pi;
    o = r.o;
    ones += o;
    pisum += pi;
    acc += r.accepted ? 1 : 0;
  }
  const double want = truncnorm01_mean(0.3, 1.0);
  CHECK(std::abs(ones / static_cast<double>(n) - want) < 0.015);
  CHECK(std::abs(pisum / static_cast<double>(n) - want) < 0.01);
  CHECK(acc / static_cast<double>(n) > 0.2);
  CHECK(acc / static_cast<double>(n) < 0.95);

  // one silent exposing study at joint detection 1/2 and an even prior: the
  // occurrence marginal integrates to exactly 1/3
  pi = 0.5;
  o = 1;
  ones = 0;
  for (int it = 1; it <= n; ++it) {
    RngStream g = root.fork(it, StreamBlock::kOccPlant, 0);
    const OccMhResult r = occurrence_step_blocked(0.5, pi, o, std::log(0.5), hp, g);
    pi = r.pi;
    o = r.o;
    ones += o;
  }
  CHECK(std::abs(ones / static_cast<double>(n) - 1.0 / 3.0) < 0.015);
}

namespace {

// Two animals, two plants, one network and one zoocentric study; one observed
// pair in each. Two free link bits and two free occurrence bits per side.
DataBundle mini_bundle() {
  DataBundle b;
  b.species.intern_animal("a0");
  b.species.intern_animal("a1");
  b.species.intern_plant("p0");
  b.species.intern_plant("p1");
  b.A = ObservedTensor(2, 2, 2, {{0, 0, 0}, {1, 1, 1}});
  b.studies = {
      {"s0", StudyKind::network, "x", "BR", "neotropic"},
      {"s1", StudyKind::zoocentric, "y", "BR", "neotropic"},
  };
  b.F = derive_focus(b.A, b.studies, nullptr);
  b.phylo = PhyloCorrelation::identity(2, 2);
  b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::expert());
  return b;
}

struct MiniMarginals {
  Eigen::MatrixXd link, occ_f, occ_p;
};

// Brute-force marginals of the links + occurrence blocks with every
// continuous parameter frozen. `eff_f`/`eff_p` are the per-cell effective
// occurrence prior weights: the raw center for the plain sampler, the
// truncated-normal mean for the extended one (occurrence enters its joint
// target linearly, so pi marginalizes to its prior mean).
MiniMarginals enumerate_mini(const DataBundle& b, const LatentState& st,
                             const Eigen::MatrixXd& eff_f, const Eigen::MatrixXd& eff_p) {
  const int nF = 2, nP = 2, nS = 2;
  std::vector<std::pair<int, int>> free_l, free_of, free_op;
  for (int i = 0; i < nF; ++i) {
    for (int j = 0; j < nP; ++j) {
      if (!b.A.pair_observed(i, j)) free_l.emplace_back(i, j);
    }
  }
  for (int i = 0; i < nF; ++i) {
    for (int s = 0; s < nS; ++s) {
      if (eff_f(i, s) > 0.0 && eff_f(i, s) < 1.0) free_of.emplace_back(i, s);
    }
  }
  for (int j = 0; j < nP; ++j) {
    for (int s = 0; s < nS; ++s) {
      if (eff_p(j, s) > 0.0 && eff_p(j, s) < 1.0) free_op.emplace_back(j, s);
    }
  }
  const int nb = static_cast<int>(free_l.size() + free_of.size() + free_op.size());
  REQUIRE(nb <= 20);

  Eigen::MatrixXd theta(nF, nP);
  for (int i = 0; i < nF; ++i) {
    for (int j = 0; j < nP; ++j) theta(i, j) = logistic(interaction_logit(st, i, j));
  }

  MiniMarginals out{Eigen::MatrixXd::Zero(nF, nP), Eigen::MatrixXd::Zero(nF, nS),
                    Eigen::MatrixXd::Zero(nP, nS)};
  double z_total = 0.0;
  for (long mask = 0; mask < (1L << nb); ++mask) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Ones(nF, nP);
    Eigen::MatrixXd OF(nF, nS), OP(nP, nS);
    for (int i = 0; i < nF; ++i) {
      for (int s = 0; s < nS; ++s) OF(i, s) = eff_f(i, s) >= 1.0 ? 1.0 : 0.0;
    }
    for (int j = 0; j < nP; ++j) {
      for (int s = 0; s < nS; ++s) OP(j, s) = eff_p(j, s) >= 1.0 ? 1.0 : 0.0;
    }
    double w = 1.0;
    int bit = 0;
    for (const auto& [i, j] : free_l) {
      const int val = static_cast<int>((mask >> bit++) & 1);
      L(i, j) = val;
      w *= val ? theta(i, j) : 1.0 - theta(i, j);
    }
    for (const auto& [i, s] : free_of) {
      const int val = static_cast<int>((mask >> bit++) & 1);
      OF(i, s) = val;
      w *= val ? eff_f(i, s) : 1.0 - eff_f(i, s);
    }
    for (const auto& [j, s] : free_op) {
      const int val = static_cast<int>((mask >> bit++) & 1);
      OP(j, s) = val;
      w *= val ? eff_p(j, s) : 1.0 - eff_p(j, s);
    }
    for (int s = 0; s < nS && w > 0.0; ++s) {
      for (int i = 0; i < nF && w > 0.0; ++i) {
        for (int j = 0; j < nP; ++j) {
          if (!b.F.at(i, j, s)) continue;
          const bool exposed = OF(i, s) > 0.5 && OP(j, s) > 0.5 && L(i, j) > 0.5;
          const double pq = clamp_prob(st.p(i) * st.q(j));
          if (b.A.contains(i, j, s)) {
            if (!exposed) {
              w = 0.0;
              break;
            }
            w *= pq;
          } else if (exposed) {
            w *= 1.0 - pq;
          }
        }
      }
    }
    if (w <= 0.0) continue;
    z_total += w;
    out.link += w * L;
    out.occ_f += w * OF;
    out.occ_p += w * OP;
  }
  REQUIRE(z_total > 0.0);
  out.link /= z_total;
  out.occ_f /= z_total;
  out.occ_p /= z_total;
  return out;
}

LatentState mini_start(const DataBundle& b) {
  LatentState st = frozen_state(2, 2, 2, 1);
  st.lambda << 0.8;
  st.U << 0.4, -0.5;
  st.V << -0.3, 0.6;
  st.lambda0 = -0.2;
  st.p << 0.6, 0.45;
  st.q << 0.5, 0.7;
  st.pi_F = b.occ_prior.P_OF;
  st.pi_P = b.occ_prior.P_OP;
  return st;
}

}  // namespace

TEST_CASE("frozen discrete blocks match exact enumeration on a tiny instance") {
  const DataBundle b = mini_bundle();
  const LatentState st = mini_start(b);
  Hyperparams hp;
  hp.H = 1;

  SUBCASE("plain sampler with fixed occurrence probabilities") {
    const FrozenTally tally =
        run_frozen_tally(b, hp, Variant::coil, st, 100000, 2024);
    const MiniMarginals exact = enumerate_mini(b, st, b.occ_prior.P_OF, b.occ_prior.P_OP);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        if (b.A.pair_observed(i, j)) {
          CHECK(tally.link_freq(i, j) == 1.0);
        } else {
          CHECK(std::abs(tally.link_freq(i, j) - exact.link(i, j)) < 0.025);
        }
      }
    }
    for (int i = 0; i < 2; ++i) {
      for (int s = 0; s < 2; ++s) {
        if (b.A.animal_observed_in(i, s)) {
          CHECK(tally.occ_f_freq(i, s) == 1.0);
        } else {
          CHECK(std::abs(tally.occ_f_freq(i, s) - exact.occ_f(i, s)) < 0.025);
        }
      }
    }
    for (int j = 0; j < 2; ++j) {
      for (int s = 0; s < 2; ++s) {
        if (b.A.plant_observed_in(j, s)) {
          CHECK(tally.occ_p_freq(j, s) == 1.0);
        } else {
          CHECK(std::abs(tally.occ_p_freq(j, s) - exact.occ_p(j, s)) < 0.025);
        }
      }
    }
  }

  SUBCASE("extended sampler with blocked occurrence proposals") {
    const FrozenTally tally =
        run_frozen_tally(b, hp, Variant::coil_plus, st, 200000, 4048);
    Eigen::MatrixXd eff_f(2, 2), eff_p(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int s = 0; s < 2; ++s) {
        const double c = b.occ_prior.P_OF(i, s);
        eff_f(i, s) = (c > 0.0 && c < 1.0) ? truncnorm01_mean(c, 1.0) : c;
      }
    }
    for (int j = 0; j < 2; ++j) {
      for (int s = 0; s < 2; ++s) {
        const double c = b.occ_prior.P_OP(j, s);
        eff_p(j, s) = (c > 0.0 && c < 1.0) ? truncnorm01_mean(c, 1.0) : c;
      }
    }
    const MiniMarginals exact = enumerate_mini(b, st, eff_f, eff_p);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        if (!b.A.pair_observed(i, j)) {
          CHECK(std::abs(tally.link_freq(i, j) - exact.link(i, j)) < 0.04);
        }
      }
    }
    for (int i = 0; i < 2; ++i) {
      for (int s = 0; s < 2; ++s) {
        if (!b.A.animal_observed_in(i, s)) {
          CHECK(std::abs(tally.occ_f_freq(i, s) - exact.occ_f(i, s)) < 0.04);
        }
      }
    }
    for (int j = 0; j < 2; ++j) {
      for (int s = 0; s < 2; ++s) {
        if (!b.A.plant_observed_in(j, s)) {
          CHECK(std::abs(tally.occ_p_freq(j, s) - exact.occ_p(j, s)) < 0.04);
        }
      }
    }
  }
}

TEST_CASE("all-or-nothing priors pin occurrence so only links move") {
  DataBundle b = mini_bundle();
  b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::naive());
  LatentState st = mini_start(b);
  st.pi_F = b.occ_prior.P_OF;
  st.pi_P = b.occ_prior.P_OP;
  for (int i = 0; i < 2; ++i) {
    for (int s = 0; s < 2; ++s) {
      st.O_F(i, s) = b.A.animal_observed_in(i, s) ? 1 : 0;
      st.O_P(i, s) = b.A.plant_observed_in(i, s) ? 1 : 0;
    }
  }
  Hyperparams hp;
  hp.H = 1;
  const FrozenTally tally = run_frozen_tally(b, hp, Variant::coil, st, 40000, 77);
  // occurrence is frozen at the observation pattern
  for (int i = 0; i < 2; ++i) {
    for (int s = 0; s < 2; ++s) {
      CHECK(tally.occ_f_freq(i, s) == static_cast<double>(st.O_F(i, s)));
      CHECK(tally.occ_p_freq(i, s) == static_cast<double>(st.O_P(i, s)));
    }
  }
  // with occurrence pinned, every unobserved pair has a fixed exposure count
  // and its link draw is an independent coin at the collapsed probability
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (b.A.pair_observed(i, j)) {
        CHECK(tally.link_freq(i, j) == 1.0);
        continue;
      }
      int m = 0;
      for (int s = 0; s < 2; ++s) {
        if (b.F.at(i, j, s) && st.O_F(i, s) && st.O_P(j, s)) ++m;
      }
      const double want = link_probability(interaction_logit(st, i, j), st.p(i), st.q(j), m);
      CHECK(std::abs(tally.link_freq(i, j) - want) < 0.01);
    }
  }
}

TEST_CASE("chain retains the configured sample count, deterministically") {
  const DataBundle b = demo_bundle();
  ChainConfig cfg;
  cfg.n_iter = 300;
  cfg.n_burn = 150;
  cfg.thin_keep_fraction = 0.1;
  cfg.n_chains = 1;
  cfg.seed = 11;
  cfg.sampler_variant = Variant::coil_plus;
  cfg.hyperparams.H = 3;

  CHECK(thin_target(20000, 10000, 0.05) == 500);
  CHECK(thin_target(cfg.n_iter, cfg.n_burn, cfg.thin_keep_fraction) == 15);
  int kept = 0;
  for (int k = 1; k <= 150; ++k) kept += thin_keeps(k, 150, 15) ? 1 : 0;
  CHECK(kept == 15);
  kept = 0;
  for (int k = 1; k <= 30; ++k) kept += thin_keeps(k, 30, 7) ? 1 : 0;
  CHECK(kept == 7);
  CHECK(thin_keeps(30, 30, 7));  // the final sweep is always retained

  const ChainOutput out = run_chain(b, cfg);
  CHECK(out.prob_samples.size() == 15);
  CHECK(out.occ_f_samples.size() == 15);
  CHECK(out.occ_p_samples.size() == 15);
  CHECK(out.loglik_trace.size() == 300);
  CHECK(out.rho_u_trace.size() == 300);
  CHECK(out.rho_v_trace.size() == 300);
  CHECK(out.lambda0_trace.size() == 300);
  CHECK(out.variant == Variant::coil_plus);
  CHECK(out.occ_proposals > 0);
  CHECK(out.occ_acceptance() > 0.0);
  CHECK(out.occ_acceptance() <= 1.0);

  for (const auto& m : out.prob_samples) {
    CHECK(m.minCoeff() >= 0.0);
    CHECK(m.maxCoeff() <= 1.0);
    for (const Triple& t : b.A.entries()) CHECK(m(t.animal, t.plant) == 1.0);
  }
  // in-study observations pin occurrence: the MH step never touches those
  // cells, so they keep the prior center clamped into the open interval
  for (const auto& m : out.occ_f_samples) {
    for (int i = 0; i < 4; ++i) {
      for (int s = 0; s < 4; ++s) {
        CHECK(m(i, s) >= 0.0);
        CHECK(m(i, s) <= 1.0);
        if (b.A.animal_observed_in(i, s)) CHECK(m(i, s) >= 0.999);
      }
    }
  }

  // bit-identical rerun
  const ChainOutput out2 = run_chain(b, cfg);
  CHECK(out2.loglik_trace == out.loglik_trace);
  CHECK(out2.rho_u_trace == out.rho_u_trace);
  REQUIRE(out2.prob_samples.size() == out.prob_samples.size());
  for (std::size_t k = 0; k < out.prob_samples.size(); ++k) {
    CHECK(same_matrix(out2.prob_samples[k], out.prob_samples[k]));
    CHECK(same_matrix(out2.occ_f_samples[k], out.occ_f_samples[k]));
    CHECK(same_matrix(out2.occ_p_samples[k], out.occ_p_samples[k]));
  }
  CHECK(same_matrix(out2.final_state.U, out.final_state.U));

  // a different chain index diverges
  ChainConfig cfg3 = cfg;
  cfg3.chain_index = 1;
  const ChainOutput out3 = run_chain(b, cfg3);
  CHECK(out3.loglik_trace != out.loglik_trace);

  // run_chains assigns indices 0..n-1, so it reproduces the single runs
  ChainConfig cfgm = cfg;
  cfgm.n_chains = 2;
  const std::vector<ChainOutput> many = run_chains(b, cfgm);
  REQUIRE(many.size() == 2);
  CHECK(many[0].loglik_trace == out.loglik_trace);
  CHECK(many[1].loglik_trace == out3.loglik_trace);

  // the plain variant stores 0/1 occurrence indicators and never proposes
  ChainConfig cfgc = cfg;
  cfgc.sampler_variant = Variant::coil;
  const ChainOutput outc = run_chain(b, cfgc);
  CHECK(outc.occ_proposals == 0);
  for (const auto& m : outc.occ_f_samples) {
    for (int i = 0; i < 4; ++i) {
      for (int s = 0; s < 4; ++s) {
        const bool binary = m(i, s) == 0.0 || m(i, s) == 1.0;
        CHECK(binary);
      }
    }
  }
}

TEST_CASE("checkpointed chain resumes bit-identically") {
  namespace fs = std::filesystem;
  const DataBundle b = demo_bundle();
  const std::string path = (fs::temp_directory_path() / "biplink_test_ckpt.bin").string();
  std::error_code ec;
  fs::remove(path, ec);

  ChainConfig cfg;
  cfg.n_iter = 260;
  cfg.n_burn = 100;
  cfg.thin_keep_fraction = 0.1;
  cfg.n_chains = 1;
  cfg.seed = 29;
  cfg.sampler_variant = Variant::coil_plus;
  cfg.hyperparams.H = 2;

  const ChainOutput ref = run_chain(b, cfg);
  REQUIRE(ref.prob_samples.size() == 16);

  ChainConfig cfg_save = cfg;
  cfg_save.checkpoint_path = path;
  cfg_save.checkpoint_every = 90;  // saves after sweeps 90 and 180
  const ChainOutput full = run_chain(b, cfg_save);
  CHECK(full.loglik_trace == ref.loglik_trace);  // saving must not perturb the run
  REQUIRE(fs::exists(path));

  ChainConfig cfg_resume = cfg_save;
  cfg_resume.resume = true;
  const ChainOutput res = run_chain(b, cfg_resume);
  CHECK(res.loglik_trace == ref.loglik_trace);
  CHECK(res.rho_u_trace == ref.rho_u_trace);
  CHECK(res.lambda0_trace == ref.lambda0_trace);
  REQUIRE(res.prob_samples.size() == ref.prob_samples.size());
  for (std::size_t k = 0; k < ref.prob_samples.size(); ++k) {
    CHECK(same_matrix(res.prob_samples[k], ref.prob_samples[k]));
    CHECK(same_matrix(res.occ_f_samples[k], ref.occ_f_samples[k]));
    CHECK(same_matrix(res.occ_p_samples[k], ref.occ_p_samples[k]));
  }
  CHECK(same_matrix(res.final_state.U, ref.final_state.U));
  CHECK(same_matrix(res.final_state.V, ref.final_state.V));
  CHECK((res.final_state.L.array() == ref.final_state.L.array()).all());
  CHECK(res.occ_proposals == ref.occ_proposals);
  CHECK(res.occ_accepts == ref.occ_accepts);
  CHECK(res.n_iter == cfg.n_iter);

  // a missing file is not an error, a malformed file is
  Checkpoint cp;
  CHECK_FALSE(load_checkpoint(path + ".absent", cp));
  const std::string bad_path = path + ".bad";
  {
    std::ofstream bad(bad_path, std::ios::binary);
    bad << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(bad_path, cp), std::runtime_error);
  fs::remove(path, ec);
  fs::remove(bad_path, ec);
}

TEST_CASE("chain configuration rejects inconsistent settings") {
  ChainConfig ok;
  CHECK_NOTHROW(ok.validate());
  auto bad = [](auto mutate) {
    ChainConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  bad([](ChainConfig& c) { c.n_iter = 0; });
  bad([](ChainConfig& c) { c.n_burn = c.n_iter; });
  bad([](ChainConfig& c) { c.n_burn = -1; });
  bad([](ChainConfig& c) { c.thin_keep_fraction = 0.0; });
  bad([](ChainConfig& c) { c.thin_keep_fraction = 1.5; });
  bad([](ChainConfig& c) { c.n_chains = 0; });
  bad([](ChainConfig& c) { c.chain_index = -1; });
  bad([](ChainConfig& c) { c.checkpoint_every = -1; });
  bad([](ChainConfig& c) { c.hyperparams.H = 0; });
}
