#include "biplink/gibbs.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "backend_impl.hpp"
#include "biplink/checkpoint.hpp"

namespace biplink {

void ChainConfig::validate() const {
  hyperparams.validate();
  if (n_iter <= 0) throw std::invalid_argument("ChainConfig: n_iter must be positive");
  if (n_burn < 0 || n_burn >= n_iter) {
    throw std::invalid_argument("ChainConfig: n_burn must lie in [0, n_iter)");
  }
  if (!(thin_keep_fraction > 0.0 && thin_keep_fraction <= 1.0)) {
    throw std::invalid_argument("ChainConfig: thin_keep_fraction must lie in (0, 1]");
  }
  if (n_chains < 1) throw std::invalid_argument("ChainConfig: n_chains must be >= 1");
  if (chain_index < 0) throw std::invalid_argument("ChainConfig: chain_index must be >= 0");
  if (checkpoint_every < 0) {
    throw std::invalid_argument("ChainConfig: checkpoint_every must be >= 0");
  }
}

namespace {

template <typename Fn>
void run_block(int iter, const char* block, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    throw std::runtime_error("sweep " + std::to_string(iter) + ", block " + block + ": " +
                             e.what());
  }
}

int nearest_grid_index(const std::vector<double>& grid, double rho) {
  int best = 0;
  for (int g = 1; g < static_cast<int>(grid.size()); ++g) {
    if (std::abs(grid[g] - rho) < std::abs(grid[best] - rho)) best = g;
  }
  return best;
}

}  // namespace

// One factor column per draw; eta is rebuilt from scratch after each column
// so every later conditional sees the current bilinear form.
void update_factor_side(Side side, int it, const RngStream& root, LatentState& st,
                        SweepWorkspace& ws, const TraitTable& traits,
                        const Eigen::MatrixXd& sigma_inv) {
  const bool animal = (side == Side::animal);
  const StreamBlock block = animal ? StreamBlock::kFactorU : StreamBlock::kFactorV;
  for (int h = 0; h < st.H(); ++h) {
    const FactorConditional fc = factor_conditional(side, h, st, ws, traits, sigma_inv);
    RngStream g = root.fork(it, block, h);
    const Eigen::VectorXd x = draw_mvn_from_precision(fc.Q, fc.b, g);
    if (animal) {
      st.U.col(h) = x;
    } else {
      st.V.col(h) = x;
    }
    ws.eta = interaction_logit_matrix(st);
  }
}

void update_intercept(int it, const RngStream& root, LatentState& st, SweepWorkspace& ws,
                      double coef_prior_var) {
  double prec = 1.0 / coef_prior_var;
  double num = 0.0;
  for (int i = 0; i < st.n_animals(); ++i) {
    double row_prec = 0.0;
    double row_num = 0.0;
    for (int j = 0; j < st.n_plants(); ++j) {
      const double om = ws.omega_link(i, j);
      const double kappa = (st.L(i, j) ? 1.0 : 0.0) - 0.5;
      row_prec += om;
      row_num += kappa - om * (ws.eta(i, j) - st.lambda0);
    }
    prec += row_prec;
    num += row_num;
  }
  RngStream g = root.fork(it, StreamBlock::kLambda0, 0);
  st.lambda0 = num / prec + g.normal() / std::sqrt(prec);
  ws.eta = interaction_logit_matrix(st);
}

// Log-scale random walk on each shrinkage increment against the collapsed
// Bernoulli link likelihood. The increment scales every weight from its
// index onward, so the proposal's logits are eta + (ratio - 1) * tail where
// tail is the bilinear form of the affected columns.
void update_shrinkage(int it, const RngStream& root, LatentState& st, SweepWorkspace& ws,
                      const Hyperparams& hp) {
  const int H = st.H();
  for (int l = 0; l < H; ++l) {
    const double a = (l == 0) ? hp.mgp_a1 : hp.mgp_a2;
    RngStream g = root.fork(it, StreamBlock::kShrinkMH, l);
    const double d_old = st.mgp_deltas[l];
    const double d_new = d_old * std::exp(hp.mgp_mh_step * g.normal());
    const double ratio = d_old / d_new;
    const int m = H - l;
    const Eigen::MatrixXd tail = st.U.rightCols(m) * st.lambda.tail(m).asDiagonal() *
                                 st.V.rightCols(m).transpose();
    const Eigen::MatrixXd eta_new = ws.eta + (ratio - 1.0) * tail;
    double dll = 0.0;
    for (int i = 0; i < st.n_animals(); ++i) {
      double row = 0.0;
      for (int j = 0; j < st.n_plants(); ++j) {
        const double e0 = ws.eta(i, j);
        const double e1 = eta_new(i, j);
        row += (st.L(i, j) ? e1 - e0 : 0.0) - log1pexp(e1) + log1pexp(e0);
      }
      dll += row;
    }
    const double dlog = std::log(d_new) - std::log(d_old);
    // Gamma(a, 1) prior plus the log-scale Jacobian.
    const double log_alpha = dll + (a - 1.0) * dlog - (d_new - d_old) + dlog;
    if (std::log(g.uniform01()) < log_alpha) {
      st.mgp_deltas[l] = d_new;
      double prod = 1.0;
      for (int h = 0; h < H; ++h) {
        prod *= st.mgp_deltas[h];
        st.lambda[h] = 1.0 / prod;
      }
      ws.eta = interaction_logit_matrix(st);
    }
  }
}

// Griddy draw of one side's phylogeny weight: prior density of the factor
// columns under each grid point's covariance, normalized into a categorical.
int update_rho_side(Side side, int it, const RngStream& root, LatentState& st,
                    const GpCache& cache) {
  const bool animal = (side == Side::animal);
  const Eigen::MatrixXd& fac = animal ? st.U : st.V;
  const int H = static_cast<int>(fac.cols());
  const int n_grid = static_cast<int>(cache.grid.size());
  std::vector<double> logw(n_grid);
  double best = -std::numeric_limits<double>::infinity();
  for (int gdx = 0; gdx < n_grid; ++gdx) {
    const Eigen::MatrixXd m = cache.sigma_inv[gdx] * fac;
    const double quad = (fac.array() * m.array()).sum();
    logw[gdx] = -0.5 * (H * cache.logdet[gdx] + quad);
    if (logw[gdx] > best) best = logw[gdx];
  }
  if (!std::isfinite(best)) {
    throw std::runtime_error("phylogeny-weight grid has no posterior support");
  }
  double total = 0.0;
  std::vector<double> w(n_grid);
  for (int gdx = 0; gdx < n_grid; ++gdx) {
    w[gdx] = std::exp(logw[gdx] - best);
    total += w[gdx];
  }
  RngStream g = root.fork(it, animal ? StreamBlock::kRhoU : StreamBlock::kRhoV, 0);
  const double u = g.uniform01() * total;
  double acc = 0.0;
  int pick = n_grid - 1;
  for (int gdx = 0; gdx < n_grid; ++gdx) {
    acc += w[gdx];
    if (u < acc) {
      pick = gdx;
      break;
    }
  }
  if (animal) {
    st.rho_U = cache.grid[pick];
  } else {
    st.rho_V = cache.grid[pick];
  }
  return pick;
}

void update_trait_side(Side side, int it, const RngStream& root, LatentState& st,
                       SweepWorkspace& ws, const TraitTable& traits,
                       const Hyperparams& hp) {
  const bool animal = (side == Side::animal);
  const int p_tr = animal ? traits.p_animal() : traits.p_plant();
  const std::vector<TraitKind>& kinds = animal ? traits.x_kinds : traits.w_kinds;
  const Eigen::MatrixXd& fac = animal ? st.U : st.V;
  const int H = st.H();
  for (int l = 0; l < p_tr; ++l) {
    const FactorConditional tc = trait_conditional(side, l, st, ws, traits, hp.coef_prior_var);
    RngStream g = root.fork(it, animal ? StreamBlock::kTraitColX : StreamBlock::kTraitColW, l);
    const Eigen::VectorXd coef = draw_mvn_from_precision(tc.Q, tc.b, g);
    if (animal) {
      st.beta0[l] = coef[0];
      st.beta.row(l) = coef.tail(H).transpose();
    } else {
      st.gamma0[l] = coef[0];
      st.gamma.row(l) = coef.tail(H).transpose();
    }
    if (kinds[l] == TraitKind::continuous) {
      Eigen::VectorXd pred = fac * coef.tail(H);
      pred.array() += coef[0];
      const Eigen::VectorXd col = animal ? traits.X.col(l) : traits.W.col(l);
      const double rss = (col - pred).squaredNorm();
      const double shape = hp.trait_var_shape + 0.5 * static_cast<double>(fac.rows());
      const double scale = hp.trait_var_rate + 0.5 * rss;
      (animal ? st.trait_vars_animal : st.trait_vars_plant)[l] = g.inverse_gamma(shape, scale);
    }
  }
}

void update_detection_coefs(int it, const RngStream& root, LatentState& st,
                            SweepWorkspace& ws, const Hyperparams& hp) {
  const int H = st.H();
  {
    const FactorConditional dc =
        detection_conditional(Side::animal, st, ws, hp.coef_prior_var);
    RngStream g = root.fork(it, StreamBlock::kDetCoef, 0);
    const Eigen::VectorXd coef = draw_mvn_from_precision(dc.Q, dc.b, g);
    st.delta0 = coef[0];
    st.delta = coef.tail(H);
  }
  {
    const FactorConditional dc =
        detection_conditional(Side::plant, st, ws, hp.coef_prior_var);
    RngStream g = root.fork(it, StreamBlock::kDetCoef, 1);
    const Eigen::VectorXd coef = draw_mvn_from_precision(dc.Q, dc.b, g);
    st.zeta0 = coef[0];
    st.zeta = coef.tail(H);
  }
  const Eigen::VectorXd zf = detection_logit_vector(st.U, st.delta0, st.delta);
  for (int i = 0; i < st.n_animals(); ++i) st.p[i] = clamp_prob(logistic(zf[i]));
  const Eigen::VectorXd zp = detection_logit_vector(st.V, st.zeta0, st.zeta);
  for (int j = 0; j < st.n_plants(); ++j) st.q[j] = clamp_prob(logistic(zp[j]));
}

ChainOutput run_chain(const DataBundle& bundle, const ChainConfig& config) {
  config.validate();
  Eigen::setNbThreads(1);
  const Hyperparams& hp = config.hyperparams;
  const Variant variant = config.sampler_variant;

  auto backend = make_backend(config.backend, bundle);
  const GpCache gp_u = build_gp_cache(bundle.phylo.C_animal, hp.rho_grid);
  const GpCache gp_v = build_gp_cache(bundle.phylo.C_plant, hp.rho_grid);

  LatentState st = init_state(bundle, hp, variant, config.seed, config.chain_index);
  SweepWorkspace ws;
  ws.init(st.n_animals(), st.n_plants(), bundle.traits.p_animal(), bundle.traits.p_plant());

  ChainOutput out;
  out.variant = variant;
  out.n_iter = config.n_iter;
  out.n_burn = config.n_burn;

  int start_iter = 1;
  if (config.resume && !config.checkpoint_path.empty()) {
    Checkpoint cp;
    if (load_checkpoint(config.checkpoint_path, cp)) {
      st = std::move(cp.state);
      out = std::move(cp.partial);
      start_iter = cp.next_iter;
      ws.occ_proposals = out.occ_proposals;
      ws.occ_accepts = out.occ_accepts;
      out.variant = variant;  // the echoed config reflects this run, not the saved one
      out.n_iter = config.n_iter;
      out.n_burn = config.n_burn;
    }
  }

  const RngStream root(config.seed, static_cast<std::uint64_t>(config.chain_index));
  int rho_idx_u = nearest_grid_index(hp.rho_grid, st.rho_U);
  int rho_idx_v = nearest_grid_index(hp.rho_grid, st.rho_V);
  st.rho_U = hp.rho_grid[rho_idx_u];
  st.rho_V = hp.rho_grid[rho_idx_v];

  const int post = config.n_iter - config.n_burn;
  const int target = thin_target(config.n_iter, config.n_burn, config.thin_keep_fraction);

  for (int it = start_iter; it <= config.n_iter; ++it) {
    run_block(it, "logistic auxiliaries", [&] {
      ws.eta = interaction_logit_matrix(st);
      backend->draw_link_aux(root, it, ws);
      backend->draw_trait_aux(root, it, st, ws);
    });
    run_block(it, "link exposure counts", [&] { backend->count_link_exposure(st, ws); });
    run_block(it, "links", [&] { backend->update_links(root, it, st, ws); });
    run_block(it, "detection trials", [&] {
      backend->refresh_trials(root, it, StreamBlock::kTrialAux, st, ws);
    });
    run_block(it, "factors U", [&] {
      update_factor_side(Side::animal, it, root, st, ws, bundle.traits,
                         gp_u.sigma_inv[rho_idx_u]);
    });
    run_block(it, "factors V", [&] {
      update_factor_side(Side::plant, it, root, st, ws, bundle.traits,
                         gp_v.sigma_inv[rho_idx_v]);
    });
    run_block(it, "interaction intercept",
              [&] { update_intercept(it, root, st, ws, hp.coef_prior_var); });
    run_block(it, "shrinkage", [&] { update_shrinkage(it, root, st, ws, hp); });
    run_block(it, "phylogeny weight U",
              [&] { rho_idx_u = update_rho_side(Side::animal, it, root, st, gp_u); });
    run_block(it, "phylogeny weight V",
              [&] { rho_idx_v = update_rho_side(Side::plant, it, root, st, gp_v); });
    run_block(it, "trait coefficients", [&] {
      update_trait_side(Side::animal, it, root, st, ws, bundle.traits, hp);
      update_trait_side(Side::plant, it, root, st, ws, bundle.traits, hp);
    });
    run_block(it, "detection redraw", [&] {
      backend->refresh_trials(root, it, StreamBlock::kDetRedraw, st, ws);
    });
    run_block(it, "detection coefficients",
              [&] { update_detection_coefs(it, root, st, ws, hp); });
    run_block(it, "occurrence",
              [&] { backend->update_occurrence(root, it, st, ws, variant, hp); });

    out.loglik_trace.push_back(backend->log_likelihood(st));
    out.rho_u_trace.push_back(st.rho_U);
    out.rho_v_trace.push_back(st.rho_V);
    out.lambda0_trace.push_back(st.lambda0);
    out.occ_proposals = ws.occ_proposals;
    out.occ_accepts = ws.occ_accepts;

    if (it > config.n_burn && thin_keeps(it - config.n_burn, post, target)) {
      out.prob_samples.push_back(ws.r_link);
      if (variant == Variant::coil_plus) {
        out.occ_f_samples.push_back(st.pi_F);
        out.occ_p_samples.push_back(st.pi_P);
      } else {
        out.occ_f_samples.push_back(st.O_F.cast<double>());
        out.occ_p_samples.push_back(st.O_P.cast<double>());
      }
    }

#ifndef NDEBUG
    check_state_invariants(st, bundle.A, bundle.F, variant);
#endif

    if (config.checkpoint_every > 0 && !config.checkpoint_path.empty() &&
        it % config.checkpoint_every == 0 && it < config.n_iter) {
      Checkpoint cp;
      cp.next_iter = it + 1;
      cp.state = st;
      cp.partial = out;
      save_checkpoint(config.checkpoint_path, cp);
    }
  }
  out.final_state = std::move(st);
  return out;
}

std::vector<ChainOutput> run_chains(const DataBundle& bundle, const ChainConfig& config) {
  config.validate();
  std::vector<ChainOutput> outs;
  outs.reserve(config.n_chains);
  for (int k = 0; k < config.n_chains; ++k) {
    ChainConfig cfg = config;
    cfg.chain_index = k;
    if (!config.checkpoint_path.empty()) {
      cfg.checkpoint_path = config.checkpoint_path + ".chain" + std::to_string(k);
    }
    outs.push_back(run_chain(bundle, cfg));
  }
  return outs;
}

FrozenTally run_frozen_tally(const DataBundle& bundle, const Hyperparams& hp,
                             Variant variant, const LatentState& start, long n_sweeps,
                             std::uint64_t seed, int chain_index, BackendKind backend) {
  hp.validate();
  if (n_sweeps <= 0) throw std::invalid_argument("run_frozen_tally: n_sweeps must be positive");
  Eigen::setNbThreads(1);
  auto be = make_backend(backend, bundle);
  LatentState st = start;
  SweepWorkspace ws;
  ws.init(st.n_animals(), st.n_plants(), bundle.traits.p_animal(), bundle.traits.p_plant());
  ws.eta = interaction_logit_matrix(st);  // frozen along with p, q
  const RngStream root(seed, static_cast<std::uint64_t>(chain_index));

  FrozenTally tally;
  tally.link_freq.setZero(st.n_animals(), st.n_plants());
  tally.occ_f_freq.setZero(st.n_animals(), st.n_studies());
  tally.occ_p_freq.setZero(st.n_plants(), st.n_studies());
  for (long it = 1; it <= n_sweeps; ++it) {
    be->count_link_exposure(st, ws);
    be->update_links(root, static_cast<int>(it), st, ws);
    be->update_occurrence(root, static_cast<int>(it), st, ws, variant, hp);
    tally.link_freq += st.L.cast<double>();
    tally.occ_f_freq += st.O_F.cast<double>();
    tally.occ_p_freq += st.O_P.cast<double>();
  }
  const double inv = 1.0 / static_cast<double>(n_sweeps);
  tally.link_freq *= inv;
  tally.occ_f_freq *= inv;
  tally.occ_p_freq *= inv;
  tally.sweeps = n_sweeps;
  return tally;
}

}  // namespace biplink
