#include "biplink/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "backend_impl.hpp"

namespace biplink {

void SweepWorkspace::init(int n_f, int n_p, int p_m, int p_p) {
  eta.setZero(n_f, n_p);
  omega_link.setZero(n_f, n_p);
  r_link.setZero(n_f, n_p);
  m_link.setZero(n_f, n_p);
  omega_xbin.setZero(n_f, p_m);
  omega_wbin.setZero(n_p, p_p);
  trial_omega_f.clear();
  trial_omega_p.clear();
  det_omega_sum_f.setZero(n_f);
  det_kappa_f.setZero(n_f);
  det_omega_sum_p.setZero(n_p);
  det_kappa_p.setZero(n_p);
  occ_proposals = 0;
  occ_accepts = 0;
}

Eigen::VectorXd draw_mvn_from_precision(const Eigen::MatrixXd& Q,
                                        const Eigen::VectorXd& b, RngStream& g) {
  const int n = static_cast<int>(Q.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success) {
    const Eigen::MatrixXd Qr = Q + 1e-8 * Eigen::MatrixXd::Identity(n, n);
    llt.compute(Qr);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("draw_mvn_from_precision: matrix is not positive definite");
    }
  }
  const Eigen::VectorXd mu = llt.solve(b);
  Eigen::VectorXd z(n);
  for (int k = 0; k < n; ++k) z[k] = g.normal();
  // mu + L^{-T} z has covariance Q^{-1}.
  return mu + llt.matrixU().solve(z);
}

FactorConditional factor_conditional(Side side, int h, const LatentState& state,
                                     const SweepWorkspace& ws, const TraitTable& traits,
                                     const Eigen::MatrixXd& sigma_inv) {
  const bool animal = (side == Side::animal);
  const Eigen::MatrixXd& own = animal ? state.U : state.V;
  const Eigen::MatrixXd& other = animal ? state.V : state.U;
  const int n = static_cast<int>(own.rows());
  const int n_other = static_cast<int>(other.rows());
  const double lam = state.lambda[h];

  const Eigen::MatrixXd& tvals = animal ? traits.X : traits.W;
  const std::vector<TraitKind>& tkinds = animal ? traits.x_kinds : traits.w_kinds;
  const int p_tr = static_cast<int>(tvals.cols());
  const Eigen::VectorXd& tvars = animal ? state.trait_vars_animal : state.trait_vars_plant;
  const Eigen::VectorXd& b0 = animal ? state.beta0 : state.gamma0;
  const Eigen::MatrixXd& bmat = animal ? state.beta : state.gamma;
  const Eigen::MatrixXd& obin = animal ? ws.omega_xbin : ws.omega_wbin;
  Eigen::MatrixXd pred;
  if (p_tr > 0) pred = predictor_matrix(own, b0, bmat);

  const double d0 = animal ? state.delta0 : state.zeta0;
  const Eigen::VectorXd& dvec = animal ? state.delta : state.zeta;
  const Eigen::VectorXd z = detection_logit_vector(own, d0, dvec);
  const Eigen::VectorXd& osum = animal ? ws.det_omega_sum_f : ws.det_omega_sum_p;
  const Eigen::VectorXd& kap = animal ? ws.det_kappa_f : ws.det_kappa_p;
  const double dh = dvec[h];

  FactorConditional out;
  out.Q = sigma_inv;
  out.b.setZero(n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    double bacc = 0.0;
    // Interaction likelihood: one logistic trial per counterpart species.
    for (int j = 0; j < n_other; ++j) {
      const int fi = animal ? i : j;
      const int pj = animal ? j : i;
      const double a = lam * other(j, h);
      const double eta_mh = ws.eta(fi, pj) - a * own(i, h);
      const double kappa = (state.L(fi, pj) ? 1.0 : 0.0) - 0.5;
      const double om = ws.omega_link(fi, pj);
      diag += om * a * a;
      bacc += a * (kappa - om * eta_mh);
    }
    // Trait columns where this factor is a predictor.
    for (int l = 0; l < p_tr; ++l) {
      const double c = bmat(l, h);
      const double pred_mh = pred(i, l) - c * own(i, h);
      const double x = tvals(i, l);
      if (tkinds[l] == TraitKind::continuous) {
        diag += c * c / tvars[l];
        bacc += c * (x - pred_mh) / tvars[l];
      } else {
        const double om = obin(i, l);
        diag += om * c * c;
        bacc += c * ((x - 0.5) - om * pred_mh);
      }
    }
    // Detection trials, collapsed into per-species sums.
    const double z_mh = z[i] - dh * own(i, h);
    diag += osum[i] * dh * dh;
    bacc += dh * (kap[i] - osum[i] * z_mh);
    out.Q(i, i) += diag;
    out.b[i] = bacc;
  }
  return out;
}

FactorConditional trait_conditional(Side side, int col, const LatentState& state,
                                    const SweepWorkspace& ws, const TraitTable& traits,
                                    double coef_prior_var) {
  const bool animal = (side == Side::animal);
  const Eigen::MatrixXd& own = animal ? state.U : state.V;
  const Eigen::MatrixXd& tvals = animal ? traits.X : traits.W;
  const std::vector<TraitKind>& tkinds = animal ? traits.x_kinds : traits.w_kinds;
  const int n = static_cast<int>(own.rows());
  const int H = state.H();
  const Eigen::MatrixXd& obin = animal ? ws.omega_xbin : ws.omega_wbin;
  const bool cont = tkinds[col] == TraitKind::continuous;
  const double svar = animal ? state.trait_vars_animal[col] : state.trait_vars_plant[col];

  FactorConditional out;
  out.Q = Eigen::MatrixXd::Zero(H + 1, H + 1);
  out.b.setZero(H + 1);
  Eigen::VectorXd x(H + 1);
  for (int i = 0; i < n; ++i) {
    x[0] = 1.0;
    x.tail(H) = own.row(i).transpose();
    const double y = tvals(i, col);
    if (cont) {
      out.Q.noalias() += x * x.transpose();
      out.b.noalias() += y * x;
    } else {
      out.Q.noalias() += obin(i, col) * (x * x.transpose());
      out.b.noalias() += (y - 0.5) * x;
    }
  }
  if (cont) {
    out.Q /= svar;
    out.b /= svar;
  }
  out.Q.diagonal().array() += 1.0 / coef_prior_var;
  return out;
}

FactorConditional detection_conditional(Side side, const LatentState& state,
                                        const SweepWorkspace& ws, double coef_prior_var) {
  const bool animal = (side == Side::animal);
  const Eigen::MatrixXd& own = animal ? state.U : state.V;
  const int n = static_cast<int>(own.rows());
  const int H = state.H();
  const Eigen::VectorXd& osum = animal ? ws.det_omega_sum_f : ws.det_omega_sum_p;
  const Eigen::VectorXd& kap = animal ? ws.det_kappa_f : ws.det_kappa_p;

  FactorConditional out;
  out.Q = Eigen::MatrixXd::Zero(H + 1, H + 1);
  out.b.setZero(H + 1);
  Eigen::VectorXd x(H + 1);
  for (int i = 0; i < n; ++i) {
    x[0] = 1.0;
    x.tail(H) = own.row(i).transpose();
    out.Q.noalias() += osum[i] * (x * x.transpose());
    out.b.noalias() += kap[i] * x;
  }
  out.Q.diagonal().array() += 1.0 / coef_prior_var;
  return out;
}

void reduce_trial_sums(const LatentState& state, SweepWorkspace& ws) {
  ws.det_omega_sum_f.setZero();
  ws.det_kappa_f.setZero();
  ws.det_omega_sum_p.setZero();
  ws.det_kappa_p.setZero();
  const DetectionTrials& tr = state.trials;
  for (std::size_t t = 0; t < tr.triples.size(); ++t) {
    const Triple& tp = tr.triples[t];
    ws.det_omega_sum_f[tp.animal] += ws.trial_omega_f[t];
    ws.det_kappa_f[tp.animal] += (tr.d_f[t] ? 1.0 : 0.0) - 0.5;
    ws.det_omega_sum_p[tp.plant] += ws.trial_omega_p[t];
    ws.det_kappa_p[tp.plant] += (tr.d_p[t] ? 1.0 : 0.0) - 0.5;
  }
}

namespace {

class IndexedBackend final : public SamplerBackend {
 public:
  explicit IndexedBackend(const DataBundle& bundle) : SamplerBackend(bundle) {}

  const char* name() const override { return "indexed"; }

  void draw_link_aux(const RngStream& root, int iter, SweepWorkspace& ws) override {
    const int n_p = static_cast<int>(ws.eta.cols());
    const std::int64_t total = static_cast<std::int64_t>(ws.eta.rows()) * n_p;
#pragma omp parallel for schedule(static)
    for (std::int64_t u = 0; u < total; ++u) {
      const int i = static_cast<int>(u / n_p);
      const int j = static_cast<int>(u % n_p);
      RngStream g = root.fork(iter, StreamBlock::kOmegaLink, u);
      ws.omega_link(i, j) = sample_pg1(ws.eta(i, j), g);
    }
  }

  void draw_trait_aux(const RngStream& root, int iter, const LatentState& state,
                      SweepWorkspace& ws) override {
    draw_trait_aux_side(root, iter, Side::animal, state, ws);
    draw_trait_aux_side(root, iter, Side::plant, state, ws);
  }

  void count_link_exposure(const LatentState& state, SweepWorkspace& ws) override {
    ws.m_link.setZero();
    for (int s = 0; s < state.n_studies(); ++s) {
      const StudyFocus& sf = bundle_.F.studies()[s];
      if (sf.kind == StudyKind::pair) {
        for (const auto& pr : sf.prs) {
          if (state.O_F(pr.first, s) && state.O_P(pr.second, s) &&
              !bundle_.F.pair_excluded(pr.first, pr.second)) {
            ++ws.m_link(pr.first, pr.second);
          }
        }
        continue;
      }
      for (const std::int32_t i : sf.animals) {
        if (!state.O_F(i, s)) continue;
        for (const std::int32_t j : sf.plants) {
          if (state.O_P(j, s) && !bundle_.F.pair_excluded(i, j)) ++ws.m_link(i, j);
        }
      }
    }
  }

  void update_links(const RngStream& root, int iter, LatentState& state,
                    SweepWorkspace& ws) override {
    const int n_p = state.n_plants();
    const std::int64_t total = static_cast<std::int64_t>(state.n_animals()) * n_p;
#pragma omp parallel for schedule(static)
    for (std::int64_t u = 0; u < total; ++u) {
      const int i = static_cast<int>(u / n_p);
      const int j = static_cast<int>(u % n_p);
      if (bundle_.A.pair_observed(i, j)) {
        state.L(i, j) = 1;
        ws.r_link(i, j) = 1.0;
        continue;
      }
      RngStream g = root.fork(iter, StreamBlock::kLinks, u);
      const double r =
          link_probability(ws.eta(i, j), state.p[i], state.q[j], ws.m_link(i, j));
      ws.r_link(i, j) = r;
      state.L(i, j) = draw_link(r, g);
    }
  }

  void refresh_trials(const RngStream& root, int iter, StreamBlock block,
                      LatentState& state, SweepWorkspace& ws) override {
    const int n_f = state.n_animals();
    const int n_p = state.n_plants();
    DetectionTrials& tr = state.trials;
    tr.clear();
    for (int s = 0; s < state.n_studies(); ++s) {
      const StudyFocus& sf = bundle_.F.studies()[s];
      if (sf.kind == StudyKind::pair) {
        for (const auto& pr : sf.prs) {
          const int i = pr.first;
          const int j = pr.second;
          if (state.O_F(i, s) && state.O_P(j, s) && state.L(i, j) &&
              !bundle_.F.pair_excluded(i, j)) {
            tr.triples.push_back({i, j, s});
            tr.a.push_back(bundle_.A.contains(i, j, s) ? 1 : 0);
          }
        }
        continue;
      }
      for (const std::int32_t i : sf.animals) {
        if (!state.O_F(i, s)) continue;
        for (const std::int32_t j : sf.plants) {
          if (state.O_P(j, s) && state.L(i, j) && !bundle_.F.pair_excluded(i, j)) {
            tr.triples.push_back({i, j, s});
            tr.a.push_back(bundle_.A.contains(i, j, s) ? 1 : 0);
          }
        }
      }
    }
    const std::int64_t n_tr = static_cast<std::int64_t>(tr.triples.size());
    tr.d_f.assign(n_tr, 0);
    tr.d_p.assign(n_tr, 0);
    ws.trial_omega_f.assign(n_tr, 0.0);
    ws.trial_omega_p.assign(n_tr, 0.0);
    const Eigen::VectorXd zf = detection_logit_vector(state.U, state.delta0, state.delta);
    const Eigen::VectorXd zp = detection_logit_vector(state.V, state.zeta0, state.zeta);
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < n_tr; ++t) {
      const Triple& tp = tr.triples[t];
      RngStream g =
          root.fork(iter, block, triple_unit(tp.animal, tp.plant, tp.study, n_f, n_p));
      const double pf = clamp_prob(logistic(zf[tp.animal]));
      const double qp = clamp_prob(logistic(zp[tp.plant]));
      const TrialDraw td = draw_trial(tr.a[t], pf, qp, zf[tp.animal], zp[tp.plant], g);
      tr.d_f[t] = td.d_f;
      tr.d_p[t] = td.d_p;
      ws.trial_omega_f[t] = td.omega_f;
      ws.trial_omega_p[t] = td.omega_p;
    }
    reduce_trial_sums(state, ws);
  }

  void update_occurrence(const RngStream& root, int iter, LatentState& state,
                         SweepWorkspace& ws, Variant variant,
                         const Hyperparams& hp) override {
    update_occurrence_side(root, iter, Side::animal, state, ws, variant, hp);
    update_occurrence_side(root, iter, Side::plant, state, ws, variant, hp);
  }

  double log_likelihood(const LatentState& state) const override {
    const ObservedTensor& A = bundle_.A;
    const FocusTensor& F = bundle_.F;
    for (const Triple& t : A.entries()) {
      if (!F.at(t.animal, t.plant, t.study) || state.L(t.animal, t.plant) == 0 ||
          state.O_F(t.animal, t.study) == 0 || state.O_P(t.plant, t.study) == 0) {
        return -std::numeric_limits<double>::infinity();
      }
    }
    double acc = 0.0;
    for (int s = 0; s < F.n_studies(); ++s) {
      const StudyFocus& sf = F.studies()[s];
      if (sf.kind == StudyKind::pair) {
        int cur = -1;
        double row = 0.0;
        for (const auto& pr : sf.prs) {
          const int i = pr.first;
          const int j = pr.second;
          if (i != cur) {
            acc += row;
            row = 0.0;
            cur = i;
          }
          if (state.O_F(i, s) == 0 || state.O_P(j, s) == 0 || state.L(i, j) == 0 ||
              bundle_.F.pair_excluded(i, j)) {
            continue;
          }
          const double pq = clamp_prob(state.p(i) * state.q(j));
          row += A.contains(i, j, s) ? std::log(pq) : std::log1p(-pq);
        }
        acc += row;
        continue;
      }
      for (const std::int32_t i : sf.animals) {
        if (state.O_F(i, s) == 0) continue;
        double row = 0.0;
        for (const std::int32_t j : sf.plants) {
          if (state.L(i, j) == 0 || state.O_P(j, s) == 0 ||
              bundle_.F.pair_excluded(i, j)) {
            continue;
          }
          const double pq = clamp_prob(state.p(i) * state.q(j));
          row += A.contains(i, j, s) ? std::log(pq) : std::log1p(-pq);
        }
        acc += row;
      }
    }
    return acc;
  }

 private:
  void draw_trait_aux_side(const RngStream& root, int iter, Side side,
                           const LatentState& state, SweepWorkspace& ws) const {
    const bool animal = (side == Side::animal);
    const Eigen::MatrixXd& own = animal ? state.U : state.V;
    const std::vector<TraitKind>& kinds =
        animal ? bundle_.traits.x_kinds : bundle_.traits.w_kinds;
    const int p_tr = static_cast<int>(kinds.size());
    if (p_tr == 0) return;
    const Eigen::VectorXd& b0 = animal ? state.beta0 : state.gamma0;
    const Eigen::MatrixXd& bmat = animal ? state.beta : state.gamma;
    Eigen::MatrixXd& obin = animal ? ws.omega_xbin : ws.omega_wbin;
    const StreamBlock block = animal ? StreamBlock::kOmegaTraitX : StreamBlock::kOmegaTraitW;
    const Eigen::MatrixXd pred = predictor_matrix(own, b0, bmat);
    const std::int64_t total = static_cast<std::int64_t>(own.rows()) * p_tr;
#pragma omp parallel for schedule(static)
    for (std::int64_t u = 0; u < total; ++u) {
      const int l = static_cast<int>(u % p_tr);
      if (kinds[l] != TraitKind::binary) continue;
      const int i = static_cast<int>(u / p_tr);
      RngStream g = root.fork(iter, block, u);
      obin(i, l) = sample_pg1(pred(i, l), g);
    }
  }

  // One side's occurrence pass; cells within a side are conditionally
  // independent. The animal pass runs first, so the plant pass sees the
  // refreshed animal occupancy.
  void update_occurrence_side(const RngStream& root, int iter, Side side,
                              LatentState& state, SweepWorkspace& ws, Variant variant,
                              const Hyperparams& hp) const {
    const bool animal = (side == Side::animal);
    const int n = animal ? state.n_animals() : state.n_plants();
    const int n_s = state.n_studies();

    // Per-cell log-probability that every exposed true link went unobserved.
    Eigen::MatrixXd ll1 = Eigen::MatrixXd::Zero(n, n_s);
    for (int s = 0; s < n_s; ++s) {
      const StudyFocus& sf = bundle_.F.studies()[s];
      if (sf.kind == StudyKind::pair) {
        for (const auto& pr : sf.prs) {
          const int i = pr.first;
          const int j = pr.second;
          if (!state.L(i, j) || bundle_.F.pair_excluded(i, j)) continue;
          if (animal) {
            if (state.O_P(j, s)) {
              ll1(i, s) += std::log1p(-clamp_prob(state.p(i) * state.q(j)));
            }
          } else if (state.O_F(i, s)) {
            ll1(j, s) += std::log1p(-clamp_prob(state.p(i) * state.q(j)));
          }
        }
        continue;
      }
      if (animal) {
        for (const std::int32_t i : sf.animals) {
          double row = 0.0;
          for (const std::int32_t j : sf.plants) {
            if (state.O_P(j, s) && state.L(i, j) && !bundle_.F.pair_excluded(i, j)) {
              row += std::log1p(-clamp_prob(state.p(i) * state.q(j)));
            }
          }
          ll1(i, s) = row;
        }
      } else {
        for (const std::int32_t j : sf.plants) {
          double row = 0.0;
          for (const std::int32_t i : sf.animals) {
            if (state.O_F(i, s) && state.L(i, j) && !bundle_.F.pair_excluded(i, j)) {
              row += std::log1p(-clamp_prob(state.p(i) * state.q(j)));
            }
          }
          ll1(j, s) = row;
        }
      }
    }

    const Eigen::MatrixXd& prior = animal ? bundle_.occ_prior.P_OF : bundle_.occ_prior.P_OP;
    BinMatrix& occ = animal ? state.O_F : state.O_P;
    Eigen::MatrixXd& pim = animal ? state.pi_F : state.pi_P;
    const StreamBlock block = animal ? StreamBlock::kOccAnimal : StreamBlock::kOccPlant;

    const std::int64_t total = static_cast<std::int64_t>(n) * n_s;
    std::vector<std::uint8_t> prop_flag;
    std::vector<std::uint8_t> acc_flag;
    if (variant == Variant::coil_plus) {
      prop_flag.assign(static_cast<std::size_t>(total), 0);
      acc_flag.assign(static_cast<std::size_t>(total), 0);
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t u = 0; u < total; ++u) {
      const int i = static_cast<int>(u / n_s);
      const int s = static_cast<int>(u % n_s);
      const bool observed = animal ? bundle_.A.animal_observed_in(i, s)
                                   : bundle_.A.plant_observed_in(i, s);
      if (observed) continue;
      const double center = prior(i, s);
      if (variant == Variant::coil) {
        if (center <= 0.0 || center >= 1.0) continue;  // pinned by the prior
        RngStream g = root.fork(iter, block, u);
        occ(i, s) = occurrence_draw_fixed(center, ll1(i, s), g);
        continue;
      }
      RngStream g = root.fork(iter, block, u);
      prop_flag[static_cast<std::size_t>(u)] = 1;
      const OccMhResult res =
          occurrence_step_blocked(center, pim(i, s), occ(i, s), ll1(i, s), hp, g);
      if (res.accepted) {
        acc_flag[static_cast<std::size_t>(u)] = 1;
        pim(i, s) = res.pi;
        occ(i, s) = res.o;
      }
    }
    if (variant == Variant::coil_plus) {
      for (std::int64_t u = 0; u < total; ++u) {
        ws.occ_proposals += prop_flag[static_cast<std::size_t>(u)];
        ws.occ_accepts += acc_flag[static_cast<std::size_t>(u)];
      }
    }
  }
};

}  // namespace

std::unique_ptr<SamplerBackend> make_indexed_backend(const DataBundle& bundle) {
  return std::make_unique<IndexedBackend>(bundle);
}

std::unique_ptr<SamplerBackend> make_backend(BackendKind kind, const DataBundle& bundle) {
  if (kind == BackendKind::reference) return make_reference_backend(bundle);
  return make_indexed_backend(bundle);
}

}  // namespace biplink
