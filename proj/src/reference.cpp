// Serial reference backend: every gather is a dense triple loop over the
// membership test F.at(i, j, s), with no index structures and no worker
// threads. Draws consume the same per-unit streams as the indexed backend,
// so both produce bit-identical chains; the parity tests rely on that.

#include <cmath>
#include <cstdint>
#include <memory>

#include "backend_impl.hpp"
#include "biplink/kernels.hpp"

namespace biplink {

namespace {

class ReferenceBackend final : public SamplerBackend {
 public:
  explicit ReferenceBackend(const DataBundle& bundle) : SamplerBackend(bundle) {}

  const char* name() const override { return "reference"; }

  void draw_link_aux(const RngStream& root, int iter, SweepWorkspace& ws) override {
    const int n_f = static_cast<int>(ws.eta.rows());
    const int n_p = static_cast<int>(ws.eta.cols());
    for (int i = 0; i < n_f; ++i) {
      for (int j = 0; j < n_p; ++j) {
        RngStream g = root.fork(iter, StreamBlock::kOmegaLink,
                                static_cast<std::uint64_t>(i) * n_p + j);
        ws.omega_link(i, j) = sample_pg1(ws.eta(i, j), g);
      }
    }
  }

  void draw_trait_aux(const RngStream& root, int iter, const LatentState& state,
                      SweepWorkspace& ws) override {
    draw_trait_aux_side(root, iter, Side::animal, state, ws);
    draw_trait_aux_side(root, iter, Side::plant, state, ws);
  }

  void count_link_exposure(const LatentState& state, SweepWorkspace& ws) override {
    ws.m_link.setZero();
    for (int i = 0; i < state.n_animals(); ++i) {
      for (int j = 0; j < state.n_plants(); ++j) {
        for (int s = 0; s < state.n_studies(); ++s) {
          if (bundle_.F.at(i, j, s) && state.O_F(i, s) && state.O_P(j, s)) {
            ++ws.m_link(i, j);
          }
        }
      }
    }
  }

  void update_links(const RngStream& root, int iter, LatentState& state,
                    SweepWorkspace& ws) override {
    const int n_p = state.n_plants();
    for (int i = 0; i < state.n_animals(); ++i) {
      for (int j = 0; j < n_p; ++j) {
        if (bundle_.A.pair_observed(i, j)) {
          state.L(i, j) = 1;
          ws.r_link(i, j) = 1.0;
          continue;
        }
        RngStream g = root.fork(iter, StreamBlock::kLinks,
                                static_cast<std::uint64_t>(i) * n_p + j);
        const double r =
            link_probability(ws.eta(i, j), state.p[i], state.q[j], ws.m_link(i, j));
        ws.r_link(i, j) = r;
        state.L(i, j) = draw_link(r, g);
      }
    }
  }

  void refresh_trials(const RngStream& root, int iter, StreamBlock block,
                      LatentState& state, SweepWorkspace& ws) override {
    const int n_f = state.n_animals();
    const int n_p = state.n_plants();
    DetectionTrials& tr = state.trials;
    tr.clear();
    for (int s = 0; s < state.n_studies(); ++s) {
      for (int i = 0; i < n_f; ++i) {
        for (int j = 0; j < n_p; ++j) {
          if (bundle_.F.at(i, j, s) && state.O_F(i, s) && state.O_P(j, s) &&
              state.L(i, j)) {
            tr.triples.push_back({i, j, s});
            tr.a.push_back(bundle_.A.contains(i, j, s) ? 1 : 0);
          }
        }
      }
    }
    const std::size_t n_tr = tr.triples.size();
    tr.d_f.assign(n_tr, 0);
    tr.d_p.assign(n_tr, 0);
    ws.trial_omega_f.assign(n_tr, 0.0);
    ws.trial_omega_p.assign(n_tr, 0.0);
    const Eigen::VectorXd zf = detection_logit_vector(state.U, state.delta0, state.delta);
    const Eigen::VectorXd zp = detection_logit_vector(state.V, state.zeta0, state.zeta);
    for (std::size_t t = 0; t < n_tr; ++t) {
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
    return biplink::log_likelihood(state, bundle_.A, bundle_.F);
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
    for (int i = 0; i < static_cast<int>(own.rows()); ++i) {
      for (int l = 0; l < p_tr; ++l) {
        if (kinds[l] != TraitKind::binary) continue;
        RngStream g = root.fork(iter, block, static_cast<std::uint64_t>(i) * p_tr + l);
        obin(i, l) = sample_pg1(pred(i, l), g);
      }
    }
  }

  void update_occurrence_side(const RngStream& root, int iter, Side side,
                              LatentState& state, SweepWorkspace& ws, Variant variant,
                              const Hyperparams& hp) const {
    const bool animal = (side == Side::animal);
    const int n = animal ? state.n_animals() : state.n_plants();
    const int n_other = animal ? state.n_plants() : state.n_animals();
    const int n_s = state.n_studies();

    Eigen::MatrixXd ll1 = Eigen::MatrixXd::Zero(n, n_s);
    for (int c = 0; c < n; ++c) {
      for (int s = 0; s < n_s; ++s) {
        double row = 0.0;
        for (int k = 0; k < n_other; ++k) {
          const int i = animal ? c : k;
          const int j = animal ? k : c;
          const bool other_in = animal ? state.O_P(j, s) != 0 : state.O_F(i, s) != 0;
          if (bundle_.F.at(i, j, s) && other_in && state.L(i, j)) {
            row += std::log1p(-clamp_prob(state.p(i) * state.q(j)));
          }
        }
        ll1(c, s) = row;
      }
    }

    const Eigen::MatrixXd& prior = animal ? bundle_.occ_prior.P_OF : bundle_.occ_prior.P_OP;
    BinMatrix& occ = animal ? state.O_F : state.O_P;
    Eigen::MatrixXd& pim = animal ? state.pi_F : state.pi_P;
    const StreamBlock block = animal ? StreamBlock::kOccAnimal : StreamBlock::kOccPlant;

    for (int c = 0; c < n; ++c) {
      for (int s = 0; s < n_s; ++s) {
        const bool observed = animal ? bundle_.A.animal_observed_in(c, s)
                                     : bundle_.A.plant_observed_in(c, s);
        if (observed) continue;
        const double center = prior(c, s);
        const std::uint64_t u = static_cast<std::uint64_t>(c) * n_s + s;
        if (variant == Variant::coil) {
          if (center <= 0.0 || center >= 1.0) continue;
          RngStream g = root.fork(iter, block, u);
          occ(c, s) = occurrence_draw_fixed(center, ll1(c, s), g);
          continue;
        }
        RngStream g = root.fork(iter, block, u);
        ++ws.occ_proposals;
        const OccMhResult res =
            occurrence_step_blocked(center, pim(c, s), occ(c, s), ll1(c, s), hp, g);
        if (res.accepted) {
          ++ws.occ_accepts;
          pim(c, s) = res.pi;
          occ(c, s) = res.o;
        }
      }
    }
  }
};

}  // namespace

std::unique_ptr<SamplerBackend> make_reference_backend(const DataBundle& bundle) {
  return std::make_unique<ReferenceBackend>(bundle);
}

}  // namespace biplink
