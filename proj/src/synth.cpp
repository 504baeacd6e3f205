#include "biplink/synth.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biplink/focus.hpp"
#include "biplink/io.hpp"
#include "biplink/rng.hpp"
#include "biplink/truncnorm.hpp"

namespace biplink {

namespace {

constexpr std::uint64_t kSynthStream = 0x73796e78ull;

std::string label(const char* prefix, int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s%04d", prefix, k + 1);
  return buf;
}

Eigen::MatrixXd clade_blocks(int n, int size, double c) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
  for (int lo = 0; lo < n; lo += size) {
    const int hi = std::min(n, lo + size);
    for (int a = lo; a < hi; ++a)
      for (int b = lo; b < hi; ++b)
        if (a != b) C(a, b) = c;
  }
  return C;
}

Eigen::MatrixXd draw_factors(const Eigen::MatrixXd& C, double rho, int H, RngStream g) {
  const int n = static_cast<int>(C.rows());
  const Eigen::MatrixXd sigma =
      rho * C + (1.0 - rho) * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd chol = sigma.llt().matrixL();
  Eigen::MatrixXd F(n, H);
  Eigen::VectorXd z(n);
  for (int h = 0; h < H; ++h) {
    for (int i = 0; i < n; ++i) z[i] = g.normal();
    F.col(h) = chol * z;
  }
  return F;
}

double proximity_rate(const SynthConfig& cfg, const StudyMeta& a, const StudyMeta& b) {
  if (a.zone != b.zone) return cfg.occ_diff_zone;
  if (a.country != b.country) return cfg.occ_same_zone;
  if (a.site != b.site) return cfg.occ_same_country;
  return cfg.occ_same_site;
}

// Uniform pick of an occupant of study s, forcing occupancy of a uniform
// species when nobody is there to be studied.
int pick_occupant(Eigen::MatrixXd& O, int s, RngStream& g) {
  std::vector<int> here;
  for (int i = 0; i < O.rows(); ++i)
    if (O(i, s) == 1.0) here.push_back(i);
  if (here.empty()) {
    const int i = std::min<int>(static_cast<int>(O.rows()) - 1,
                                static_cast<int>(g.uniform01() * O.rows()));
    O(i, s) = 1.0;
    return i;
  }
  return here[std::min<int>(static_cast<int>(here.size()) - 1,
                            static_cast<int>(g.uniform01() * here.size()))];
}

std::vector<int> keep_map(const std::vector<char>& keep) {
  std::vector<int> map(keep.size(), -1);
  int next = 0;
  for (std::size_t k = 0; k < keep.size(); ++k)
    if (keep[k]) map[k] = next++;
  return map;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_F < 1 || n_P < 1 || n_S < 1) throw std::invalid_argument("synth: dimensions must be >= 1");
  if (H_true < 1) throw std::invalid_argument("synth: H_true must be >= 1");
  if (!(rho_u_true >= 0.0) || rho_u_true >= 1.0 || !(rho_v_true >= 0.0) || rho_v_true >= 1.0)
    throw std::invalid_argument("synth: rho_true must lie in [0, 1)");
  if (clade_size < 1) throw std::invalid_argument("synth: clade_size must be >= 1");
  if (clade_corr < 0.0 || clade_corr > 1.0)
    throw std::invalid_argument("synth: clade_corr must lie in [0, 1]");
  if (det_logit_min > det_logit_max)
    throw std::invalid_argument("synth: detection logit range is inverted");
  if (!(trait_noise_sd > 0.0)) throw std::invalid_argument("synth: trait_noise_sd must be positive");
  const double fracs[] = {frac_zoocentric, frac_phytocentric, frac_network, frac_pair};
  double sum = 0.0;
  for (double f : fracs) {
    if (f < 0.0) throw std::invalid_argument("synth: study kind fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("synth: study kind fractions must sum to 1");
  for (double r : {occ_same_site, occ_same_country, occ_same_zone, occ_diff_zone})
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("synth: occurrence rates must lie in [0, 1]");
  if (n_zones < 1 || countries_per_zone < 1 || sites_per_country < 1)
    throw std::invalid_argument("synth: geography counts must be >= 1");
}

SynthResult generate(const SynthConfig& cfg) {
  cfg.validate();
  const RngStream root(cfg.seed, kSynthStream);
  const int nF = cfg.n_F, nP = cfg.n_P, nS = cfg.n_S, H = cfg.H_true;

  // Studies: geography and kind mix.
  RngStream g_geo = root.fork(1);
  std::vector<StudyMeta> metas(nS);
  for (int s = 0; s < nS; ++s) {
    StudyMeta& m = metas[s];
    m.id = label("S", s);
    const int zi = std::min(cfg.n_zones - 1, static_cast<int>(g_geo.uniform01() * cfg.n_zones));
    const int ci = std::min(cfg.countries_per_zone - 1,
                            static_cast<int>(g_geo.uniform01() * cfg.countries_per_zone));
    const int si = std::min(cfg.sites_per_country - 1,
                            static_cast<int>(g_geo.uniform01() * cfg.sites_per_country));
    m.zone = "Z" + std::to_string(zi + 1);
    m.country = m.zone + "C" + std::to_string(ci + 1);
    m.site = m.country + "S" + std::to_string(si + 1);
    const double u = g_geo.uniform01();
    if (u < cfg.frac_zoocentric)
      m.kind = StudyKind::zoocentric;
    else if (u < cfg.frac_zoocentric + cfg.frac_phytocentric)
      m.kind = StudyKind::phytocentric;
    else if (u < cfg.frac_zoocentric + cfg.frac_phytocentric + cfg.frac_network)
      m.kind = StudyKind::network;
    else
      m.kind = StudyKind::pair;
  }

  // Latent factors, links, detection.
  const Eigen::MatrixXd CA = clade_blocks(nF, cfg.clade_size, cfg.clade_corr);
  const Eigen::MatrixXd CP = clade_blocks(nP, cfg.clade_size, cfg.clade_corr);
  const Eigen::MatrixXd U = draw_factors(CA, cfg.rho_u_true, H, root.fork(2));
  const Eigen::MatrixXd V = draw_factors(CP, cfg.rho_v_true, H, root.fork(3));

  Eigen::MatrixXd theta(nF, nP);
  Eigen::MatrixXd L(nF, nP);
  RngStream g_link = root.fork(4);
  for (int i = 0; i < nF; ++i) {
    for (int j = 0; j < nP; ++j) {
      theta(i, j) = logistic(cfg.lambda0_true + cfg.lambda_true * U.row(i).dot(V.row(j)));
      L(i, j) = g_link.bernoulli(theta(i, j)) ? 1.0 : 0.0;
    }
  }

  RngStream g_det = root.fork(5);
  Eigen::VectorXd p(nF), q(nP);
  const double span = cfg.det_logit_max - cfg.det_logit_min;
  for (int i = 0; i < nF; ++i) p[i] = logistic(cfg.det_logit_min + span * g_det.uniform01());
  for (int j = 0; j < nP; ++j) q[j] = logistic(cfg.det_logit_min + span * g_det.uniform01());

  // Occurrence: each species occupies a home study and decays outward.
  RngStream g_occ = root.fork(6);
  Eigen::MatrixXd O_F = Eigen::MatrixXd::Zero(nF, nS);
  Eigen::MatrixXd O_P = Eigen::MatrixXd::Zero(nP, nS);
  for (int i = 0; i < nF; ++i) {
    const int home = std::min(nS - 1, static_cast<int>(g_occ.uniform01() * nS));
    for (int s = 0; s < nS; ++s) {
      const double r = s == home ? 1.0 : proximity_rate(cfg, metas[s], metas[home]);
      O_F(i, s) = g_occ.bernoulli(r) ? 1.0 : 0.0;
    }
    O_F(i, home) = 1.0;
  }
  for (int j = 0; j < nP; ++j) {
    const int home = std::min(nS - 1, static_cast<int>(g_occ.uniform01() * nS));
    for (int s = 0; s < nS; ++s) {
      const double r = s == home ? 1.0 : proximity_rate(cfg, metas[s], metas[home]);
      O_P(j, s) = g_occ.bernoulli(r) ? 1.0 : 0.0;
    }
    O_P(j, home) = 1.0;
  }

  // Focal designs. Zoocentric studies target one focal animal; pair studies
  // list a handful of directed species pairs.
  RngStream g_focal = root.fork(7);
  std::vector<StudyFocus> design(nS);
  for (int s = 0; s < nS; ++s) {
    StudyFocus& f = design[s];
    f.kind = metas[s].kind;
    switch (f.kind) {
      case StudyKind::zoocentric: {
        f.animals = {pick_occupant(O_F, s, g_focal)};
        f.plants.resize(nP);
        for (int j = 0; j < nP; ++j) f.plants[j] = j;
        break;
      }
      case StudyKind::phytocentric: {
        f.plants = {pick_occupant(O_P, s, g_focal)};
        f.animals.resize(nF);
        for (int i = 0; i < nF; ++i) f.animals[i] = i;
        break;
      }
      case StudyKind::network: {
        f.animals.resize(nF);
        for (int i = 0; i < nF; ++i) f.animals[i] = i;
        f.plants.resize(nP);
        for (int j = 0; j < nP; ++j) f.plants[j] = j;
        break;
      }
      case StudyKind::pair: {
        const int k = 1 + std::min(3, static_cast<int>(g_focal.uniform01() * 4));
        std::set<std::pair<int, int>> uniq;
        for (int t = 0; t < k; ++t)
          uniq.emplace(pick_occupant(O_F, s, g_focal), pick_occupant(O_P, s, g_focal));
        for (const auto& [i, j] : uniq) f.prs.emplace_back(i, j);
        break;
      }
    }
  }
  // Detection records over the exposed design.
  RngStream g_rec = root.fork(8);
  std::vector<Triple> records;
  double expected = 0.0, variance = 0.0;
  const auto try_cell = [&](int i, int j, int s) {
    const double w = L(i, j) * O_F(i, s) * O_P(j, s) * p[i] * q[j];
    expected += w;
    variance += w * (1.0 - w);
    const bool hit = g_rec.bernoulli(w);
    if (hit)
      records.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
                         static_cast<std::int32_t>(s)});
  };
  for (int s = 0; s < nS; ++s) {
    const StudyFocus& f = design[s];
    if (f.kind == StudyKind::pair) {
      for (const auto& [i, j] : f.prs) try_cell(i, j, s);
    } else {
      for (int i : f.animals)
        for (int j : f.plants) try_cell(i, j, s);
    }
  }

  // Trait columns: a planted factor-driven signal, a pure-noise decoy, and a
  // binary column thresholded on the second factor.
  RngStream g_trait = root.fork(9);
  const int hb = std::min(1, H - 1);
  Eigen::MatrixXd X(nF, 3), W(nP, 3);
  for (int i = 0; i < nF; ++i) {
    X(i, 0) = cfg.trait_effect * U(i, 0) + cfg.trait_noise_sd * g_trait.normal();
    X(i, 1) = g_trait.normal();
    X(i, 2) = g_trait.bernoulli(logistic(0.5 * cfg.trait_effect * U(i, hb))) ? 1.0 : 0.0;
  }
  for (int j = 0; j < nP; ++j) {
    W(j, 0) = cfg.trait_effect * V(j, 0) + cfg.trait_noise_sd * g_trait.normal();
    W(j, 1) = g_trait.normal();
    W(j, 2) = g_trait.bernoulli(logistic(0.5 * cfg.trait_effect * V(j, hb))) ? 1.0 : 0.0;
  }

  // Restrict to species and studies that produced at least one record, as
  // ingestion of the emitted files would.
  std::vector<char> keepA(nF, 0), keepP(nP, 0), keepS(nS, 0);
  for (const Triple& t : records) {
    keepA[t.animal] = 1;
    keepP[t.plant] = 1;
    keepS[t.study] = 1;
  }
  const std::vector<int> mapA = keep_map(keepA), mapP = keep_map(keepP), mapS = keep_map(keepS);
  const int nFr = mapA.empty() ? 0 : *std::max_element(mapA.begin(), mapA.end()) + 1;
  const int nPr = mapP.empty() ? 0 : *std::max_element(mapP.begin(), mapP.end()) + 1;
  const int nSr = mapS.empty() ? 0 : *std::max_element(mapS.begin(), mapS.end()) + 1;

  SynthResult out;
  DataBundle& b = out.bundle;
  for (int i = 0; i < nF; ++i)
    if (keepA[i]) b.species.intern_animal(label("A", i));
  for (int j = 0; j < nP; ++j)
    if (keepP[j]) b.species.intern_plant(label("P", j));

  std::vector<Triple> rec_r;
  rec_r.reserve(records.size());
  for (const Triple& t : records)
    rec_r.push_back({mapA[t.animal], mapP[t.plant], mapS[t.study]});
  b.A = ObservedTensor(nFr, nPr, nSr, std::move(rec_r));
  for (int s = 0; s < nS; ++s)
    if (keepS[s]) b.studies.push_back(metas[s]);

  std::vector<StudyFocus> design_r;
  for (int s = 0; s < nS; ++s) {
    if (!keepS[s]) continue;
    StudyFocus f;
    f.kind = design[s].kind;
    for (int i : design[s].animals)
      if (keepA[i]) f.animals.push_back(mapA[i]);
    for (int j : design[s].plants)
      if (keepP[j]) f.plants.push_back(mapP[j]);
    for (const auto& [i, j] : design[s].prs)
      if (keepA[i] && keepP[j]) f.prs.emplace_back(mapA[i], mapP[j]);
    design_r.push_back(std::move(f));
  }
  b.F = FocusTensor(nFr, nPr, std::move(design_r));

  b.traits.X.resize(nFr, 3);
  b.traits.W.resize(nPr, 3);
  for (int i = 0; i < nF; ++i)
    if (keepA[i]) b.traits.X.row(mapA[i]) = X.row(i);
  for (int j = 0; j < nP; ++j)
    if (keepP[j]) b.traits.W.row(mapP[j]) = W.row(j);
  for (int c = 0; c < 2; ++c) {
    if (nFr > 1 && b.traits.X.col(c).maxCoeff() > b.traits.X.col(c).minCoeff())
      standardize_column(b.traits.X.col(c), "animal trait");
    if (nPr > 1 && b.traits.W.col(c).maxCoeff() > b.traits.W.col(c).minCoeff())
      standardize_column(b.traits.W.col(c), "plant trait");
  }
  b.traits.x_kinds = {TraitKind::continuous, TraitKind::continuous, TraitKind::binary};
  b.traits.w_kinds = b.traits.x_kinds;
  b.traits.x_names = {"signal_cont", "null_cont", "signal_bin"};
  b.traits.w_names = b.traits.x_names;

  b.phylo.C_animal.resize(nFr, nFr);
  b.phylo.C_plant.resize(nPr, nPr);
  for (int i = 0; i < nF; ++i) {
    if (!keepA[i]) continue;
    for (int k = 0; k < nF; ++k)
      if (keepA[k]) b.phylo.C_animal(mapA[i], mapA[k]) = CA(i, k);
  }
  for (int j = 0; j < nP; ++j) {
    if (!keepP[j]) continue;
    for (int k = 0; k < nP; ++k)
      if (keepP[k]) b.phylo.C_plant(mapP[j], mapP[k]) = CP(j, k);
  }
  b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::expert());

  SynthTruth& t = out.truth;
  t.L.resize(nFr, nPr);
  t.theta.resize(nFr, nPr);
  t.O_F.resize(nFr, nSr);
  t.O_P.resize(nPr, nSr);
  t.p.resize(nFr);
  t.q.resize(nPr);
  t.U.resize(nFr, H);
  t.V.resize(nPr, H);
  for (int i = 0; i < nF; ++i) {
    if (!keepA[i]) continue;
    const int ir = mapA[i];
    t.p[ir] = p[i];
    t.U.row(ir) = U.row(i);
    for (int j = 0; j < nP; ++j)
      if (keepP[j]) {
        t.L(ir, mapP[j]) = L(i, j);
        t.theta(ir, mapP[j]) = theta(i, j);
      }
    for (int s = 0; s < nS; ++s)
      if (keepS[s]) t.O_F(ir, mapS[s]) = O_F(i, s);
  }
  for (int j = 0; j < nP; ++j) {
    if (!keepP[j]) continue;
    const int jr = mapP[j];
    t.q[jr] = q[j];
    t.V.row(jr) = V.row(j);
    for (int s = 0; s < nS; ++s)
      if (keepS[s]) t.O_P(jr, mapS[s]) = O_P(j, s);
  }
  t.rho_u = cfg.rho_u_true;
  t.rho_v = cfg.rho_v_true;
  t.expected_records = expected;
  t.records_variance = variance;
  return out;
}

void write_dataset(const std::string& dir, const SynthResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const DataBundle& b = r.bundle;
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };

  write_interactions_csv(path("interactions.csv"), b.species, b.A, b.studies);
  write_studies_csv(path("studies.csv"), b.studies);
  write_traits_csv(path("animal_traits.csv"), b.traits.X, b.species.animal_labels, b.traits.x_names);
  write_traits_csv(path("plant_traits.csv"), b.traits.W, b.species.plant_labels, b.traits.w_names);
  write_labeled_matrix(path("animal_phylo.csv"), b.phylo.C_animal, b.species.animal_labels,
                       b.species.animal_labels, "species_id");
  write_labeled_matrix(path("plant_phylo.csv"), b.phylo.C_plant, b.species.plant_labels,
                       b.species.plant_labels, "species_id");

  std::vector<std::string> study_ids;
  for (const StudyMeta& m : b.studies) study_ids.push_back(m.id);
  write_labeled_matrix(path("truth_L.csv"), r.truth.L, b.species.animal_labels,
                       b.species.plant_labels, "animal_id");
  write_labeled_matrix(path("truth_O_F.csv"), r.truth.O_F, b.species.animal_labels, study_ids,
                       "animal_id");
  write_labeled_matrix(path("truth_O_P.csv"), r.truth.O_P, b.species.plant_labels, study_ids,
                       "plant_id");
  write_labeled_matrix(path("truth_p.csv"), r.truth.p, b.species.animal_labels, {"p"},
                       "animal_id");
  write_labeled_matrix(path("truth_q.csv"), r.truth.q, b.species.plant_labels, {"q"},
                       "plant_id");
}

TinyMarginals exact_posterior_tiny(const DataBundle& bundle, const LatentState& state,
                                   Variant variant, double occ_prior_sd) {
  const int nF = bundle.A.n_animals(), nP = bundle.A.n_plants(), nS = bundle.A.n_studies();
  const int bits_l = nF * nP, bits_f = nF * nS, bits_p = nP * nS;
  const int bits = bits_l + bits_f + bits_p;
  if (bits > 12)
    throw std::invalid_argument("exact_posterior_tiny: state space exceeds 2^12 configurations");

  Eigen::MatrixXd theta(nF, nP);
  for (int i = 0; i < nF; ++i)
    for (int j = 0; j < nP; ++j) theta(i, j) = logistic(interaction_logit(state, i, j));

  const bool plus = variant == Variant::coil_plus;
  Eigen::MatrixXd eff_f(nF, nS), eff_p(nP, nS);
  for (int s = 0; s < nS; ++s) {
    for (int i = 0; i < nF; ++i) {
      const double c = bundle.occ_prior.P_OF(i, s);
      eff_f(i, s) = plus ? truncnorm01_mean(c, occ_prior_sd) : c;
    }
    for (int j = 0; j < nP; ++j) {
      const double c = bundle.occ_prior.P_OP(j, s);
      eff_p(j, s) = plus ? truncnorm01_mean(c, occ_prior_sd) : c;
    }
  }

  struct Cell {
    int i, j, s;
    bool observed;
  };
  std::vector<Cell> exposed;
  for (int s = 0; s < nS; ++s)
    for (int i = 0; i < nF; ++i)
      for (int j = 0; j < nP; ++j)
        if (bundle.F.at(i, j, s)) exposed.push_back({i, j, s, bundle.A.contains(i, j, s)});

  TinyMarginals out{Eigen::MatrixXd::Zero(nF, nP), Eigen::MatrixXd::Zero(nF, nS),
                    Eigen::MatrixXd::Zero(nP, nS)};
  double z_total = 0.0;
  const auto bit = [](std::uint32_t m, int k) { return (m >> k) & 1u; };
  for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
    double w = 1.0;
    for (int k = 0; k < bits_l && w > 0.0; ++k) {
      const double th = theta(k / nP, k % nP);
      w *= bit(mask, k) ? th : 1.0 - th;
    }
    for (int k = 0; k < bits_f && w > 0.0; ++k) {
      const double e = eff_f(k / nS, k % nS);
      w *= bit(mask, bits_l + k) ? e : 1.0 - e;
    }
    for (int k = 0; k < bits_p && w > 0.0; ++k) {
      const double e = eff_p(k / nS, k % nS);
      w *= bit(mask, bits_l + bits_f + k) ? e : 1.0 - e;
    }
    if (w <= 0.0) continue;
    for (const Cell& c : exposed) {
      const double lam = bit(mask, c.i * nP + c.j) * bit(mask, bits_l + c.i * nS + c.s) *
                         bit(mask, bits_l + bits_f + c.j * nS + c.s) * state.p[c.i] *
                         state.q[c.j];
      w *= c.observed ? lam : 1.0 - lam;
      if (w <= 0.0) break;
    }
    if (w <= 0.0) continue;
    z_total += w;
    for (int k = 0; k < bits_l; ++k)
      if (bit(mask, k)) out.link(k / nP, k % nP) += w;
    for (int k = 0; k < bits_f; ++k)
      if (bit(mask, bits_l + k)) out.occ_f(k / nS, k % nS) += w;
    for (int k = 0; k < bits_p; ++k)
      if (bit(mask, bits_l + bits_f + k)) out.occ_p(k / nS, k % nS) += w;
  }
  if (z_total <= 0.0)
    throw std::runtime_error("exact_posterior_tiny: no configuration is consistent with the records");
  out.link /= z_total;
  out.occ_f /= z_total;
  out.occ_p /= z_total;
  return out;
}

}  // namespace biplink
