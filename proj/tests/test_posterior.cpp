#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "biplink/focus.hpp"
#include "biplink/gibbs.hpp"
#include "biplink/posterior.hpp"
#include "biplink/rng.hpp"
#include "biplink/types.hpp"

using namespace biplink;

namespace {

Eigen::MatrixXd mat2(double a00, double a01, double a10, double a11) {
  Eigen::MatrixXd m(2, 2);
  m << a00, a01, a10, a11;
  return m;
}

// Two chains of two retained samples over a 2x2 pair grid with (0,0) the only
// observed pair. Cell means: 1.0, 0.475, 0.8, 0.6.
std::vector<ChainOutput> toy_outputs() {
  std::vector<ChainOutput> outs(2);
  outs[0].prob_samples = {mat2(1.0, 0.8, 0.9, 0.5), mat2(1.0, 0.4, 0.7, 0.7)};
  outs[1].prob_samples = {mat2(1.0, 0.5, 0.8, 0.6), mat2(1.0, 0.2, 0.8, 0.6)};
  for (auto& o : outs) {
    o.occ_f_samples.assign(o.prob_samples.size(), Eigen::MatrixXd::Zero(2, 1));
    o.occ_p_samples.assign(o.prob_samples.size(), Eigen::MatrixXd::Zero(2, 1));
    o.variant = Variant::coil;
  }
  return outs;
}

ObservedTensor toy_tensor() { return ObservedTensor(2, 2, 1, {{0, 0, 0}}); }

// Three studies: two same-country sites in one zone plus an empty network
// study on another continent, so the proximity tiers split into same_study,
// same_country_only, and different_zone, leaving same_site and same_zone_only
// unpopulated.
DataBundle zoned_bundle() {
  DataBundle b;
  b.species.intern_animal("a0");
  b.species.intern_animal("a1");
  b.species.intern_plant("p0");
  b.species.intern_plant("p1");
  b.A = ObservedTensor(2, 2, 3, {{0, 0, 0}, {1, 1, 1}});
  b.studies = {
      {"s0", StudyKind::network, "x", "BR", "neotropic"},
      {"s1", StudyKind::network, "y", "BR", "neotropic"},
      {"s2", StudyKind::network, "z", "AU", "australasia"},
  };
  b.F = derive_focus(b.A, b.studies, nullptr);
  b.phylo = PhyloCorrelation::identity(2, 2);
  return b;
}

std::vector<ChainOutput> short_fit(const DataBundle& b, Variant v, int seed) {
  ChainConfig cfg;
  cfg.n_iter = 160;
  cfg.n_burn = 80;
  cfg.thin_keep_fraction = 0.25;
  cfg.n_chains = 1;
  cfg.seed = seed;
  cfg.sampler_variant = v;
  cfg.hyperparams.H = 3;
  return run_chains(b, cfg);
}

bool same_allowing_nan(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j) && !(std::isnan(a(i, j)) && std::isnan(b(i, j)))) return false;
  return true;
}

bool same_state(const LatentState& a, const LatentState& b) {
  return a.U == b.U && a.V == b.V && a.lambda0 == b.lambda0 && a.lambda == b.lambda &&
         a.mgp_deltas == b.mgp_deltas && a.rho_U == b.rho_U && a.rho_V == b.rho_V &&
         a.p == b.p && a.q == b.q && a.L == b.L && a.O_F == b.O_F && a.O_P == b.O_P &&
         a.pi_F == b.pi_F && a.pi_P == b.pi_P;
}

}  // namespace

TEST_CASE("scale reduction factor: closed-form cases") {
  SUBCASE("exact copies give exactly one") {
    std::vector<double> base(200);
    for (int t = 0; t < 200; ++t) base[t] = std::sin(0.37 * t) + 0.01 * t;  // drifting, not constant
    const double r = gelman_rubin({base, base, base});
    CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("disjoint means blow up") {
    RngStream g(4021, 0);
    std::vector<double> a(200), b(200);
    for (int t = 0; t < 200; ++t) {
      a[t] = g.normal();
      b[t] = 10.0 + g.normal();
    }
    CHECK(gelman_rubin({a, b}) > 2.0);
  }

  SUBCASE("well-mixed iid chains stay under 1.05") {
    RngStream g(555, 0);
    std::vector<std::vector<double>> chains(4, std::vector<double>(1000));
    for (auto& c : chains)
      for (auto& x : c) x = g.normal();
    const double r = gelman_rubin(chains);
    CHECK(r >= 1.0);
    CHECK(r < 1.05);
  }

  SUBCASE("constant chains") {
    const std::vector<double> c3(50, 3.0), c3b(50, 3.0), c7(50, 7.0);
    CHECK(gelman_rubin({c3, c3b, c3b}) == 1.0);
    CHECK(std::isinf(gelman_rubin({c3, c7})));
  }

  SUBCASE("input validation") {
    const std::vector<double> ten(10, 1.0), nine(9, 1.0), eleven(11, 1.0);
    CHECK_THROWS_AS(gelman_rubin({ten}), std::invalid_argument);
    CHECK_THROWS_AS(gelman_rubin({nine, nine}), std::invalid_argument);
    CHECK_THROWS_AS(gelman_rubin({ten, eleven}), std::invalid_argument);
  }
}

TEST_CASE("pooled link summaries") {
  const ObservedTensor A = toy_tensor();

  SUBCASE("means, counts, and prevalence by hand") {
    const PosteriorSummary s = summarize(toy_outputs(), A);
    CHECK(s.n_chains == 2);
    CHECK(s.n_samples == 2);
    CHECK(s.mean_prob(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.mean_prob(0, 1) == doctest::Approx(0.475).epsilon(1e-12));
    CHECK(s.mean_prob(1, 0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(s.mean_prob(1, 1) == doctest::Approx(0.6).epsilon(1e-12));
    REQUIRE(s.thresholds == std::vector<double>{0.5, 0.75});
    // above 0.5: three cells, two of them never observed; above 0.75: two cells, one unobserved
    CHECK(s.new_link_counts == std::vector<long>{2, 1});
    CHECK(s.prevalence[0] == doctest::Approx(0.75));
    CHECK(s.prevalence[1] == doctest::Approx(0.5));
    CHECK(s.occ_tier_table.size() == 0);  // no study metadata supplied
  }

  SUBCASE("identical samples reproduce the sample") {
    const Eigen::MatrixXd m = mat2(1.0, 0.25, 0.75, 0.125);
    std::vector<ChainOutput> outs(2);
    for (auto& o : outs) {
      o.prob_samples = {m, m};
      o.occ_f_samples.assign(2, Eigen::MatrixXd::Zero(2, 1));
      o.occ_p_samples.assign(2, Eigen::MatrixXd::Zero(2, 1));
    }
    const PosteriorSummary s = summarize(outs, A);
    CHECK(s.mean_prob == m);
    CHECK(s.mean_prob(0, 0) == 1.0);  // the observed pair stays at certainty
  }

  SUBCASE("invariant to chain order and sample permutation") {
    auto outs = toy_outputs();
    const PosteriorSummary s1 = summarize(outs, A);
    std::swap(outs[0], outs[1]);
    std::swap(outs[0].prob_samples[0], outs[0].prob_samples[1]);
    const PosteriorSummary s2 = summarize(outs, A);
    CHECK((s1.mean_prob - s2.mean_prob).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s1.new_link_counts == s2.new_link_counts);
    CHECK(s1.prevalence == s2.prevalence);
  }

  SUBCASE("prevalence is non-increasing in the threshold") {
    std::vector<double> grid;
    for (double t = 0.05; t < 1.0; t += 0.05) grid.push_back(t);
    const PosteriorSummary s = summarize(toy_outputs(), A, nullptr, grid);
    for (std::size_t k = 1; k < s.prevalence.size(); ++k) CHECK(s.prevalence[k] <= s.prevalence[k - 1]);
  }

  SUBCASE("rejects inconsistent chain sets") {
    CHECK_THROWS_AS(summarize({}, A), std::invalid_argument);

    auto empty = toy_outputs();
    for (auto& o : empty) {
      o.prob_samples.clear();
      o.occ_f_samples.clear();
      o.occ_p_samples.clear();
    }
    CHECK_THROWS_AS(summarize(empty, A), std::invalid_argument);

    auto uneven = toy_outputs();
    uneven[1].prob_samples.pop_back();
    uneven[1].occ_f_samples.pop_back();
    uneven[1].occ_p_samples.pop_back();
    CHECK_THROWS_AS(summarize(uneven, A), std::invalid_argument);

    auto ragged = toy_outputs();
    ragged[1].prob_samples[1] = Eigen::MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(summarize(ragged, A), std::invalid_argument);

    auto mixed = toy_outputs();
    mixed[1].variant = Variant::coil_plus;
    CHECK_THROWS_AS(summarize(mixed, A), std::invalid_argument);

    auto lagging = toy_outputs();
    lagging[0].occ_f_samples.pop_back();
    CHECK_THROWS_AS(summarize(lagging, A), std::invalid_argument);

    const ObservedTensor wide(2, 3, 1, {{0, 0, 0}});
    CHECK_THROWS_AS(summarize(toy_outputs(), wide), std::invalid_argument);
  }
}

TEST_CASE("occurrence tier table") {
  const DataBundle base = zoned_bundle();

  SUBCASE("all-or-nothing prior pins every tier") {
    DataBundle b = base;
    b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::naive());
    const auto outs = short_fit(b, Variant::coil, 31);
    const Eigen::MatrixXd table = occurrence_tier_summary(outs, b.A, b.studies);
    REQUIRE(table.rows() == 5);
    REQUIRE(table.cols() == 2);
    for (int c = 0; c < 2; ++c) {
      CHECK(table(0, c) == 1.0);                                               // same study
      CHECK(table(static_cast<int>(Tier::same_country_only), c) == 0.0);      // prior mass 0
      CHECK(table(static_cast<int>(Tier::different_zone), c) == 0.0);
      CHECK(std::isnan(table(static_cast<int>(Tier::same_site), c)));          // no such cells
      CHECK(std::isnan(table(static_cast<int>(Tier::same_zone_only), c)));
    }
  }

  SUBCASE("graded prior: hard zeros stay zero without occurrence sampling") {
    DataBundle b = base;
    b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::expert());
    const auto outs = short_fit(b, Variant::coil, 32);
    const Eigen::MatrixXd table = occurrence_tier_summary(outs, b.A, b.studies);
    for (int c = 0; c < 2; ++c) {
      CHECK(table(0, c) == 1.0);
      CHECK(table(static_cast<int>(Tier::different_zone), c) == 0.0);
      const double mid = table(static_cast<int>(Tier::same_country_only), c);
      CHECK(mid > 0.0);  // prior mass 0.5, resampled each sweep
      CHECK(mid < 1.0);
    }
  }

  SUBCASE("occurrence sampling lets hard zeros escape") {
    DataBundle b = base;
    b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::expert());
    const auto outs = short_fit(b, Variant::coil_plus, 33);
    const Eigen::MatrixXd table = occurrence_tier_summary(outs, b.A, b.studies);
    for (int c = 0; c < 2; ++c) {
      CHECK(table(0, c) >= 0.999);  // held at (near-)certainty for observed cells
      CHECK(table(static_cast<int>(Tier::different_zone), c) > 0.0);
    }
  }

  SUBCASE("summary object carries the table when metadata is supplied") {
    DataBundle b = base;
    b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::expert());
    const auto outs = short_fit(b, Variant::coil, 34);
    const PosteriorSummary s = summarize(outs, b.A, &b.studies);
    REQUIRE(s.occ_tier_table.rows() == 5);
    CHECK(same_allowing_nan(s.occ_tier_table, occurrence_tier_summary(outs, b.A, b.studies)));
  }
}

TEST_CASE("sample archive round trip") {
  DataBundle b = zoned_bundle();
  b.occ_prior = build_occurrence_prior(b.A, b.studies, TierMap::expert());
  ChainConfig cfg;
  cfg.n_iter = 120;
  cfg.n_burn = 60;
  cfg.thin_keep_fraction = 0.2;
  cfg.n_chains = 2;
  cfg.seed = 77;
  cfg.sampler_variant = Variant::coil_plus;
  cfg.hyperparams.H = 2;
  const auto outs = run_chains(b, cfg);

  const std::string path = (std::filesystem::temp_directory_path() / "biplink_archive_test.bin").string();
  save_archive(path, outs);
  const auto loaded = load_archive(path);
  REQUIRE(loaded.size() == outs.size());
  for (std::size_t c = 0; c < outs.size(); ++c) {
    CHECK(loaded[c].loglik_trace == outs[c].loglik_trace);
    CHECK(loaded[c].rho_u_trace == outs[c].rho_u_trace);
    CHECK(loaded[c].rho_v_trace == outs[c].rho_v_trace);
    CHECK(loaded[c].lambda0_trace == outs[c].lambda0_trace);
    CHECK(loaded[c].occ_proposals == outs[c].occ_proposals);
    CHECK(loaded[c].occ_accepts == outs[c].occ_accepts);
    CHECK(loaded[c].variant == outs[c].variant);
    CHECK(loaded[c].n_iter == outs[c].n_iter);
    CHECK(loaded[c].n_burn == outs[c].n_burn);
    REQUIRE(loaded[c].prob_samples.size() == outs[c].prob_samples.size());
    for (std::size_t k = 0; k < outs[c].prob_samples.size(); ++k) {
      CHECK(loaded[c].prob_samples[k] == outs[c].prob_samples[k]);
      CHECK(loaded[c].occ_f_samples[k] == outs[c].occ_f_samples[k]);
      CHECK(loaded[c].occ_p_samples[k] == outs[c].occ_p_samples[k]);
    }
    CHECK(same_state(loaded[c].final_state, outs[c].final_state));
  }

  // summaries computed from the reloaded archive match the in-memory ones
  const PosteriorSummary s0 = summarize(outs, b.A, &b.studies);
  const PosteriorSummary s1 = summarize(loaded, b.A, &b.studies);
  CHECK(s0.mean_prob == s1.mean_prob);
  CHECK(s0.new_link_counts == s1.new_link_counts);

  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_archive(path), std::runtime_error);

  const std::string junk = (std::filesystem::temp_directory_path() / "biplink_archive_junk.bin").string();
  {
    std::ofstream os(junk, std::ios::binary);
    os << "this is not an archive";
  }
  CHECK_THROWS_AS(load_archive(junk), std::runtime_error);
  std::filesystem::remove(junk);
}

TEST_CASE("trace emission: one column per chain") {
  const std::string path = (std::filesystem::temp_directory_path() / "biplink_trace_test.csv").string();
  write_trace_csv(path, "loglik", {{1.5, 2.5, 3.5}, {7.25}});
  std::ifstream is(path);
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);
  CHECK(line == "loglik_chain1,loglik_chain2");
  std::getline(is, line);
  CHECK(line == "1.5,7.25");
  std::getline(is, line);
  CHECK(line == "2.5,");
  std::getline(is, line);
  CHECK(line == "3.5,");
  CHECK(!std::getline(is, line));
  std::filesystem::remove(path);
}
