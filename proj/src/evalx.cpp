#include "biplink/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "biplink/model.hpp"
#include "biplink/rng.hpp"

namespace biplink {

namespace {

// Stream id reserved for evaluation draws (holdout sampling, permutation
// tests); chain root streams use small integers, so these never collide.
constexpr std::uint64_t kEvalStream = 0x65766178ull;

void check_holdout_cells(const Eigen::MatrixXd& mean_prob, const HoldoutSpec& holdout) {
  if (holdout.heldout_pairs.empty())
    throw std::invalid_argument("holdout evaluation: no held-out pairs");
  for (const auto& [i, j] : holdout.heldout_pairs)
    if (i < 0 || i >= mean_prob.rows() || j < 0 || j >= mean_prob.cols())
      throw std::invalid_argument("holdout evaluation: pair outside the probability matrix");
}

// Pearson correlation of a pre-centered, unit-norm x against raw y; false
// when y is constant.
bool corr_with(const Eigen::VectorXd& x_unit, const Eigen::VectorXd& y, double* out) {
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double ny = yc.norm();
  if (ny == 0.0) return false;
  *out = x_unit.dot(yc) / ny;
  return true;
}

Eigen::VectorXd unit_centered(const Eigen::VectorXd& x, const char* who) {
  Eigen::VectorXd xc = x.array() - x.mean();
  const double n = xc.norm();
  if (n == 0.0) throw std::invalid_argument(std::string(who) + ": trait column is constant");
  return xc / n;
}

void check_samples(const Eigen::VectorXd& trait, const std::vector<Eigen::MatrixXd>& samples,
                   const char* who) {
  if (samples.empty()) throw std::invalid_argument(std::string(who) + ": no logit samples");
  for (const auto& m : samples)
    if (m.rows() != trait.size() || m.cols() != samples[0].cols())
      throw std::invalid_argument(std::string(who) + ": sample dimensions do not match the trait");
  if (trait.size() < 3) throw std::invalid_argument(std::string(who) + ": need at least 3 species");
}

}  // namespace

Holdout make_holdout(const ObservedTensor& A, const FocusTensor& F, int n_pairs,
                     std::uint64_t seed, int replicate_id) {
  std::vector<std::pair<int, int>> pool = A.observed_pairs();
  if (n_pairs <= 0) throw std::invalid_argument("make_holdout: n_pairs must be positive");
  if (n_pairs > static_cast<int>(pool.size()))
    throw std::invalid_argument("make_holdout: requested " + std::to_string(n_pairs) +
                                " pairs but only " + std::to_string(pool.size()) + " observed");

  RngStream g = RngStream(seed, kEvalStream).fork(static_cast<std::uint64_t>(replicate_id));
  const int n = static_cast<int>(pool.size());
  for (int k = 0; k < n_pairs; ++k) {
    const int span = n - k;
    int pick = k + std::min(span - 1, static_cast<int>(g.uniform01() * span));
    std::swap(pool[k], pool[pick]);
  }
  std::vector<std::pair<int, int>> chosen(pool.begin(), pool.begin() + n_pairs);
  std::sort(chosen.begin(), chosen.end());

  Holdout h;
  h.spec.heldout_pairs = chosen;
  h.spec.replicate_id = replicate_id;
  h.spec.seed = seed;
  for (const Triple& t : A.entries()) {
    const std::pair<int, int> key(t.animal, t.plant);
    if (std::binary_search(chosen.begin(), chosen.end(), key)) h.removed_entries.push_back(t);
  }
  h.A = A.without_pairs(chosen);
  h.F = F.with_excluded_pairs(chosen);
  return h;
}

std::pair<ObservedTensor, FocusTensor> un_holdout(const Holdout& h) {
  std::vector<Triple> entries = h.A.entries();
  entries.insert(entries.end(), h.removed_entries.begin(), h.removed_entries.end());
  ObservedTensor A(h.A.n_animals(), h.A.n_plants(), h.A.n_studies(), std::move(entries));

  std::vector<std::pair<int, int>> prior;
  for (std::uint64_t key : h.F.excluded_pairs()) {
    const int i = static_cast<int>(key / h.F.n_plants());
    const int j = static_cast<int>(key % h.F.n_plants());
    if (!std::binary_search(h.spec.heldout_pairs.begin(), h.spec.heldout_pairs.end(),
                            std::pair<int, int>(i, j)))
      prior.emplace_back(i, j);
  }
  FocusTensor F(h.F.n_animals(), h.F.n_plants(), h.F.studies());
  if (!prior.empty()) F = F.with_excluded_pairs(prior);
  return {std::move(A), std::move(F)};
}

double pseudo_precision(const Eigen::MatrixXd& mean_prob, const HoldoutSpec& holdout) {
  check_holdout_cells(mean_prob, holdout);
  double held = 0.0;
  for (const auto& [i, j] : holdout.heldout_pairs) held += mean_prob(i, j);
  held /= static_cast<double>(holdout.heldout_pairs.size());
  const double overall = mean_prob.mean();
  if (overall == 0.0) throw std::invalid_argument("pseudo_precision: overall mean probability is zero");
  return held / overall;
}

std::pair<double, double> pseudo_precision_bounds(double prevalence) {
  if (!(prevalence > 0.0) || prevalence > 1.0)
    throw std::invalid_argument("pseudo_precision_bounds: prevalence must lie in (0, 1]");
  return {1.0, 1.0 / prevalence};
}

double recall_at(const Eigen::MatrixXd& mean_prob, const HoldoutSpec& holdout, double threshold) {
  if (!(threshold > 0.0) || !(threshold < 1.0))
    throw std::invalid_argument("recall_at: threshold must lie in (0, 1)");
  check_holdout_cells(mean_prob, holdout);
  long hits = 0;
  for (const auto& [i, j] : holdout.heldout_pairs)
    if (mean_prob(i, j) > threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(holdout.heldout_pairs.size());
}

std::vector<Eigen::MatrixXd> logit_link_samples(const std::vector<ChainOutput>& outputs,
                                                bool plant_side) {
  std::vector<Eigen::MatrixXd> out;
  for (const ChainOutput& o : outputs) {
    for (const Eigen::MatrixXd& m : o.prob_samples) {
      Eigen::MatrixXd l = plant_side ? m.transpose() : m;
      for (int i = 0; i < l.rows(); ++i)
        for (int j = 0; j < l.cols(); ++j) l(i, j) = logit(l(i, j));
      out.push_back(std::move(l));
    }
  }
  return out;
}

TraitImportance variable_importance(const Eigen::VectorXd& trait,
                                    const std::vector<Eigen::MatrixXd>& logit_samples,
                                    int n_permutations, std::uint64_t seed) {
  check_samples(trait, logit_samples, "variable_importance");
  if (n_permutations < 2)
    throw std::invalid_argument("variable_importance: need at least 2 permutations");
  const Eigen::VectorXd x_unit = unit_centered(trait, "variable_importance");
  const int n = static_cast<int>(trait.size());

  // Center and normalize every non-constant partner column once; every
  // correlation is then a dot product against it.
  TraitImportance out;
  std::vector<Eigen::VectorXd> cols;
  for (const Eigen::MatrixXd& m : logit_samples) {
    for (int j = 0; j < m.cols(); ++j) {
      Eigen::VectorXd yc = m.col(j).array() - m.col(j).mean();
      const double ny = yc.norm();
      if (ny == 0.0) {
        ++out.degenerate_skipped;
        continue;
      }
      cols.push_back(yc / ny);
    }
  }
  if (cols.empty())
    throw std::invalid_argument("variable_importance: every partner column is constant");

  Eigen::MatrixXd Y(n, static_cast<int>(cols.size()));
  for (int c = 0; c < Y.cols(); ++c) Y.col(c) = cols[c];

  const auto mean_sq_corr = [&](const Eigen::VectorXd& x) {
    return (x.transpose() * Y).array().square().mean();
  };
  out.t_hat = mean_sq_corr(x_unit);

  RngStream g = RngStream(seed, kEvalStream).fork(1);
  std::vector<double> t0(n_permutations);
  Eigen::VectorXd perm = x_unit;
  for (int b = 0; b < n_permutations; ++b) {
    RngStream gb = g.fork(static_cast<std::uint64_t>(b));
    for (int k = n - 1; k > 0; --k) {
      const int pick = std::min(k, static_cast<int>(gb.uniform01() * (k + 1)));
      std::swap(perm[k], perm[pick]);
    }
    t0[b] = mean_sq_corr(perm);
  }
  double mean0 = 0.0;
  for (double t : t0) mean0 += t;
  mean0 /= n_permutations;
  double ss = 0.0;
  for (double t : t0) ss += (t - mean0) * (t - mean0);
  const double sd0 = std::sqrt(ss / (n_permutations - 1));
  if (sd0 == 0.0)
    throw std::runtime_error("variable_importance: permutation distribution is degenerate");
  out.value = std::abs(out.t_hat - mean0) / sd0;
  return out;
}

Eigen::VectorXd signed_trait_correlations(const Eigen::VectorXd& trait,
                                          const std::vector<Eigen::MatrixXd>& logit_samples) {
  check_samples(trait, logit_samples, "signed_trait_correlations");
  const Eigen::VectorXd x_unit = unit_centered(trait, "signed_trait_correlations");
  const int n_partners = static_cast<int>(logit_samples[0].cols());
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_partners);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_partners);
  for (const Eigen::MatrixXd& m : logit_samples) {
    for (int j = 0; j < n_partners; ++j) {
      double r = 0.0;
      if (corr_with(x_unit, m.col(j), &r)) {
        sums[j] += r;
        counts[j] += 1.0;
      }
    }
  }
  Eigen::VectorXd out(n_partners);
  for (int j = 0; j < n_partners; ++j)
    out[j] = counts[j] > 0 ? sums[j] / counts[j] : std::numeric_limits<double>::quiet_NaN();
  return out;
}

void write_cv_report(const std::string& path, const std::vector<CvRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_cv_report: cannot open '" + path + "'");
  os << "replicate,variant,pseudo_precision,recall_50,recall_75\n";
  os.precision(10);
  for (const CvRow& r : rows)
    os << r.replicate << "," << r.variant << "," << r.pseudo_precision << "," << r.recall_50
       << "," << r.recall_75 << "\n";
  if (!os) throw std::runtime_error("write_cv_report: write to '" + path + "' failed");
}

}  // namespace biplink
