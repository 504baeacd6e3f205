#include "biplink/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include "biplink/focus.hpp"
#include "serialize_impl.hpp"

namespace biplink {

namespace {

constexpr std::uint32_t kArchiveMagic = 0x42505341u;  // "BPSA"
constexpr std::uint32_t kArchiveVersion = 1;

void check_chain_agreement(const std::vector<ChainOutput>& outputs) {
  if (outputs.empty()) throw std::invalid_argument("summarize: need at least one chain");
  const ChainOutput& ref = outputs.front();
  if (ref.prob_samples.empty()) throw std::invalid_argument("summarize: chains hold no retained samples");
  for (const ChainOutput& o : outputs) {
    if (o.variant != ref.variant)
      throw std::invalid_argument("summarize: chains were run under different sampler variants");
    if (o.prob_samples.size() != ref.prob_samples.size())
      throw std::invalid_argument("summarize: chains retain different sample counts");
    if (o.occ_f_samples.size() != o.prob_samples.size() ||
        o.occ_p_samples.size() != o.prob_samples.size())
      throw std::invalid_argument("summarize: occurrence samples out of step with link samples");
    for (const auto& m : o.prob_samples)
      if (m.rows() != ref.prob_samples[0].rows() || m.cols() != ref.prob_samples[0].cols())
        throw std::invalid_argument("summarize: link sample dimensions differ across chains");
    for (const auto& m : o.occ_f_samples)
      if (m.rows() != o.occ_f_samples[0].rows() || m.cols() != o.occ_f_samples[0].cols())
        throw std::invalid_argument("summarize: occurrence sample dimensions differ");
    for (const auto& m : o.occ_p_samples)
      if (m.rows() != o.occ_p_samples[0].rows() || m.cols() != o.occ_p_samples[0].cols())
        throw std::invalid_argument("summarize: occurrence sample dimensions differ");
  }
}

Eigen::MatrixXd pooled_mean(const std::vector<ChainOutput>& outputs,
                            const std::vector<Eigen::MatrixXd> ChainOutput::* member) {
  Eigen::MatrixXd acc;
  long n = 0;
  for (const ChainOutput& o : outputs) {
    for (const Eigen::MatrixXd& m : o.*member) {
      if (acc.size() == 0) {
        acc = Eigen::MatrixXd::Zero(m.rows(), m.cols());
      }
      acc += m;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("summarize: no retained samples to pool");
  return acc / static_cast<double>(n);
}

}  // namespace

PosteriorSummary summarize(const std::vector<ChainOutput>& outputs, const ObservedTensor& A,
                           const std::vector<StudyMeta>* studies,
                           const std::vector<double>& thresholds) {
  check_chain_agreement(outputs);
  PosteriorSummary out;
  out.mean_prob = pooled_mean(outputs, &ChainOutput::prob_samples);
  if (out.mean_prob.rows() != A.n_animals() || out.mean_prob.cols() != A.n_plants())
    throw std::invalid_argument("summarize: sample dimensions do not match the observation tensor");
  out.thresholds = thresholds;
  const long n_pairs = static_cast<long>(out.mean_prob.size());
  for (double t : thresholds) {
    long above = 0, unobserved_above = 0;
    for (int i = 0; i < out.mean_prob.rows(); ++i) {
      for (int j = 0; j < out.mean_prob.cols(); ++j) {
        if (out.mean_prob(i, j) > t) {
          ++above;
          if (!A.pair_observed(i, j)) ++unobserved_above;
        }
      }
    }
    out.new_link_counts.push_back(unobserved_above);
    out.prevalence.push_back(n_pairs > 0 ? static_cast<double>(above) / n_pairs : 0.0);
  }
  if (studies) out.occ_tier_table = occurrence_tier_summary(outputs, A, *studies);
  out.n_samples = static_cast<int>(outputs.front().prob_samples.size());
  out.n_chains = static_cast<int>(outputs.size());
  return out;
}

Eigen::MatrixXd occurrence_tier_summary(const std::vector<ChainOutput>& outputs,
                                        const ObservedTensor& A,
                                        const std::vector<StudyMeta>& studies) {
  check_chain_agreement(outputs);
  const Eigen::MatrixXd occ_f = pooled_mean(outputs, &ChainOutput::occ_f_samples);
  const Eigen::MatrixXd occ_p = pooled_mean(outputs, &ChainOutput::occ_p_samples);
  if (occ_f.rows() != A.n_animals() || occ_p.rows() != A.n_plants() ||
      occ_f.cols() != A.n_studies() || occ_p.cols() != A.n_studies() ||
      static_cast<int>(studies.size()) != A.n_studies())
    throw std::invalid_argument("occurrence_tier_summary: dimensions do not match the observation tensor");

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(5, 2);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(5, 2);
  for (int s = 0; s < A.n_studies(); ++s) {
    for (int i = 0; i < A.n_animals(); ++i) {
      const int t = static_cast<int>(classify_animal_tier(A, studies, i, s));
      sums(t, 0) += occ_f(i, s);
      counts(t, 0) += 1.0;
    }
    for (int j = 0; j < A.n_plants(); ++j) {
      const int t = static_cast<int>(classify_plant_tier(A, studies, j, s));
      sums(t, 1) += occ_p(j, s);
      counts(t, 1) += 1.0;
    }
  }
  Eigen::MatrixXd table(5, 2);
  for (int t = 0; t < 5; ++t)
    for (int c = 0; c < 2; ++c)
      table(t, c) = counts(t, c) > 0 ? sums(t, c) / counts(t, c)
                                     : std::numeric_limits<double>::quiet_NaN();
  return table;
}

double gelman_rubin(const std::vector<std::vector<double>>& traces) {
  const int k = static_cast<int>(traces.size());
  if (k < 2) throw std::invalid_argument("gelman_rubin: need at least two chains");
  const std::size_t n = traces[0].size();
  if (n < 10) throw std::invalid_argument("gelman_rubin: chains must have length >= 10");
  for (const auto& t : traces)
    if (t.size() != n) throw std::invalid_argument("gelman_rubin: chains must have equal lengths");

  std::vector<double> means(k);
  double grand = 0.0;
  for (int c = 0; c < k; ++c) {
    double s = 0.0;
    for (double x : traces[c]) s += x;
    means[c] = s / static_cast<double>(n);
    grand += means[c];
  }
  grand /= k;

  double w = 0.0;
  for (int c = 0; c < k; ++c) {
    double ss = 0.0;
    for (double x : traces[c]) ss += (x - means[c]) * (x - means[c]);
    w += ss / static_cast<double>(n - 1);
  }
  w /= k;

  double b_over_n = 0.0;
  for (int c = 0; c < k; ++c) b_over_n += (means[c] - grand) * (means[c] - grand);
  b_over_n /= (k - 1);

  if (w == 0.0) {
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    return *hi == *lo ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return std::sqrt((w + b_over_n) / w);
}

void write_trace_csv(const std::string& path, const std::string& name,
                     const std::vector<std::vector<double>>& traces) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_trace_csv: cannot open '" + path + "'");
  std::size_t longest = 0;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    os << (c ? "," : "") << name << "_chain" << c + 1;
    longest = std::max(longest, traces[c].size());
  }
  os << "\n";
  os.precision(17);
  for (std::size_t r = 0; r < longest; ++r) {
    for (std::size_t c = 0; c < traces.size(); ++c) {
      if (c) os << ",";
      if (r < traces[c].size()) os << traces[c][r];
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("write_trace_csv: write to '" + path + "' failed");
}

void save_archive(const std::string& path, const std::vector<ChainOutput>& outputs) {
  const std::string tmp = path + ".tmp";
  {
    serial::Writer w(tmp, "sample archive");
    w.pod(kArchiveMagic);
    w.pod(kArchiveVersion);
    w.pod(static_cast<std::uint64_t>(outputs.size()));
    for (const ChainOutput& o : outputs) {
      serial::write_output(w, o);
      serial::write_state(w, o.final_state);
    }
    w.os.flush();
    if (!w.os) throw std::runtime_error("sample archive: write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::vector<ChainOutput> load_archive(const std::string& path) {
  serial::Reader r(path, "sample archive");
  if (!r.is) r.fail("cannot open");
  std::uint32_t magic = 0, version = 0;
  r.pod(magic);
  r.pod(version);
  if (magic != kArchiveMagic) r.fail("not a sample archive");
  if (version != kArchiveVersion) r.fail("unsupported version " + std::to_string(version));
  std::vector<ChainOutput> outputs(r.len());
  for (ChainOutput& o : outputs) {
    serial::read_output(r, o);
    serial::read_state(r, o.final_state);
  }
  return outputs;
}

}  // namespace biplink
