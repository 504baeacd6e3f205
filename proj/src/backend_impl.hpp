#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "biplink/kernels.hpp"

namespace biplink {

std::unique_ptr<SamplerBackend> make_indexed_backend(const DataBundle& bundle);
std::unique_ptr<SamplerBackend> make_reference_backend(const DataBundle& bundle);

// Linear triple id keying per-trial streams: (s * n_F + i) * n_P + j.
inline std::uint64_t triple_unit(int i, int j, int s, int n_f, int n_p) {
  return (static_cast<std::uint64_t>(s) * n_f + i) * n_p + j;
}

// Trait predictor matrix for one side: pred(i, l) = b0_l + factors_i . coefs_l.
inline Eigen::MatrixXd predictor_matrix(const Eigen::MatrixXd& factors,
                                        const Eigen::VectorXd& intercepts,
                                        const Eigen::MatrixXd& coefs) {
  Eigen::MatrixXd pred = factors * coefs.transpose();
  pred.rowwise() += intercepts.transpose();
  return pred;
}

inline Eigen::VectorXd detection_logit_vector(const Eigen::MatrixXd& factors,
                                              double intercept,
                                              const Eigen::VectorXd& coef) {
  Eigen::VectorXd z = factors * coef;
  z.array() += intercept;
  return z;
}

// Reduce the per-trial detection draws into per-species sums, in list order.
void reduce_trial_sums(const LatentState& state, SweepWorkspace& ws);

}  // namespace biplink
