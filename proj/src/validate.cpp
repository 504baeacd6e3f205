#include "biplink/validate.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace biplink {

namespace {

void check_labels(const std::vector<std::string>& labels, const std::string& side,
                  std::vector<Violation>& out) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) out.push_back({side, "empty species label"});
    if (!seen.insert(l).second) out.push_back({side + ":" + l, "duplicate species label"});
  }
}

void check_phylo_side(const Eigen::MatrixXd& C, int n, const std::string& side,
                      std::vector<Violation>& out) {
  if (C.rows() != n || C.cols() != n) {
    out.push_back({side, "phylogeny matrix dimensions do not match the species index"});
    return;
  }
  double asym = 0.0, diag = 0.0;
  for (int r = 0; r < n; ++r) {
    diag = std::max(diag, std::abs(C(r, r) - 1.0));
    for (int c = r + 1; c < n; ++c) asym = std::max(asym, std::abs(C(r, c) - C(c, r)));
  }
  if (asym > 1e-10) out.push_back({side, "phylogeny matrix is not symmetric"});
  if (diag > 1e-10) out.push_back({side, "phylogeny matrix must have unit diagonal"});
  if (asym <= 1e-10 && diag <= 1e-10 && n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) {
      out.push_back({side, "phylogeny matrix is not positive semidefinite"});
    }
  }
}

void check_traits_side(const Eigen::MatrixXd& M, const std::vector<TraitKind>& kinds,
                       const std::vector<std::string>& names, int n, const std::string& side,
                       std::vector<Violation>& out) {
  if (M.rows() != n && M.size() > 0) {
    out.push_back({side, "trait rows do not match the species index"});
    return;
  }
  if (static_cast<std::size_t>(M.cols()) != kinds.size() ||
      static_cast<std::size_t>(M.cols()) != names.size()) {
    out.push_back({side, "trait kind/name declarations do not match the columns"});
    return;
  }
  for (int c = 0; c < M.cols(); ++c) {
    const std::string where = side + ":" + names[c];
    bool finite = true;
    for (int r = 0; r < M.rows(); ++r) {
      if (!std::isfinite(M(r, c))) finite = false;
    }
    if (!finite) {
      out.push_back({where, "trait has non-finite entries"});
      continue;
    }
    if (kinds[c] == TraitKind::binary) {
      for (int r = 0; r < M.rows(); ++r) {
        if (M(r, c) != 0.0 && M(r, c) != 1.0) {
          out.push_back({where, "binary trait has values outside {0,1}"});
          break;
        }
      }
    } else if (M.rows() > 1) {
      const double m = M.col(c).mean();
      const double v = (M.col(c).array() - m).square().mean();
      if (std::abs(m) > 1e-6 || std::abs(v - 1.0) > 1e-6) {
        out.push_back({where, "continuous trait is not standardized to mean 0, sd 1"});
      }
    }
  }
}

}  // namespace

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  if (ok()) {
    os << "inputs valid\n";
    return os.str();
  }
  for (const auto& v : violations) os << v.where << ": " << v.what << '\n';
  return os.str();
}

ValidationReport validate_inputs(const DataBundle& b) {
  ValidationReport rep;
  auto& out = rep.violations;

  const int nF = b.species.n_animals();
  const int nP = b.species.n_plants();
  const int nS = static_cast<int>(b.studies.size());

  check_labels(b.species.animal_labels, "species[animal]", out);
  check_labels(b.species.plant_labels, "species[plant]", out);

  if (b.A.n_animals() != nF || b.A.n_plants() != nP) {
    out.push_back({"observed", "tensor dimensions do not match the species index"});
  }
  if (b.A.n_studies() != nS) {
    out.push_back({"observed", "tensor study count does not match the metadata"});
  }
  for (int s = 0; s < nS; ++s) {
    if (b.studies[s].country.empty() || b.studies[s].zone.empty()) {
      out.push_back({"studies:" + b.studies[s].id, "country and zone are required"});
    }
  }

  if (b.F.n_animals() != nF || b.F.n_plants() != nP || b.F.n_studies() != b.A.n_studies()) {
    out.push_back({"focus", "focus tensor dimensions do not match"});
  } else {
    for (const Triple& t : b.A.entries()) {
      if (!b.F.at(t.animal, t.plant, t.study)) {
        out.push_back({"focus:study " + b.studies[t.study].id,
                       "observed interaction (" + b.species.animal_labels[t.animal] + ", " +
                           b.species.plant_labels[t.plant] +
                           ") outside the study's sampling design"});
      }
    }
  }

  check_traits_side(b.traits.X, b.traits.x_kinds, b.traits.x_names, nF, "traits[animal]", out);
  check_traits_side(b.traits.W, b.traits.w_kinds, b.traits.w_names, nP, "traits[plant]", out);

  check_phylo_side(b.phylo.C_animal, nF, "phylo[animal]", out);
  check_phylo_side(b.phylo.C_plant, nP, "phylo[plant]", out);

  if (b.occ_prior.P_OF.rows() != nF || b.occ_prior.P_OF.cols() != b.A.n_studies() ||
      b.occ_prior.P_OP.rows() != nP || b.occ_prior.P_OP.cols() != b.A.n_studies()) {
    out.push_back({"occ_prior", "occurrence prior dimensions do not match"});
  } else {
    for (int s = 0; s < b.A.n_studies(); ++s) {
      for (int i = 0; i < nF; ++i) {
        const double v = b.occ_prior.P_OF(i, s);
        if (!(v >= 0.0 && v <= 1.0)) {
          out.push_back({"occ_prior[animal:" + b.species.animal_labels[i] + ",study:" +
                             b.studies[s].id + "]",
                         "prior outside [0,1]"});
        } else if (b.A.animal_observed_in(i, s) && v != 1.0) {
          out.push_back({"occ_prior[animal:" + b.species.animal_labels[i] + ",study:" +
                             b.studies[s].id + "]",
                         "observed species must have prior 1"});
        }
      }
      for (int j = 0; j < nP; ++j) {
        const double v = b.occ_prior.P_OP(j, s);
        if (!(v >= 0.0 && v <= 1.0)) {
          out.push_back({"occ_prior[plant:" + b.species.plant_labels[j] + ",study:" +
                             b.studies[s].id + "]",
                         "prior outside [0,1]"});
        } else if (b.A.plant_observed_in(j, s) && v != 1.0) {
          out.push_back({"occ_prior[plant:" + b.species.plant_labels[j] + ",study:" +
                             b.studies[s].id + "]",
                         "observed species must have prior 1"});
        }
      }
    }
  }

  return rep;
}

}  // namespace biplink
