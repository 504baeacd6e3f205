#pragma once

#include <string>
#include <vector>

#include "biplink/types.hpp"

namespace biplink {

struct Violation {
  std::string where;
  std::string what;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks every cross-structure invariant of a bundle: index/dimension
// agreement, A => F, trait standardization and binary coding, phylogeny
// symmetry/unit diagonal/positive semidefiniteness (within 1e-8), occurrence
// priors in [0,1] with 1 at observed cells.
ValidationReport validate_inputs(const DataBundle& bundle);

}  // namespace biplink
