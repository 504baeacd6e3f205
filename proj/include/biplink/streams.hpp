#pragma once

#include <cstdint>

namespace biplink {

// Stable block labels for forked RNG streams. Every random draw in the
// sampler comes from fork(iteration, block, unit), so a draw's stream depends
// only on (seed, chain, iteration, block, unit) — never on thread count or
// schedule. Initialization uses iteration label 0.
enum StreamBlock : std::uint64_t {
  kInitFactors = 1,     // unit: column h (animal side), H + h (plant side)
  kInitLinks = 2,       // unit: pair id i*n_P + j
  kInitOccAnimal = 3,   // unit: cell id i*n_S + s
  kInitOccPlant = 4,    // unit: cell id j*n_S + s
  kOmegaLink = 10,      // unit: pair id
  kOmegaTraitX = 11,    // unit: i*p_M + l (binary columns)
  kOmegaTraitW = 12,    // unit: j*p_P + l
  kLinks = 13,          // unit: pair id
  kTrialAux = 14,       // unit: triple id (s*n_F + i)*n_P + j
  kFactorU = 15,        // unit: column h
  kFactorV = 16,        // unit: column h
  kLambda0 = 17,        // unit: 0
  kShrinkMH = 18,       // unit: increment index l
  kRhoU = 19,           // unit: 0
  kRhoV = 20,           // unit: 0
  kTraitColX = 21,      // unit: column l
  kTraitColW = 22,      // unit: column l
  kDetRedraw = 23,      // unit: triple id
  kDetCoef = 24,        // unit: 0 (animal), 1 (plant)
  kOccAnimal = 25,      // unit: cell id i*n_S + s
  kOccPlant = 26,       // unit: cell id j*n_S + s
};

}  // namespace biplink
