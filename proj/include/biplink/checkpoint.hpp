#pragma once

#include <string>

#include "biplink/gibbs.hpp"
#include "biplink/model.hpp"

namespace biplink {

// Mid-run chain snapshot: the state entering sweep `next_iter` plus
// everything already recorded. Streams are derived, not stateful — every
// draw is keyed by (seed, chain, sweep, block, unit) — so no generator
// positions need saving and a resumed run is bit-identical.
struct Checkpoint {
  int next_iter = 1;
  LatentState state;
  ChainOutput partial;
};

// Binary, host-endian. Writes to path + ".tmp" and renames, so a torn write
// never corrupts an existing checkpoint.
void save_checkpoint(const std::string& path, const Checkpoint& cp);

// Returns false when the file does not exist; throws std::runtime_error on a
// malformed or truncated file.
bool load_checkpoint(const std::string& path, Checkpoint& cp);

}  // namespace biplink
