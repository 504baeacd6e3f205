#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biplink/gibbs.hpp"
#include "biplink/synth.hpp"
#include "biplink/types.hpp"

namespace biplink {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything a command needs, filled from defaults, then the config file,
// then the command line (later sources win; the front end enforces that
// ordering).
struct RunConfig {
  // Inputs. `data_dir` names a directory in the simulate layout; explicit
  // per-file paths override the files it implies. Trait and phylogeny files
  // are optional.
  std::string data_dir;
  std::string interactions;
  std::string studies_file;
  std::string animal_traits;
  std::string plant_traits;
  std::string animal_phylo;
  std::string plant_phylo;
  std::string animal_trait_kinds;  // comma list, e.g. "continuous,binary";
  std::string plant_trait_kinds;   // empty = all continuous

  std::string variant = "coil";  // coil | coilplus
  std::string prior = "expert";  // naive | default75 | expert | file:<path>
  ChainConfig chain;
  int jobs = 0;  // worker pool width; 0 = chain count
  std::vector<double> thresholds = {0.5, 0.75};
  std::string out_dir;  // empty = $BIPLINK_OUT, else "."

  int cv_replicates = 10;
  int cv_pairs = 100;
  int trait_permutations = 100;
  std::string archive;  // empty = <out>/samples.bin

  SynthConfig synth;

  std::string resolved_out() const;
  std::string resolved_archive() const;
  Variant parsed_variant() const;  // throws ConfigError on unknown names
  TierMap parsed_prior() const;    // resolves scenario names and file: specs
  // Stable key=value rendering of every field that shapes the run; hashed
  // into the manifest so artifacts carry their provenance.
  std::string canonical() const;
  std::uint64_t config_hash() const;
};

// Tier map from a key-value file (same_study = 1.0, ..., different_zone = 0).
TierMap read_tier_file(const std::string& path);

// Trait kind list from a comma-separated declaration; empty = all continuous.
std::vector<TraitKind> parse_trait_kinds(const std::string& csv, int n_cols,
                                         const std::string& side);

// Ingests records/studies, optional traits and phylogenies, derives the
// focus tensor, and builds the occurrence prior for the configured scenario.
DataBundle load_bundle(const RunConfig& cfg);

// Runs the chains of `cc` through a pool of `jobs` workers (<=1 = in order);
// outputs are indexed by chain and bit-identical to the sequential run.
std::vector<ChainOutput> run_chain_pool(const DataBundle& bundle, const ChainConfig& cc,
                                        int jobs);

void write_manifest(const std::string& dir, const RunConfig& cfg, const std::string& command);

int cmd_fit(const RunConfig& cfg);
int cmd_cv(const RunConfig& cfg);
int cmd_traits(const RunConfig& cfg);
int cmd_summarize(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_validate(const RunConfig& cfg);

// Dispatches one subcommand and maps exceptions onto exit codes:
// 0 success, 2 validation/configuration, 3 numeric failure.
int run_command(const std::string& command, const RunConfig& cfg);

}  // namespace biplink
