#include "biplink/runconfig.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "biplink/evalx.hpp"
#include "biplink/focus.hpp"
#include "biplink/io.hpp"
#include "biplink/posterior.hpp"
#include "biplink/validate.hpp"

namespace biplink {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Pool of `jobs` workers pulling task indices; the first exception wins and
// is rethrown on the caller's thread after every worker drains.
template <typename Fn>
void parallel_tasks(int n_tasks, int jobs, Fn&& fn) {
  if (n_tasks <= 0) return;
  jobs = std::max(1, std::min(jobs, n_tasks));
  if (jobs == 1) {
    for (int t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= n_tasks) return;
      try {
        fn(t);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (int w = 0; w < jobs; ++w) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int count_header_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  return static_cast<int>(split_fields(line).size()) - 1;  // minus the id column
}

// Returns an explicit path, the data-dir default when that file exists, or
// "" when the input is optional and absent.
std::string pick_input(const RunConfig& cfg, const std::string& explicit_path,
                       const char* name, bool required) {
  if (!explicit_path.empty()) return explicit_path;
  if (!cfg.data_dir.empty()) {
    const std::string p = (fs::path(cfg.data_dir) / name).string();
    if (fs::exists(p)) return p;
    if (required) throw ConfigError("data directory lacks " + std::string(name));
    return "";
  }
  if (required) throw ConfigError(std::string("missing required input: ") + name);
  return "";
}

int ensure_valid(const DataBundle& bundle) {
  const ValidationReport rep = validate_inputs(bundle);
  if (rep.ok()) return 0;
  std::cerr << rep.to_string();
  return 2;
}

std::string join_thresholds(const std::vector<double>& ts) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < ts.size(); ++k) os << (k ? "," : "") << ts[k];
  return os.str();
}

json tier_table_json(const Eigen::MatrixXd& table) {
  json out = json::object();
  for (int t = 0; t < table.rows(); ++t) {
    json row = json::object();
    row["frugivore"] = table(t, 0);
    row["plant"] = table(t, 1);
    out[tier_name(static_cast<Tier>(t))] = row;
  }
  return out;
}

long count_free_occurrence_cells(const DataBundle& b) {
  long n = 0;
  for (int i = 0; i < b.A.n_animals(); ++i) {
    for (int s = 0; s < b.A.n_studies(); ++s) {
      const double c = b.occ_prior.P_OF(i, s);
      if (!b.A.animal_observed_in(i, s) && c > 0.0 && c < 1.0) ++n;
    }
  }
  for (int j = 0; j < b.A.n_plants(); ++j) {
    for (int s = 0; s < b.A.n_studies(); ++s) {
      const double c = b.occ_prior.P_OP(j, s);
      if (!b.A.plant_observed_in(j, s) && c > 0.0 && c < 1.0) ++n;
    }
  }
  return n;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

// Posterior summary artifacts shared by fit and summarize: the pooled mean
// link matrix, the machine-readable summary, and the log-likelihood traces.
void write_fit_artifacts(const std::string& out, const RunConfig& cfg, const DataBundle& b,
                         const std::vector<ChainOutput>& outputs) {
  const PosteriorSummary s = summarize(outputs, b.A, &b.studies, cfg.thresholds);
  write_labeled_matrix((fs::path(out) / "mean_prob.csv").string(), s.mean_prob,
                       b.species.animal_labels, b.species.plant_labels, "animal_id");

  std::vector<std::vector<double>> traces, post;
  for (const ChainOutput& o : outputs) {
    traces.push_back(o.loglik_trace);
    post.emplace_back(o.loglik_trace.begin() + o.n_burn, o.loglik_trace.end());
  }
  write_trace_csv((fs::path(out) / "loglik_trace.csv").string(), "loglik", traces);

  json j;
  j["variant"] = cfg.variant;
  j["prior"] = cfg.prior;
  j["n_chains"] = s.n_chains;
  j["n_samples"] = s.n_samples;
  j["thresholds"] = s.thresholds;
  j["new_link_counts"] = s.new_link_counts;
  j["prevalence"] = s.prevalence;
  const bool can_rhat = outputs.size() >= 2 && post.front().size() >= 10;
  j["rhat_loglik"] = can_rhat ? json(gelman_rubin(post)) : json();
  json acc = json::array();
  long proposals = 0, accepts = 0;
  for (const ChainOutput& o : outputs) {
    acc.push_back(o.occ_acceptance());
    proposals += o.occ_proposals;
    accepts += o.occ_accepts;
  }
  j["occ_acceptance"] = acc;
  j["occ_proposals"] = proposals;
  j["occ_accepts"] = accepts;
  j["occ_free_cells"] = count_free_occurrence_cells(b);
  j["occ_tier_table"] = tier_table_json(s.occ_tier_table);
  write_json((fs::path(out) / "summary.json").string(), j);
}

double vec_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double vec_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = vec_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string RunConfig::resolved_out() const {
  if (!out_dir.empty()) return out_dir;
  if (const char* env = std::getenv("BIPLINK_OUT"); env && *env) return env;
  return ".";
}

std::string RunConfig::resolved_archive() const {
  if (!archive.empty()) return archive;
  return (fs::path(resolved_out()) / "samples.bin").string();
}

Variant RunConfig::parsed_variant() const {
  if (variant == "coil") return Variant::coil;
  if (variant == "coilplus") return Variant::coil_plus;
  throw ConfigError("unknown variant '" + variant + "' (expected coil or coilplus)");
}

TierMap RunConfig::parsed_prior() const {
  if (prior == "naive") return TierMap::naive();
  if (prior == "default75") return TierMap::default75();
  if (prior == "expert") return TierMap::expert();
  if (prior.rfind("file:", 0) == 0) return read_tier_file(prior.substr(5));
  throw ConfigError("unknown prior '" + prior +
                    "' (expected naive, default75, expert, or file:<path>)");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "animal_phylo=" << animal_phylo << "\nanimal_trait_kinds=" << animal_trait_kinds
     << "\nanimal_traits=" << animal_traits << "\narchive=" << archive
     << "\nchain.burnin=" << chain.n_burn << "\nchain.chains=" << chain.n_chains
     << "\nchain.checkpoint_every=" << chain.checkpoint_every
     << "\nchain.iters=" << chain.n_iter << "\nchain.latent_dims=" << chain.hyperparams.H
     << "\nchain.resume=" << chain.resume << "\nchain.seed=" << chain.seed
     << "\nchain.thin=" << chain.thin_keep_fraction << "\ncv_pairs=" << cv_pairs
     << "\ncv_replicates=" << cv_replicates << "\ndata_dir=" << data_dir
     << "\ninteractions=" << interactions << "\njobs=" << jobs
     << "\nplant_phylo=" << plant_phylo << "\nplant_trait_kinds=" << plant_trait_kinds
     << "\nplant_traits=" << plant_traits << "\nprior=" << prior
     << "\nstudies=" << studies_file << "\nsynth.clade_corr=" << synth.clade_corr
     << "\nsynth.clade_size=" << synth.clade_size
     << "\nsynth.countries_per_zone=" << synth.countries_per_zone
     << "\nsynth.det_logit_max=" << synth.det_logit_max
     << "\nsynth.det_logit_min=" << synth.det_logit_min
     << "\nsynth.frac_network=" << synth.frac_network
     << "\nsynth.frac_pair=" << synth.frac_pair
     << "\nsynth.frac_phytocentric=" << synth.frac_phytocentric
     << "\nsynth.frac_zoocentric=" << synth.frac_zoocentric
     << "\nsynth.h_true=" << synth.H_true << "\nsynth.lambda0_true=" << synth.lambda0_true
     << "\nsynth.lambda_true=" << synth.lambda_true << "\nsynth.n_f=" << synth.n_F
     << "\nsynth.n_p=" << synth.n_P << "\nsynth.n_s=" << synth.n_S
     << "\nsynth.n_zones=" << synth.n_zones
     << "\nsynth.occ_diff_zone=" << synth.occ_diff_zone
     << "\nsynth.occ_same_country=" << synth.occ_same_country
     << "\nsynth.occ_same_site=" << synth.occ_same_site
     << "\nsynth.occ_same_zone=" << synth.occ_same_zone
     << "\nsynth.rho_u_true=" << synth.rho_u_true
     << "\nsynth.rho_v_true=" << synth.rho_v_true << "\nsynth.seed=" << synth.seed
     << "\nsynth.sites_per_country=" << synth.sites_per_country
     << "\nsynth.trait_effect=" << synth.trait_effect
     << "\nsynth.trait_noise_sd=" << synth.trait_noise_sd
     << "\nthresholds=" << join_thresholds(thresholds)
     << "\ntrait_permutations=" << trait_permutations << "\nvariant=" << variant << "\n";
  return os.str();
}

std::uint64_t RunConfig::config_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

TierMap read_tier_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tier file " + path);
  TierMap t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    double value = 0.0;
    try {
      value = std::stod(trim(stripped.substr(eq + 1)));
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": bad number");
    }
    if (key == "same_study")
      t.same_study = value;
    else if (key == "same_site")
      t.same_site = value;
    else if (key == "same_country_only")
      t.same_country_only = value;
    else if (key == "same_zone_only")
      t.same_zone_only = value;
    else if (key == "different_zone")
      t.different_zone = value;
    else
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown tier '" + key + "'");
  }
  if (!t.valid())
    throw ConfigError(path + ": tier probabilities must be a monotone map into [0,1]");
  return t;
}

std::vector<TraitKind> parse_trait_kinds(const std::string& csv, int n_cols,
                                         const std::string& side) {
  std::vector<TraitKind> kinds;
  if (csv.empty()) {
    kinds.assign(static_cast<std::size_t>(n_cols), TraitKind::continuous);
    return kinds;
  }
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string k = trim(item);
    if (k == "continuous")
      kinds.push_back(TraitKind::continuous);
    else if (k == "binary")
      kinds.push_back(TraitKind::binary);
    else
      throw ConfigError(side + " trait kinds: unknown kind '" + k + "'");
  }
  if (static_cast<int>(kinds.size()) != n_cols)
    throw ConfigError(side + " trait kinds: " + std::to_string(kinds.size()) +
                      " declared for " + std::to_string(n_cols) + " columns");
  return kinds;
}

DataBundle load_bundle(const RunConfig& cfg) {
  const std::string inter = pick_input(cfg, cfg.interactions, "interactions.csv", true);
  const std::string stud = pick_input(cfg, cfg.studies_file, "studies.csv", true);
  IngestResult in = ingest_records(inter, stud);

  DataBundle b;
  b.species = std::move(in.species);
  b.A = std::move(in.A);
  b.studies = std::move(in.studies);
  std::vector<std::string> warnings;
  b.F = derive_focus(b.A, b.studies, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  const std::string at = pick_input(cfg, cfg.animal_traits, "animal_traits.csv", false);
  if (!at.empty()) {
    const auto kinds = parse_trait_kinds(cfg.animal_trait_kinds, count_header_columns(at),
                                         "animal");
    TraitColumns tc = read_traits(at, b.species.animal_labels, kinds, "animal");
    b.traits.X = std::move(tc.M);
    b.traits.x_names = std::move(tc.names);
    b.traits.x_kinds = kinds;
  }
  const std::string pt = pick_input(cfg, cfg.plant_traits, "plant_traits.csv", false);
  if (!pt.empty()) {
    const auto kinds = parse_trait_kinds(cfg.plant_trait_kinds, count_header_columns(pt),
                                         "plant");
    TraitColumns tc = read_traits(pt, b.species.plant_labels, kinds, "plant");
    b.traits.W = std::move(tc.M);
    b.traits.w_names = std::move(tc.names);
    b.traits.w_kinds = kinds;
  }

  b.phylo = PhyloCorrelation::identity(b.species.n_animals(), b.species.n_plants());
  const std::string ap = pick_input(cfg, cfg.animal_phylo, "animal_phylo.csv", false);
  if (!ap.empty()) b.phylo.C_animal = read_phylo(ap, b.species.animal_labels, "animal");
  const std::string pp = pick_input(cfg, cfg.plant_phylo, "plant_phylo.csv", false);
  if (!pp.empty()) b.phylo.C_plant = read_phylo(pp, b.species.plant_labels, "plant");

  b.occ_prior = build_occurrence_prior(b.A, b.studies, cfg.parsed_prior());
  return b;
}

std::vector<ChainOutput> run_chain_pool(const DataBundle& bundle, const ChainConfig& cc,
                                        int jobs) {
  cc.validate();
  if (jobs <= 0) jobs = cc.n_chains;
  if (jobs <= 1) return run_chains(bundle, cc);
  std::vector<ChainOutput> outs(cc.n_chains);
  parallel_tasks(cc.n_chains, jobs, [&](int k) {
    ChainConfig one = cc;
    one.chain_index = k;
    if (!cc.checkpoint_path.empty())
      one.checkpoint_path = cc.checkpoint_path + ".chain" + std::to_string(k);
    outs[static_cast<std::size_t>(k)] = run_chain(bundle, one);
  });
  return outs;
}

void write_manifest(const std::string& dir, const RunConfig& cfg, const std::string& command) {
  std::ostringstream hash;
  hash << std::hex << cfg.config_hash();
  json j;
  j["command"] = command;
  j["config_hash"] = hash.str();
  j["seed"] = command == "simulate" ? cfg.synth.seed : cfg.chain.seed;
  j["variant"] = cfg.variant;
  j["prior"] = cfg.prior;
  j["version"] = kToolVersion;
  write_json((fs::path(dir) / "manifest.json").string(), j);
}

int cmd_fit(const RunConfig& cfg) {
  DataBundle b = load_bundle(cfg);
  if (const int rc = ensure_valid(b); rc != 0) return rc;

  const std::string out = cfg.resolved_out();
  fs::create_directories(out);
  ChainConfig cc = cfg.chain;
  cc.sampler_variant = cfg.parsed_variant();
  if (cc.checkpoint_every <= 0) cc.checkpoint_every = std::max(1, cc.n_iter / 4);
  if (cc.checkpoint_path.empty())
    cc.checkpoint_path = (fs::path(out) / "checkpoint.bin").string();

  const std::vector<ChainOutput> outputs = run_chain_pool(b, cc, cfg.jobs);
  save_archive(cfg.resolved_archive(), outputs);
  write_fit_artifacts(out, cfg, b, outputs);
  write_manifest(out, cfg, "fit");
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    std::cout << "chain " << k << ": " << outputs[k].prob_samples.size()
              << " samples, occurrence acceptance " << outputs[k].occ_acceptance() << "\n";
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_summarize(const RunConfig& cfg) {
  DataBundle b = load_bundle(cfg);
  if (const int rc = ensure_valid(b); rc != 0) return rc;
  const std::string arc = cfg.resolved_archive();
  if (!fs::exists(arc)) throw ConfigError("no sample archive at " + arc);
  const std::vector<ChainOutput> outputs = load_archive(arc);
  const std::string out = cfg.resolved_out();
  fs::create_directories(out);
  write_fit_artifacts(out, cfg, b, outputs);
  write_manifest(out, cfg, "summarize");
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_cv(const RunConfig& cfg) {
  const DataBundle b = load_bundle(cfg);
  if (const int rc = ensure_valid(b); rc != 0) return rc;
  const TierMap tiers = cfg.parsed_prior();
  ChainConfig cc = cfg.chain;
  cc.sampler_variant = cfg.parsed_variant();
  cc.checkpoint_path.clear();  // replicate fits are transient
  cc.checkpoint_every = 0;
  cc.validate();

  std::vector<CvRow> rows(static_cast<std::size_t>(cfg.cv_replicates));
  std::vector<double> bound_hi(rows.size(), 0.0);
  parallel_tasks(cfg.cv_replicates, cfg.jobs > 0 ? cfg.jobs : cc.n_chains, [&](int r) {
    const Holdout h = make_holdout(b.A, b.F, cfg.cv_pairs, cc.seed, r);
    DataBundle masked = b;
    masked.A = h.A;
    masked.F = h.F;
    // the holdout must not leak back in through species-level observation
    masked.occ_prior = build_occurrence_prior(masked.A, masked.studies, tiers);
    const std::vector<ChainOutput> outs = run_chains(masked, cc);
    const PosteriorSummary s = summarize(outs, masked.A);
    CvRow row;
    row.replicate = r;
    row.variant = cfg.variant;
    row.pseudo_precision = pseudo_precision(s.mean_prob, h.spec);
    row.recall_50 = recall_at(s.mean_prob, h.spec, 0.5);
    row.recall_75 = recall_at(s.mean_prob, h.spec, 0.75);
    rows[static_cast<std::size_t>(r)] = row;
    bound_hi[static_cast<std::size_t>(r)] = pseudo_precision_bounds(s.mean_prob.mean()).second;
  });

  const std::string out = cfg.resolved_out();
  fs::create_directories(out);
  write_cv_report((fs::path(out) / "cv_report.csv").string(), rows);
  std::vector<double> pp, r50, r75;
  for (const CvRow& row : rows) {
    pp.push_back(row.pseudo_precision);
    r50.push_back(row.recall_50);
    r75.push_back(row.recall_75);
  }
  json j;
  j["variant"] = cfg.variant;
  j["prior"] = cfg.prior;
  j["replicates"] = cfg.cv_replicates;
  j["pairs_per_replicate"] = cfg.cv_pairs;
  j["pseudo_precision"] = {{"mean", vec_mean(pp)}, {"sd", vec_sd(pp)}};
  j["recall_50"] = {{"mean", vec_mean(r50)}, {"sd", vec_sd(r50)}};
  j["recall_75"] = {{"mean", vec_mean(r75)}, {"sd", vec_sd(r75)}};
  j["pseudo_precision_bounds"] = {{"low", 1.0}, {"high", vec_mean(bound_hi)}};
  write_json((fs::path(out) / "cv_summary.json").string(), j);
  write_manifest(out, cfg, "cv");
  std::cout << "pseudo-precision " << vec_mean(pp) << " +/- " << vec_sd(pp) << " over "
            << cfg.cv_replicates << " replicates\n";
  return 0;
}

int cmd_traits(const RunConfig& cfg) {
  DataBundle b = load_bundle(cfg);
  if (const int rc = ensure_valid(b); rc != 0) return rc;
  const std::string arc = cfg.resolved_archive();
  if (!fs::exists(arc)) throw ConfigError("no sample archive at " + arc);
  const std::vector<ChainOutput> outputs = load_archive(arc);
  const std::string out = cfg.resolved_out();
  fs::create_directories(out);

  std::ofstream rep((fs::path(out) / "trait_importance.csv").string());
  if (!rep) throw ConfigError("cannot write trait_importance.csv");
  rep.precision(10);
  rep << "side,trait,importance,t_hat,degenerate_skipped,error\n";
  for (const bool plant_side : {false, true}) {
    const Eigen::MatrixXd& T = plant_side ? b.traits.W : b.traits.X;
    const std::vector<std::string>& names = plant_side ? b.traits.w_names : b.traits.x_names;
    const std::vector<std::string>& partners =
        plant_side ? b.species.animal_labels : b.species.plant_labels;
    const char* side = plant_side ? "plant" : "animal";
    if (T.cols() == 0) continue;
    const std::vector<Eigen::MatrixXd> samples = logit_link_samples(outputs, plant_side);
    Eigen::MatrixXd signed_table(T.cols(), static_cast<int>(partners.size()));
    for (int c = 0; c < T.cols(); ++c) {
      try {
        const TraitImportance vi = variable_importance(T.col(c), samples,
                                                       cfg.trait_permutations, cfg.chain.seed);
        rep << side << "," << names[c] << "," << vi.value << "," << vi.t_hat << ","
            << vi.degenerate_skipped << ",\n";
      } catch (const std::invalid_argument& e) {
        rep << side << "," << names[c] << ",,,," << e.what() << "\n";
      }
      try {
        signed_table.row(c) = signed_trait_correlations(T.col(c), samples).transpose();
      } catch (const std::invalid_argument&) {
        signed_table.row(c).setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    }
    write_labeled_matrix(
        (fs::path(out) / (std::string("signed_") + side + ".csv")).string(), signed_table,
        names, partners, "trait");
  }
  rep.close();
  write_manifest(out, cfg, "traits");
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  const SynthResult r = generate(cfg.synth);
  const std::string out = cfg.resolved_out();
  write_dataset(out, r);
  write_manifest(out, cfg, "simulate");
  std::cout << "simulated " << r.bundle.A.n_animals() << " animals x "
            << r.bundle.A.n_plants() << " plants x " << r.bundle.A.n_studies()
            << " studies, " << r.bundle.A.entries().size() << " records\n";
  return 0;
}

int cmd_validate(const RunConfig& cfg) {
  const DataBundle b = load_bundle(cfg);
  const ValidationReport rep = validate_inputs(b);
  if (!rep.ok()) {
    std::cerr << rep.to_string();
    return 2;
  }
  std::cout << "inputs ok: " << b.A.n_animals() << " animals, " << b.A.n_plants()
            << " plants, " << b.A.n_studies() << " studies, " << b.A.entries().size()
            << " records\n";
  return 0;
}

int run_command(const std::string& command, const RunConfig& cfg) {
  try {
    if (command == "fit") return cmd_fit(cfg);
    if (command == "cv") return cmd_cv(cfg);
    if (command == "traits") return cmd_traits(cfg);
    if (command == "summarize") return cmd_summarize(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "validate") return cmd_validate(cfg);
    std::cerr << "unknown command '" << command << "'\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace biplink
