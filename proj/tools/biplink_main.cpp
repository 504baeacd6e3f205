#include <CLI11.hpp>

#include "biplink/runconfig.hpp"

using biplink::RunConfig;

namespace {

void add_input_flags(CLI::App* c, RunConfig& cfg) {
  c->add_option("--data", cfg.data_dir,
                "dataset directory in the simulate layout; explicit paths override");
  c->add_option("--interactions", cfg.interactions, "interaction records csv");
  c->add_option("--studies", cfg.studies_file, "study metadata csv");
  c->add_option("--animal-traits", cfg.animal_traits, "animal trait csv (optional)");
  c->add_option("--plant-traits", cfg.plant_traits, "plant trait csv (optional)");
  c->add_option("--animal-phylo", cfg.animal_phylo, "animal phylogeny correlation csv");
  c->add_option("--plant-phylo", cfg.plant_phylo, "plant phylogeny correlation csv");
  c->add_option("--animal-trait-kinds", cfg.animal_trait_kinds,
                "comma list of continuous|binary per column");
  c->add_option("--plant-trait-kinds", cfg.plant_trait_kinds,
                "comma list of continuous|binary per column");
  c->add_option("--prior", cfg.prior, "occurrence prior: naive|default75|expert|file:<path>")
      ->capture_default_str();
}

void add_chain_flags(CLI::App* c, RunConfig& cfg) {
  c->add_option("--variant", cfg.variant, "sampler variant: coil|coilplus")
      ->capture_default_str();
  c->add_option("--iters", cfg.chain.n_iter, "sweeps per chain")->capture_default_str();
  c->add_option("--burnin", cfg.chain.n_burn, "burn-in sweeps")->capture_default_str();
  c->add_option("--thin", cfg.chain.thin_keep_fraction,
                "fraction of post-burn-in sweeps retained")
      ->capture_default_str();
  c->add_option("--chains", cfg.chain.n_chains, "number of chains")->capture_default_str();
  c->add_option("--seed", cfg.chain.seed, "run seed")->capture_default_str();
  c->add_option("--jobs", cfg.jobs, "worker pool width (0 = chain count)")
      ->capture_default_str();
  c->add_option("--latent-dims", cfg.chain.hyperparams.H, "latent factor dimension")
      ->capture_default_str();
  c->add_option("--threshold", cfg.thresholds, "link probability report thresholds")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariate-informed Bayesian link prediction for bipartite meta-networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key-value config file; command-line flags override it");
  RunConfig cfg;
  app.add_option("--out", cfg.out_dir, "output directory (default $BIPLINK_OUT, else .)");

  CLI::App* fit = app.add_subcommand("fit", "run the sampler and write posterior artifacts");
  add_input_flags(fit, cfg);
  add_chain_flags(fit, cfg);
  fit->add_option("--checkpoint-every", cfg.chain.checkpoint_every,
                  "sweeps between checkpoints (0 = every quarter run)");
  fit->add_flag("--resume", cfg.chain.resume, "resume from an existing checkpoint");
  fit->add_option("--archive", cfg.archive, "sample archive path (default <out>/samples.bin)");

  CLI::App* cv = app.add_subcommand("cv", "held-out pair cross-validation");
  add_input_flags(cv, cfg);
  add_chain_flags(cv, cfg);
  cv->add_option("--replicates", cfg.cv_replicates, "holdout replicates")
      ->capture_default_str();
  cv->add_option("--pairs", cfg.cv_pairs, "held-out pairs per replicate")
      ->capture_default_str();

  CLI::App* traits = app.add_subcommand("traits", "trait importance from a fit archive");
  add_input_flags(traits, cfg);
  traits->add_option("--archive", cfg.archive, "sample archive path");
  traits->add_option("--permutations", cfg.trait_permutations, "permutation test size")
      ->capture_default_str();
  traits->add_option("--seed", cfg.chain.seed, "permutation seed")->capture_default_str();

  CLI::App* summarize = app.add_subcommand("summarize", "posterior summaries from an archive");
  add_input_flags(summarize, cfg);
  summarize->add_option("--archive", cfg.archive, "sample archive path");
  summarize->add_option("--threshold", cfg.thresholds, "link probability report thresholds")
      ->capture_default_str();
  summarize->add_option("--variant", cfg.variant, "variant recorded in the summary")
      ->capture_default_str();

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  simulate->add_option("--seed", cfg.synth.seed, "generator seed")->capture_default_str();
  simulate->add_option("--animals", cfg.synth.n_F)->capture_default_str();
  simulate->add_option("--plants", cfg.synth.n_P)->capture_default_str();
  simulate->add_option("--studies", cfg.synth.n_S)->capture_default_str();
  simulate->add_option("--true-dims", cfg.synth.H_true)->capture_default_str();
  simulate
      ->add_option_function<double>(
          "--rho", [&cfg](const double& v) {
            cfg.synth.rho_u_true = v;
            cfg.synth.rho_v_true = v;
          },
          "phylogeny blend weight for both sides")
      ->expected(1);
  simulate->add_option("--lambda0", cfg.synth.lambda0_true)->capture_default_str();
  simulate->add_option("--lambda", cfg.synth.lambda_true)->capture_default_str();
  simulate->add_option("--det-min", cfg.synth.det_logit_min)->capture_default_str();
  simulate->add_option("--det-max", cfg.synth.det_logit_max)->capture_default_str();
  simulate->add_option("--clade-size", cfg.synth.clade_size)->capture_default_str();
  simulate->add_option("--clade-corr", cfg.synth.clade_corr)->capture_default_str();
  simulate->add_option("--trait-effect", cfg.synth.trait_effect)->capture_default_str();
  simulate->add_option("--frac-zoocentric", cfg.synth.frac_zoocentric)->capture_default_str();
  simulate->add_option("--frac-phytocentric", cfg.synth.frac_phytocentric)
      ->capture_default_str();
  simulate->add_option("--frac-network", cfg.synth.frac_network)->capture_default_str();
  simulate->add_option("--frac-pair", cfg.synth.frac_pair)->capture_default_str();
  simulate->add_option("--occ-same-site", cfg.synth.occ_same_site)->capture_default_str();
  simulate->add_option("--occ-same-country", cfg.synth.occ_same_country)
      ->capture_default_str();
  simulate->add_option("--occ-same-zone", cfg.synth.occ_same_zone)->capture_default_str();
  simulate->add_option("--occ-diff-zone", cfg.synth.occ_diff_zone)->capture_default_str();
  simulate->add_option("--zones", cfg.synth.n_zones)->capture_default_str();
  simulate->add_option("--countries-per-zone", cfg.synth.countries_per_zone)
      ->capture_default_str();
  simulate->add_option("--sites-per-country", cfg.synth.sites_per_country)
      ->capture_default_str();

  CLI::App* validate = app.add_subcommand("validate", "check inputs and report violations");
  add_input_flags(validate, cfg);

  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return biplink::run_command(app.get_subcommands().front()->get_name(), cfg);
}
