#include <bit>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gw/cli.hpp"
#include "gw/error.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  uint32_t threads = 0;
  uint32_t n = 0;
  uint32_t epochs = 0;
  double lr = 0.0;
  bool lr_set = false;
};

gw::RunConfig resolve_config(const GlobalArgs& args) {
  gw::RunConfig cfg =
      args.config_path.empty() ? gw::RunConfig{} : gw::load_run_config(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed_set) cfg.seed = args.seed;
  if (args.threads > 0) cfg.threads = args.threads;
  if (args.n > 0) cfg.n = args.n;
  if (args.epochs > 0) cfg.train.epochs = args.epochs;
  if (args.lr_set) cfg.train.lr = args.lr;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  static_assert(std::endian::native == std::endian::little,
                "binary formats assume a little-endian host");

  CLI::App app{"geowealth: geolocated-article embeddings for wealth regression"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  GlobalArgs args;
  app.add_option("--config", args.config_path, "run config JSON");
  app.add_option("--out", args.out_dir, "output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", args.seed, "global seed (overrides config)");
  app.add_option("--threads", args.threads, "worker threads (1 = deterministic)");
  app.add_option("--n", args.n, "neighbor count override");
  app.add_option("--epochs", args.epochs, "regression epoch override");
  auto* lr_opt = app.add_option("--lr", args.lr, "regression learning-rate override");

  app.add_subcommand("synth", "generate the synthetic dataset");
  app.add_subcommand("embed", "train document embeddings over the corpus");
  app.add_subcommand("features", "build per-survey-point feature vectors");
  app.add_subcommand("train", "train one regressor on all survey points");
  app.add_subcommand("eval", "run the configured experiments");
  auto* sweep_cmd = app.add_subcommand("sweep", "vary the neighbor count N");
  std::vector<uint32_t> sweep_ns = {1, 5, 10, 15};
  sweep_cmd->add_option("--ns", sweep_ns, "N values to sweep");
  auto* pca_cmd = app.add_subcommand("pca", "project quantile embeddings with PCA");
  std::vector<std::string> pca_categories;
  pca_cmd->add_option("--categories", pca_categories,
                      "restrict category articles (default: all tagged)");

  CLI11_PARSE(app, argc, argv);
  args.seed_set = seed_opt->count() > 0;
  args.lr_set = lr_opt->count() > 0;

  try {
    const gw::RunConfig cfg = resolve_config(args);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "synth") gw::cmd_synth(cfg);
    else if (cmd == "embed") gw::cmd_embed(cfg);
    else if (cmd == "features") gw::cmd_features(cfg);
    else if (cmd == "train") gw::cmd_train(cfg);
    else if (cmd == "eval") gw::cmd_eval(cfg);
    else if (cmd == "sweep") gw::cmd_sweep(cfg, sweep_ns);
    else if (cmd == "pca") gw::cmd_pca(cfg, pca_categories);
  } catch (const gw::Error& e) {
    std::cerr << "error: " << e.qualified() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
