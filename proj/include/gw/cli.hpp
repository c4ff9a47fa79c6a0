#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gw/embed.hpp"
#include "gw/eval.hpp"
#include "gw/nn.hpp"

namespace gw {

inline constexpr const char* kToolVersion = "0.1.0";

// Synthetic-dataset knobs applied to the stock regions.
struct SynthSettings {
  std::vector<std::string> regions = {"RegionA", "RegionB"};
  uint32_t articles = 2000;
  uint32_t surveys = 300;
  double survey_noise = 0.1;
  double dark_fraction = 0.0;
  uint32_t image_size = 32;
  double image_noise = 0.05;
  uint32_t tokens_min = 40;
  uint32_t tokens_max = 60;
};

// One JSON document drives every command. Relative paths resolve against
// the output directory so a pipeline of commands can share one config.
struct RunConfig {
  uint64_t seed = 1;
  uint32_t threads = 1;

  std::string out_dir = "out";
  std::string corpus = "corpus.jsonl";
  std::string surveys = "surveys.csv";
  std::string images_dir = "images";
  std::string model_path = "model.pvdb";
  std::string features_path = "features.gwft";
  std::string regressor_path = "regressor.gwnn";

  EmbedConfig embed;
  uint32_t n = 10;
  TrainConfig train;
  ModelShapes shapes;
  std::string model_kind = "WE";  // used by cmd_train
  std::string outcome = "wealth";
  std::vector<ExperimentSpec> experiments;  // empty -> one default intra run
  std::optional<std::vector<std::string>> grid_countries;
  std::string grid_model = "WE";
  SynthSettings synth;

  // Resolve a configured path against out_dir unless absolute.
  std::string resolve(const std::string& path) const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// Commands. Each writes its outputs plus a manifest.json (config snapshot,
// seeds, tool version, input digests) under the resolved output directory,
// and throws gw::Error on failure.
void cmd_synth(const RunConfig& config);
void cmd_embed(const RunConfig& config);
void cmd_features(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_sweep(const RunConfig& config, const std::vector<uint32_t>& ns);
void cmd_pca(const RunConfig& config, const std::vector<std::string>& categories);

}  // namespace gw
