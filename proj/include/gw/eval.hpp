#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gw/features.hpp"
#include "gw/nn.hpp"
#include "gw/survey.hpp"

namespace gw {

// --- correlation metrics -------------------------------------------------

// Square of the sample Pearson correlation. Constant input is an error
// ("undefined correlation"), never silently 0.
double pearson_r2(const std::vector<double>& pred, const std::vector<double>& truth);

// Squared Spearman correlation: Pearson over average ranks (ties share the
// mean of their positions).
double spearman_rho2(const std::vector<double>& pred, const std::vector<double>& truth);

std::vector<double> average_ranks(const std::vector<double>& values);

struct Histogram {
  double lo = 0.0, hi = 0.0;  // full range covered by the bins
  std::vector<uint64_t> counts;
};

// Histogram of rank(pred_i) - rank(truth_i) over [-(n-1)-0.5, (n-1)+0.5].
Histogram rank_difference_histogram(const std::vector<double>& pred,
                                    const std::vector<double>& truth, uint32_t bins);

// --- experiments ---------------------------------------------------------

enum class Regime : uint32_t { Intra = 0, Cross = 1, LeaveOneOut = 2 };
enum class ModelKind : uint32_t { NL = 0, WE = 1, MM = 2 };

std::string to_string(Regime regime);
std::string to_string(ModelKind kind);
Regime regime_from_string(const std::string& s);
ModelKind model_kind_from_string(const std::string& s);

struct ExperimentSpec {
  Regime regime = Regime::Intra;
  std::vector<std::string> train_countries;
  std::vector<std::string> test_countries;
  ModelKind model_kind = ModelKind::WE;
  uint32_t n = 10;               // neighbor count for text features
  std::string outcome = "wealth";
  uint64_t seed = 1;

  void validate() const;
};

// Inputs shared by all experiments: survey points (truth in `outcome`),
// text features keyed by cluster id, and images keyed by cluster id.
struct DataBundle {
  std::vector<SurveyPoint> points;
  const FeatureFile* features = nullptr;          // required for WE/MM
  const std::map<std::string, ImageGrid>* images = nullptr;  // for NL/MM
};

// Architecture widths used when eval builds models; defaults follow the
// shipped model shapes and every width stays configurable.
struct ModelShapes {
  std::vector<uint32_t> mlp_hidden = {512, 256, 64};
  std::vector<Activation> mlp_activations = {Activation::Relu, Activation::Relu,
                                             Activation::Sigmoid};
  CnnConfig cnn;
  std::vector<uint32_t> image_head = {384, 256};
  std::vector<uint32_t> trunk = {1024, 512, 256, 64};
};

struct TrainOutput {
  std::vector<double> predictions;  // over the test set, in order
  TrainResult train_result;
};

// Hook for tests: given train/test samples, produce test predictions. The
// default trains the spec's model kind from scratch.
using Trainer = std::function<TrainOutput(const std::vector<Sample>& train,
                                          const std::vector<Sample>& test,
                                          const ExperimentSpec& spec)>;

struct EvalContext {
  TrainConfig train;
  ModelShapes shapes;
  Trainer trainer;  // empty -> default trainer
};

struct EvalReport {
  ExperimentSpec spec;
  double pearson = 0.0;   // r^2
  double spearman = 0.0;  // rho^2
  std::vector<double> truths;
  std::vector<double> predictions;
  std::vector<double> lats, lons;  // test-point coordinates, aligned
  std::vector<double> train_mse;   // per-epoch training loss trace
  double wall_seconds = 0.0;
};

// Trains on the spec's train set and evaluates on the disjoint test set.
// Intra: seeded 80/20 cluster-level split within the (single) country.
// Cross/leave-one-out: train and test cluster sets are asserted disjoint.
EvalReport run_experiment(const ExperimentSpec& spec, const DataBundle& bundle,
                          const EvalContext& ctx);

// (All-inclusive) grid: rows = tested-on, columns = trained-on, both ending
// with "All". Column All = train on everything except the row's country;
// row All = test on the union of the other countries; (All, All) = pooled
// intra split. Cells whose experiment fails (e.g. constant predictions)
// hold NaN.
struct GridResult {
  std::vector<std::string> test_labels;   // rows
  std::vector<std::string> train_labels;  // columns
  std::vector<std::vector<double>> r2;    // [row][col]
};

GridResult run_grid(const std::vector<std::string>& countries, ModelKind kind,
                    uint32_t n, uint64_t seed, const std::string& outcome,
                    const DataBundle& bundle, const EvalContext& ctx);

// --- writers -------------------------------------------------------------

void write_report_json(const EvalReport& report, std::ostream& out);
void write_matrix_csv(const GridResult& grid, std::ostream& out);
void write_predictions_csv(const EvalReport& report, std::ostream& out);

// Slice a stored feature row (built with n_file neighbors) down to n_use:
// first n_use embeddings plus first n_use distances, as doubles.
std::vector<double> feature_slice(const FeatureVector& row, uint32_t n_use);

}  // namespace gw
