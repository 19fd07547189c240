#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rrse/config.hpp"
#include "rrse/metrics.hpp"

// Orchestration behind the CLI subcommands. Every command writes its outputs
// under one directory with fixed names (metrics.csv, report.json, run.json,
// checkpoints/) and run.json holds everything needed to repeat the run.

namespace rrse {

using LogFn = std::function<void(const std::string&)>;

struct VariantOutcome {
  Variant variant = Variant::baseline;
  NetworkSpec spec;
  std::size_t parameters = 0;
  TrainResult training;
  MetricsReport validation;
  MetricsReport test;
};

/// Labels each case by tiled inference and scores it. Binary models are
/// scored against fused labels.
MetricsReport evaluate_model(Model& model, const std::vector<const Case*>& cases,
                             std::size_t tile_input);

/// Loads cfg.dataset, generating it first when cfg.synth is set and the
/// directory has no dataset.json.
Dataset prepare_dataset(const ExperimentConfig& cfg, const LogFn& log = {});

/// Trains one variant from seed cfg.train.seed and saves its checkpoint.
VariantOutcome train_variant(const ExperimentConfig& cfg, Variant variant, const Dataset& data,
                             const std::filesystem::path& checkpoint_dir, const LogFn& log = {});

/// `train`: metrics.csv (history), report.json, run.json, checkpoints/<variant>/.
VariantOutcome run_train(const ExperimentConfig& cfg, const LogFn& log = {});

/// `compare`: all five variants with a shared seed. metrics.csv holds the
/// test-split table, histories/<variant>.csv the loss curves.
std::vector<VariantOutcome> run_compare(const ExperimentConfig& cfg, const LogFn& log = {});

void run_synth(const SynthConfig& cfg, const std::filesystem::path& out);

struct SegmentRequest {
  std::string stage1;
  std::string stage2;
  std::string input;
  std::string out;
  std::size_t margin = 10;
  std::size_t tile_input = 128;
};

/// Writes <stem>.labels.rrse, <stem>.stage1.rrse, report.json and run.json.
CascadeResult run_segment(const SegmentRequest& req);

struct EvalRequest {
  std::string pred;
  std::string truth;
  std::string out;
};

/// Pairs every *.labels.rrse under pred with the same file name under truth.
MetricsReport run_eval(const EvalRequest& req);

struct GradcheckRequest {
  std::string block;
  std::string out;  // optional; writes metrics.csv / report.json / run.json when set
};

/// Returns true when every row passes.
bool run_gradcheck(const GradcheckRequest& req, const LogFn& log = {});

/// Repeats the command recorded in a run.json, optionally into another directory.
int rerun(const std::filesystem::path& run_json, const std::optional<std::string>& out,
          const LogFn& log = {});

/// Row label used in compare tables: baseline, +recomb, +rr_se, +rr_segse, baseline_wide.
std::string variant_label(Variant v);

}  // namespace rrse
