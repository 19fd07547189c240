// rrse: synthetic data, training, cascade segmentation, evaluation and
// gradient checks from the command line.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rrse/experiment.hpp"

namespace {

void log_line(const std::string& line) { std::cerr << line << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recombination / recalibration FCN toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  rrse::SynthConfig synth;
  std::string synth_out;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic nested-ellipse dataset");
  cmd_synth->add_option("--out", synth_out, "Dataset directory")->required();
  cmd_synth->add_option("--cases", synth.cases, "Number of cases (>= 5)")->capture_default_str();
  cmd_synth->add_option("--height", synth.height, "Image height (>= 64)")->capture_default_str();
  cmd_synth->add_option("--width", synth.width, "Image width (>= 64)")->capture_default_str();
  cmd_synth->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  cmd_synth->add_option("--noise", synth.noise_sigma, "Noise standard deviation")
      ->capture_default_str();

  std::string train_config, train_variant, train_out;
  std::optional<std::size_t> train_iterations;
  auto* cmd_train = app.add_subcommand("train", "Train one network variant");
  cmd_train->add_option("--config", train_config, "Experiment config (JSON)")->required();
  cmd_train->add_option("--variant", train_variant, "Overrides the config variant")
      ->check(CLI::IsMember({"baseline", "recomb", "rr_se", "rr_segse", "baseline_wide", "binary"}));
  cmd_train->add_option("--out", train_out, "Overrides the config output directory");
  cmd_train->add_option("--iterations", train_iterations, "Overrides train.iterations");

  rrse::SegmentRequest seg;
  auto* cmd_segment = app.add_subcommand("segment", "Two-stage cascade segmentation of one case");
  cmd_segment->add_option("--stage1", seg.stage1, "Binary whole-tumour checkpoint")->required();
  cmd_segment->add_option("--stage2", seg.stage2, "Multi-class checkpoint")->required();
  cmd_segment->add_option("--input", seg.input, "Image tensor [C,H,W] or [S,C,H,W]")->required();
  cmd_segment->add_option("--out", seg.out, "Output directory")->required();
  cmd_segment->add_option("--margin", seg.margin, "ROI margin in pixels")->capture_default_str();
  cmd_segment->add_option("--tile", seg.tile_input, "Requested input tile extent")
      ->capture_default_str();

  rrse::EvalRequest eval;
  auto* cmd_eval = app.add_subcommand("eval", "Score predicted label maps against ground truth");
  cmd_eval->add_option("--pred", eval.pred, "Directory of *.labels.rrse predictions")->required();
  cmd_eval->add_option("--truth", eval.truth, "Directory with matching ground-truth files")
      ->required();
  cmd_eval->add_option("--out", eval.out, "Output directory")->required();

  rrse::GradcheckRequest grad;
  auto* cmd_grad = app.add_subcommand("gradcheck", "Finite-difference check of every op and block");
  cmd_grad->add_option("--block", grad.block, "Case name or family prefix (e.g. segse)");
  cmd_grad->add_option("--out", grad.out, "Optional output directory");

  std::string compare_config, compare_out;
  std::optional<std::size_t> compare_iterations;
  auto* cmd_compare = app.add_subcommand("compare", "Train and compare all five variants");
  cmd_compare->add_option("--config", compare_config, "Experiment config (JSON)")->required();
  cmd_compare->add_option("--out", compare_out, "Overrides the config output directory");
  cmd_compare->add_option("--iterations", compare_iterations, "Overrides train.iterations");

  std::string rerun_path;
  std::optional<std::string> rerun_out;
  auto* cmd_rerun = app.add_subcommand("rerun", "Repeat a run from its run.json");
  cmd_rerun->add_option("--run", rerun_path, "run.json of a previous run")->required();
  cmd_rerun->add_option("--out", rerun_out, "Write into this directory instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help() << std::endl;
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (*cmd_synth) {
      rrse::run_synth(synth, synth_out);
      std::cout << "wrote " << synth.cases << " cases to " << synth_out << "\n";
    } else if (*cmd_train) {
      rrse::ExperimentConfig cfg = rrse::load_experiment_config(train_config);
      if (!train_variant.empty()) cfg.variant = train_variant;
      if (!train_out.empty()) cfg.out = train_out;
      if (train_iterations) cfg.train.iterations = *train_iterations;
      const rrse::VariantOutcome o = rrse::run_train(cfg, log_line);
      std::printf("%s: %zu parameters, test dice whole %.4f core %.4f enh %.4f\n",
                  cfg.variant.c_str(), o.parameters, o.test.summary[0].dice.mean,
                  o.test.summary[1].dice.mean, o.test.summary[2].dice.mean);
    } else if (*cmd_segment) {
      const rrse::CascadeResult r = rrse::run_segment(seg);
      if (r.roi.empty) {
        std::cout << "stage 1 found no tumour; output is all background\n";
      } else {
        std::printf("ROI rows %zu-%zu cols %zu-%zu\n", r.roi.top, r.roi.bottom, r.roi.left,
                    r.roi.right);
      }
    } else if (*cmd_eval) {
      const rrse::MetricsReport r = rrse::run_eval(eval);
      for (rrse::Region region : rrse::kRegions) {
        const auto& s = r.summary[static_cast<std::size_t>(region)];
        std::printf("%-9s dice %s hd95 %s ppv %s sens %s\n", rrse::to_string(region).c_str(),
                    rrse::format_number(s.dice.mean).c_str(), rrse::format_number(s.hd95.mean).c_str(),
                    rrse::format_number(s.ppv.mean).c_str(),
                    rrse::format_number(s.sensitivity.mean).c_str());
      }
    } else if (*cmd_grad) {
      const bool pass = rrse::run_gradcheck(grad, [](const std::string& s) { std::cout << s; });
      std::cout << (pass ? "all gradients within 1e-4\n" : "gradient check FAILED\n");
      return pass ? 0 : 1;
    } else if (*cmd_compare) {
      rrse::ExperimentConfig cfg = rrse::load_experiment_config(compare_config);
      if (!compare_out.empty()) cfg.out = compare_out;
      if (compare_iterations) cfg.train.iterations = *compare_iterations;
      const auto outcomes = rrse::run_compare(cfg, log_line);
      std::printf("%-14s %10s %8s %8s %8s\n", "variant", "params", "whole", "core", "enh");
      for (const auto& o : outcomes) {
        std::printf("%-14s %10zu %8.4f %8.4f %8.4f\n", rrse::variant_label(o.variant).c_str(),
                    o.parameters, o.test.summary[0].dice.mean, o.test.summary[1].dice.mean,
                    o.test.summary[2].dice.mean);
      }
    } else if (*cmd_rerun) {
      const int rc = rrse::rerun(rerun_path, rerun_out, log_line);
      if (rc != 0) return rc;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "done in %.1f s\n", seconds);
  return 0;
}
