// Acceptance suite: one PASS/FAIL line per criterion.
//
//   rrse_acceptance [--work DIR] [--only 1,4,7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "rrse/blocks.hpp"
#include "rrse/checkpoint.hpp"
#include "rrse/config.hpp"
#include "rrse/experiment.hpp"
#include "rrse/gradcheck_suite.hpp"
#include "rrse/inference.hpp"
#include "rrse/metrics.hpp"
#include "rrse/ops.hpp"
#include "rrse/tensor_io.hpp"
#include "rrse/training.hpp"

#ifndef RRSE_SOURCE_DIR
#error "RRSE_SOURCE_DIR must name the source tree"
#endif

using namespace rrse;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void log_line(const std::string& s) { std::cerr << "  " << s << "\n"; }

// --- 1: gradient suite ------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const std::vector<GradcheckRow> rows = run_gradcheck_suite("", {1, 2, 3}, 1e-4);
  const double elapsed = seconds_since(t0);

  const std::set<std::string> required = {
      "conv2d_d1", "conv2d_d2", "conv2d_d3", "conv1x1",       "maxpool",  "upsample",
      "global_avg_pool", "batchnorm_train", "dropout_frozen", "relu", "sigmoid",
      "crossentropy", "recombination", "se", "segse_d1", "segse_d2", "segse_d3",
      "rr_none", "rr_se", "rr_segse"};
  std::map<std::string, int> seeds_seen;
  double worst = 0.0;
  std::string worst_name, failures;
  for (const GradcheckRow& r : rows) {
    ++seeds_seen[r.name];
    if (r.report.max_rel_err > worst) {
      worst = r.report.max_rel_err;
      worst_name = r.name;
    }
    if (!r.report.pass || !(r.report.max_rel_err < 1e-4)) failures += " " + r.name;
  }
  std::string missing;
  for (const std::string& n : required)
    if (seeds_seen[n] != 3) missing += " " + n;
  Outcome o;
  o.pass = failures.empty() && missing.empty() && elapsed < 120.0;
  o.detail = std::to_string(rows.size()) + " checks, max rel err " + fmt("%.2e", worst) + " (" +
             worst_name + "), " + fmt("%.1f", elapsed) + " s";
  if (!failures.empty()) o.detail += "; failed:" + failures;
  if (!missing.empty()) o.detail += "; missing:" + missing;
  return o;
}

// --- 2: conv kernel vs direct loops -------------------------------------------

Outcome kernel_oracle() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> ch(1, 8), dil(1, 3), extra(0, 12), batch(1, 2),
      kern(0, 2);
  double worst_f = 0.0, worst_d = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = kern(rng) == 0 ? 1 : 3, d = dil(rng);
    const std::size_t ci = ch(rng), co = ch(rng), n = batch(rng);
    const std::size_t h = (k - 1) * d + 1 + extra(rng), w = (k - 1) * d + 1 + extra(rng);

    auto pf = ConvParams<float>::make(ci, co, k, d, 1000 + trial);
    pf.bias = oracle::random_tensor<float>({co}, 2000 + trial);
    const Tensor xf = oracle::random_tensor<float>({n, ci, h, w}, 3000 + trial);
    const Tensor ref_f = oracle::conv2d(xf, pf.weight, pf.bias, d);
    worst_f = std::max(worst_f, max_relative_error(conv2d_valid(xf, pf), ref_f));
    worst_f = std::max(worst_f, max_relative_error(conv2d_valid_naive(xf, pf), ref_f));

    auto pd = ConvParams<double>::make(ci, co, k, d, 1000 + trial);
    pd.bias = oracle::random_tensor<double>({co}, 2000 + trial);
    const TensorD xd = oracle::random_tensor<double>({n, ci, h, w}, 3000 + trial);
    const TensorD ref_d = oracle::conv2d(xd, pd.weight, pd.bias, d);
    worst_d = std::max(worst_d, max_relative_error(conv2d_valid(xd, pd), ref_d));
  }
  return {worst_f < 1e-6 && worst_d < 1e-6, "50 shapes, max rel err float " + fmt("%.2e", worst_f) +
                                                ", double " + fmt("%.2e", worst_d)};
}

// --- 3: SE gates per channel, SegSE gates per unit -----------------------------

Outcome se_vs_segse() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> ch(2, 16), ext(0, 12), dil(1, 3), rsel(0, 2);
  const std::size_t rs[] = {2, 4, 10};
  int se_bad = 0, segse_bad = 0;
  double min_ratio = 1e300, se_spread = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t c = ch(rng), r = rs[rsel(rng)], d = dil(rng);
    const std::size_t h = 2 * d + 3 + ext(rng), w = 2 * d + 3 + ext(rng);
    const TensorD x = oracle::random_tensor<double>({c, h, w}, 500 + t);

    const auto se = SEParams<double>::make(c, r, 600 + t);
    const TensorD y = se_block(x, se), g = se_gate(x, se);
    bool ok = g.shape() == Shape{c, 1, 1};
    for (std::size_t k = 0; ok && k < c; ++k) {
      // Exact product with one scalar per channel, so y/x is the same
      // number at every pixel of that channel.
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = 0; i < h * w; ++i) {
        const double xv = x[k * h * w + i], yv = y[k * h * w + i];
        if (yv != g[k] * xv) ok = false;
        if (std::abs(xv) > 1e-3) {
          lo = std::min(lo, yv / xv);
          hi = std::max(hi, yv / xv);
        }
      }
      se_spread = std::max(se_spread, (hi - lo) / std::abs(g[k]));
    }
    se_bad += !ok;

    const auto sg = SegSEParams<double>::make(c, r, d, 700 + t);
    const TensorD gm = segse_gate(x, sg);
    bool shaped = gm.shape() == Shape{c, h - 2 * d, w - 2 * d};
    const std::size_t plane = (h - 2 * d) * (w - 2 * d);
    for (std::size_t k = 0; shaped && k < c; ++k) {
      const auto first = gm.values().begin() + static_cast<std::ptrdiff_t>(k * plane);
      const auto [mn, mx] = std::minmax_element(first, first + static_cast<std::ptrdiff_t>(plane));
      const double ratio = *mx / *mn;
      min_ratio = std::min(min_ratio, ratio);
      if (!(ratio > 1.0)) shaped = false;
    }
    segse_bad += !shaped;
  }
  return {se_bad == 0 && segse_bad == 0,
          "SE violations " + std::to_string(se_bad) + "/100 (ratio spread " +
              fmt("%.1e", se_spread) + "), SegSE flat gates " + std::to_string(segse_bad) +
              "/100 (min max/min " + fmt("%.4f", min_ratio) + ")"};
}

// --- 4: shape algebra -------------------------------------------------------

Outcome shape_algebra() {
  NetworkSpec base;
  base.base_channels = 4;
  std::mt19937_64 rng(4);
  int checked = 0, mismatches = 0, shrink_checked = 0;
  for (Variant v : kCompareVariants) {
    const NetworkSpec spec = variant_spec(base, v);
    Model m = Model::build(spec, 1);
    const std::size_t lo = m.min_input_extent();
    std::uniform_int_distribution<std::size_t> extent(lo, lo + 60);
    for (int t = 0; t < 5; ++t) {
      const std::size_t h = t == 0 ? lo : extent(rng), w = t == 0 ? lo : extent(rng);
      const ShapeReport r = m.walk(h, w);
      TapeF tape;
      std::vector<std::pair<std::size_t, std::size_t>> trace;
      ForwardOptions opts;
      opts.trace = &trace;
      const Tensor y = m.forward(tape, tape.constant(oracle::random_tensor<float>({1, 4, h, w}, 9)),
                                 m.bind(tape, false), opts)
                           .value();
      ++checked;
      const bool ok = r.valid &&
                      long(r.out_height) == oracle::fcn_output_extent(spec, long(h)) &&
                      long(r.out_width) == oracle::fcn_output_extent(spec, long(w)) &&
                      y.shape() == Shape{1, spec.num_classes, r.out_height, r.out_width} &&
                      trace == r.layer_extents;
      mismatches += !ok;
      for (std::size_t i = 0; i < m.layers().size(); ++i) {
        const Layer& l = m.layers()[i];
        if (l.kind != LayerKind::rr || l.mode != RRMode::segse) continue;
        ++shrink_checked;
        if (trace[i - 1].first - trace[i].first != 2 * l.dilation ||
            trace[i - 1].second - trace[i].second != 2 * l.dilation) {
          ++mismatches;
        }
      }
    }
  }
  return {mismatches == 0 && checked == 25 && shrink_checked > 0,
          std::to_string(checked) + " forward passes, " + std::to_string(shrink_checked) +
              " SegSE shrink checks, " + std::to_string(mismatches) + " mismatches"};
}

// --- 5: metric oracles ----------------------------------------------------------

Outcome metric_oracles() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> density(0.02, 0.6);
  int mismatches = 0, f1_checked = 0;
  double f1_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const RegionMask a = oracle::random_mask(16, 16, density(rng), rng);
    const RegionMask b = oracle::random_mask(16, 16, density(rng), rng);
    const auto ps = ppv_sensitivity(a, b);
    if (dice(a, b) != oracle::dice(a, b)) ++mismatches;
    if (hd95(a, b) != oracle::hausdorff(a, b, 95)) ++mismatches;
    if (ps.ppv != oracle::ppv(a, b)) ++mismatches;
    if (ps.sensitivity != oracle::sensitivity(a, b)) ++mismatches;
    if (ps.ppv + ps.sensitivity > 0) {
      ++f1_checked;
      f1_err = std::max(f1_err,
                        std::abs(dice(a, b) - 2 * ps.ppv * ps.sensitivity / (ps.ppv + ps.sensitivity)));
    }
  }
  return {mismatches == 0 && f1_err < 1e-9 && f1_checked > 0,
          "100 mask pairs, " + std::to_string(mismatches) + " mismatches, F1 identity err " +
              fmt("%.1e", f1_err)};
}

// --- 6: Adam ------------------------------------------------------------------

Outcome adam_checks() {
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  ParameterSet<double> p;
  p.add("theta", TensorD({1}, 0.0));
  auto st = AdamState<double>::init(p, cfg);
  adam_step(p, {TensorD({1}, 2.0)}, st);
  const double g = 2.0;
  const double m_hat = (1 - cfg.beta1) * g / (1 - cfg.beta1);
  const double v_hat = (1 - cfg.beta2) * g * g / (1 - cfg.beta2);
  const double expected = -cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  const double err = std::abs(p[0].value[0] - expected);

  ParameterSet<double> z;
  z.add("w", oracle::random_tensor<double>({5}, 1));
  const TensorD before = z[0].value;
  auto zs = AdamState<double>::init(z, cfg);
  adam_step(z, {TensorD::zeros({5})}, zs);
  const bool zero_grad = z[0].value == before && zs.step == 1;

  AdamConfig frozen;
  frozen.learning_rate = 0.0;
  auto fs_ = AdamState<double>::init(z, frozen);
  adam_step(z, {oracle::random_tensor<double>({5}, 2)}, fs_);
  const bool zero_lr = z[0].value == before;

  // The same no-op through one full training iteration.
  SynthConfig sc;
  sc.cases = 5;
  sc.height = sc.width = 64;
  const Dataset data{generate_synthetic_cases(sc)};
  NetworkSpec spec;
  spec.base_channels = 4;
  Model model = Model::build(variant_spec(spec, Variant::rr_segse), 3);
  const Model initial = model;
  TrainConfig tc;
  tc.iterations = 1;
  tc.batch_size = 2;
  tc.patch_size = model.aligned_input_extent(model.min_input_extent());
  tc.validation_every = 0;
  tc.adam.learning_rate = 0.0;
  train(model, data, tc);
  bool model_unchanged = true;
  for (std::size_t i = 0; i < model.parameters().size(); ++i) {
    if (model.parameters()[i].trainable &&
        model.parameters()[i].value != initial.parameters()[i].value) {
      model_unchanged = false;
    }
  }
  return {err < 1e-12 && zero_grad && zero_lr && model_unchanged,
          "first step err " + fmt("%.1e", err) + ", zero-grad no-op " + (zero_grad ? "ok" : "BROKEN") +
              ", zero-lr no-op " + (zero_lr ? "ok" : "BROKEN") + ", lr=0 training iteration " +
              (model_unchanged ? "ok" : "BROKEN")};
}

// --- 7: desk-scale ablation -----------------------------------------------------

struct Shared {
  fs::path work;
  ExperimentConfig compare_cfg;
  bool compare_done = false;
};

ExperimentConfig compare_config(const fs::path& work) {
  ExperimentConfig cfg =
      load_experiment_config((fs::path(RRSE_SOURCE_DIR) / "configs" / "compare.json").string());
  cfg.dataset = (work / "synth50").string();
  cfg.out = (work / "compare").string();
  return cfg;
}

Outcome ablation(Shared& shared) {
  ExperimentConfig& cfg = shared.compare_cfg;
  cfg = compare_config(shared.work);
  fs::remove_all(cfg.dataset);
  fs::remove_all(cfg.out);
  std::string problems;
  if (!cfg.synth || cfg.synth->cases != 50 || cfg.synth->height != 96 || cfg.synth->width != 96) {
    problems += " config is not 50 cases of 96x96;";
  }
  if (cfg.train.iterations > 2000) problems += " more than 2000 iterations;";

  const auto t0 = Clock::now();
  const std::vector<VariantOutcome> outcomes = run_compare(cfg, log_line);
  const double elapsed = seconds_since(t0);
  shared.compare_done = true;
  if (elapsed >= 1800.0) problems += " over 30 minutes;";

  double worst_whole = 1.0;
  for (const VariantOutcome& o : outcomes) {
    const double whole = o.validation.summary[0].dice.mean;
    worst_whole = std::min(worst_whole, whole);
    if (!(whole >= 0.90)) problems += " " + to_string(o.variant) + " whole Dice " + fmt("%.3f", whole) + ";";
  }
  if (outcomes.size() != 5) problems += " expected 5 variants;";

  const Json report = Json::parse(slurp(fs::path(cfg.out) / "report.json"));
  const std::vector<std::string> labels = {"baseline", "+recomb", "+rr_se", "+rr_segse",
                                           "baseline_wide"};
  if (!report.contains("variants") || report["variants"].size() != 5) {
    problems += " report lacks 5 variants;";
  } else {
    for (std::size_t i = 0; i < 5; ++i) {
      const Json& v = report["variants"][i];
      if (v.value("label", "") != labels[i]) problems += " variant " + std::to_string(i) + " label;";
      for (const char* split : {"validation", "test"})
        for (const char* region : {"whole", "core", "enhancing"})
          for (const char* metric : {"dice", "hd95", "ppv", "sensitivity"}) {
            if (!v.contains(split) || !v[split].contains(region) ||
                !v[split][region].contains(metric)) {
              problems += std::string(" missing ") + split + "/" + region + "/" + metric + ";";
            }
          }
    }
  }
  double rel = 1.0;
  if (report.contains("width_control")) {
    rel = report["width_control"].value("relative_difference", 1.0);
  }
  // Recompute from the parameter counts instead of trusting the report.
  const double segse = double(count_parameters(variant_spec(cfg.network, Variant::rr_segse)));
  const double wide = double(count_parameters(variant_spec(cfg.network, Variant::baseline_wide)));
  const double rel_check = std::abs(wide - segse) / segse;
  if (!(rel <= 0.05) || !(rel_check <= 0.05)) problems += " width control off by " + fmt("%.3f", rel_check) + ";";
  if (!report.contains("observations")) problems += " no observations;";

  std::ifstream csv(fs::path(cfg.out) / "metrics.csv");
  std::string line;
  std::getline(csv, line);
  if (line != "variant,parameters,dice_whole,dice_core,dice_enh,hd95_whole,hd95_core,hd95_enh") {
    problems += " metrics.csv header;";
  }
  for (const std::string& label : labels) {
    if (!std::getline(csv, line) || line.rfind(label + ",", 0) != 0) problems += " metrics.csv row " + label + ";";
  }

  std::string observation;
  if (report.contains("observations") && report["observations"].contains("validation")) {
    const Json& ob = report["observations"]["validation"];
    observation = std::string(", SegSE >= baseline (whole, val): ") +
                  (ob.value("segse_ge_baseline_whole", false) ? "yes" : "no");
  }
  return {problems.empty(), "min whole val Dice " + fmt("%.3f", worst_whole) + ", width diff " +
                                fmt("%.4f", rel_check) + ", " + fmt("%.0f", elapsed) + " s" +
                                observation + (problems.empty() ? "" : ";" + problems)};
}

// --- 8: cascade contract --------------------------------------------------------

Outcome cascade_contract(Shared& shared) {
  const fs::path root = shared.work / "cascade";
  fs::remove_all(root);
  ExperimentConfig cfg = shared.compare_done ? shared.compare_cfg : compare_config(shared.work);

  ExperimentConfig stage1 = cfg;
  stage1.variant = "binary";
  stage1.out = (root / "stage1").string();
  stage1.train.iterations = 150;
  stage1.train.validation_every = 0;
  run_train(stage1, log_line);
  const fs::path stage1_ckpt = root / "stage1" / "checkpoints" / "binary";

  fs::path stage2_ckpt = fs::path(cfg.out) / "checkpoints" / "rr_segse";
  if (!shared.compare_done) {
    ExperimentConfig s2 = cfg;
    s2.variant = "rr_segse";
    s2.out = (root / "stage2").string();
    s2.train.iterations = 150;
    s2.train.validation_every = 0;
    run_train(s2, log_line);
    stage2_ckpt = root / "stage2" / "checkpoints" / "rr_segse";
  }

  const Dataset data = load_dataset(cfg.dataset);
  const Case* test_case = data.split(Split::test).front();
  const fs::path input = root / (test_case->id + ".image.rrse");
  save_tensor(input, test_case->image);

  std::string problems;
  SegmentRequest req{stage1_ckpt.string(), stage2_ckpt.string(), input.string(),
                     (root / "seg").string(), 10, cfg.train.tile_input};
  run_segment(req);
  const LabelMap labels = load_label_map(root / "seg" / (test_case->id + ".labels.rrse"));
  const LabelMap mask = load_label_map(root / "seg" / (test_case->id + ".stage1.rrse"));

  // ROI recomputed here: bounding box of the stage-1 mask plus 10 pixels.
  const std::size_t H = mask.dim(0), W = mask.dim(1);
  long top = long(H), left = long(W), bottom = -1, right = -1;
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x)
      if (mask.at(y, x)) {
        top = std::min(top, long(y));
        bottom = std::max(bottom, long(y));
        left = std::min(left, long(x));
        right = std::max(right, long(x));
      }
  std::size_t labelled = 0, outside = 0;
  if (bottom < 0) {
    problems += " stage-1 mask is empty on a tumour case;";
  } else {
    top = std::max(0L, top - 10);
    left = std::max(0L, left - 10);
    bottom = std::min(long(H) - 1, bottom + 10);
    right = std::min(long(W) - 1, right + 10);
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        if (!labels.at(y, x)) continue;
        ++labelled;
        if (long(y) < top || long(y) > bottom || long(x) < left || long(x) > right) ++outside;
      }
  }
  if (labelled == 0) problems += " no tumour labels at all;";
  if (outside) problems += " " + std::to_string(outside) + " labels outside the ROI;";

  // Stage 1 that never fires: background logit pushed far above the rest.
  const fs::path silent = root / "stage1_silent";
  fs::copy(stage1_ckpt, silent, fs::copy_options::recursive);
  Tensor bias = load_tensor(silent / "head.bias.rrse");
  bias[0] = 1e6f;
  save_tensor(silent / "head.bias.rrse", bias);
  req.stage1 = silent.string();
  req.out = (root / "seg_empty").string();
  run_segment(req);
  const LabelMap empty_labels = load_label_map(root / "seg_empty" / (test_case->id + ".labels.rrse"));
  const LabelMap empty_mask = load_label_map(root / "seg_empty" / (test_case->id + ".stage1.rrse"));
  const auto nonzero = [](const LabelMap& l) {
    return std::count_if(l.values().begin(), l.values().end(), [](std::uint8_t v) { return v != 0; });
  };
  if (nonzero(empty_mask) != 0) problems += " silenced stage 1 still fired;";
  if (nonzero(empty_labels) != 0) problems += " empty stage 1 gave labels;";

  const RegionMasks truth = to_region_masks(test_case->labels);
  const RegionMasks pred = to_region_masks(labels);
  return {problems.empty(), "case " + test_case->id + ": " + std::to_string(labelled) +
                                " labelled pixels, " + std::to_string(outside) +
                                " outside ROI, whole Dice " + fmt("%.3f", dice(pred[Region::whole], truth[Region::whole])) +
                                ", empty stage 1 -> all background" +
                                (problems.empty() ? "" : ";" + problems)};
}

// --- 9: determinism -------------------------------------------------------------

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

Outcome determinism(Shared& shared) {
  const fs::path root = shared.work / "determinism";
  fs::remove_all(root);
  ExperimentConfig cfg = compare_config(shared.work);
  cfg.dataset = (root / "data").string();
  cfg.out = (root / "run").string();
  cfg.synth->cases = 10;
  cfg.train.iterations = 12;
  cfg.train.batch_size = 2;
  cfg.train.validation_every = 6;

  std::string problems;
  std::size_t compared = 0;
  for (const char* command : {"train", "compare"}) {
    fs::remove_all(root);
    if (std::string(command) == "train") {
      run_train(cfg, log_line);
    } else {
      run_compare(cfg, log_line);
    }
    const fs::path first = root / (std::string(command) + "_first");
    fs::rename(cfg.out, first);
    fs::remove_all(cfg.dataset);
    // Second run comes from the recorded run.json, with the data regenerated.
    rerun(first / "run.json", cfg.out, log_line);

    const auto a = tree(first), b = tree(cfg.out);
    if (a.size() != b.size()) problems += std::string(" ") + command + " file sets differ;";
    bool has_ckpt = false, has_metrics = false, has_report = false;
    for (const auto& [name, bytes] : a) {
      has_ckpt |= name.rfind("checkpoints/", 0) == 0;
      has_metrics |= name == "metrics.csv";
      has_report |= name == "report.json";
      auto it = b.find(name);
      if (it == b.end() || it->second != bytes) problems += std::string(" ") + command + ":" + name + ";";
      ++compared;
    }
    if (!has_ckpt || !has_metrics || !has_report) {
      problems += std::string(" ") + command + " produced no checkpoint/metrics/report;";
    }
  }
  return {problems.empty(), std::to_string(compared) + " files compared byte for byte across train and compare reruns" +
                                (problems.empty() ? "" : ";" + problems)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rrse acceptance suite"};
  std::string work = (fs::temp_directory_path() / "rrse_acceptance").string();
  std::vector<int> only;
  app.add_option("--work", work, "Scratch directory for experiment outputs");
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Shared shared;
  shared.work = work;
  fs::create_directories(shared.work);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, gradient_suite},
      {2, kernel_oracle},
      {3, se_vs_segse},
      {4, shape_algebra},
      {5, metric_oracles},
      {6, adam_checks},
      {7, [&] { return ablation(shared); }},
      {8, [&] { return cascade_contract(shared); }},
      {9, [&] { return determinism(shared); }},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
