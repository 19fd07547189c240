#include "rrse/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json_util.hpp"
#include "rrse/checkpoint.hpp"
#include "rrse/gradcheck_suite.hpp"
#include "rrse/inference.hpp"
#include "rrse/tensor_io.hpp"

namespace rrse {

namespace fs = std::filesystem;
using detail::OrderedJson;

namespace {

constexpr const char* kToolVersion = "0.1.0";

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string read_text(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void emit(const LogFn& log, const std::string& line) {
  if (log) log(line);
}

OrderedJson number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

OrderedJson summary_json(const MetricsReport& r) {
  OrderedJson j;
  for (Region region : kRegions) {
    const RegionSummary& s = r.summary[static_cast<std::size_t>(region)];
    j[to_string(region)] = {{"dice", number(s.dice.mean)},
                            {"hd95", number(s.hd95.mean)},
                            {"hd95_inf_count", s.hd95.infinite},
                            {"ppv", number(s.ppv.mean)},
                            {"sensitivity", number(s.sensitivity.mean)}};
  }
  j["cases"] = r.cases.size();
  return j;
}

OrderedJson run_record(const std::string& command, OrderedJson payload_key_value,
                       const std::string& key) {
  OrderedJson j;
  j["format"] = "rrse-run";
  j["format_version"] = 1;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j[key] = std::move(payload_key_value);
  return j;
}

OrderedJson config_json(const ExperimentConfig& cfg) {
  return OrderedJson::parse(experiment_config_to_json(cfg));
}

void require_out(const std::string& out, const std::string& command) {
  if (out.empty()) throw Error(command + ": an output directory (--out or config 'out') is required");
}

LabelMap truth_for(const Model& model, const Case& c) {
  return model.spec().num_classes == 2 ? fuse_labels(c.labels) : c.labels;
}

OrderedJson variant_json(const VariantOutcome& o) {
  OrderedJson j;
  j["name"] = to_string(o.variant);
  j["label"] = variant_label(o.variant);
  j["parameters"] = o.parameters;
  j["width_multiplier"] = o.spec.width_multiplier;
  j["network"] = detail::network_spec_json(o.spec);
  j["iterations_completed"] = o.training.state.step;
  j["diverged"] = o.training.diverged;
  if (o.training.diverged) j["divergence"] = o.training.divergence;
  j["final_train_loss"] =
      o.training.history.empty() ? OrderedJson(nullptr) : number(o.training.history.back().train_loss);
  j["validation"] = summary_json(o.validation);
  j["test"] = summary_json(o.test);
  return j;
}

}  // namespace

std::string variant_label(Variant v) {
  switch (v) {
    case Variant::recomb:
    case Variant::rr_se:
    case Variant::rr_segse:
      return "+" + to_string(v);
    default:
      return to_string(v);
  }
}

MetricsReport evaluate_model(Model& model, const std::vector<const Case*>& cases,
                             std::size_t tile_input) {
  TileOptions tiles;
  tiles.input_extent = tile_input;
  std::vector<CaseMetrics> per_case;
  for (const Case* c : cases) {
    const LabelMap pred = predict_labels(model, c->image, std::nullopt, tiles);
    per_case.push_back(evaluate_case(c->id, pred, truth_for(model, *c)));
  }
  return summarize(std::move(per_case));
}

Dataset prepare_dataset(const ExperimentConfig& cfg, const LogFn& log) {
  if (cfg.dataset.empty()) throw Error("config: 'dataset' is required");
  const fs::path dir = cfg.dataset;
  if (cfg.synth && !fs::exists(dir / "dataset.json")) {
    emit(log, "generating synthetic dataset in " + dir.string());
    generate_synthetic(dir, *cfg.synth);
  }
  return load_dataset(dir);
}

VariantOutcome train_variant(const ExperimentConfig& cfg, Variant variant, const Dataset& data,
                             const fs::path& checkpoint_dir, const LogFn& log) {
  VariantOutcome o;
  o.variant = variant;
  o.spec = variant_spec(cfg.network, variant);
  Model model = Model::build(o.spec, mix_seed(cfg.train.seed, 0x1417));
  o.parameters = model.parameter_count();
  emit(log, to_string(variant) + ": " + std::to_string(o.parameters) + " parameters, output " +
                std::to_string(model.output_extent(cfg.train.patch_size)) + " for patch " +
                std::to_string(cfg.train.patch_size));
  const std::string name = to_string(variant);
  o.training = train(model, data, cfg.train, [&](const HistoryRow& row) {
    if (!log || !(row.has_validation || row.iteration % 50 == 0)) return;
    char buf[160];
    if (row.has_validation) {
      std::snprintf(buf, sizeof buf, "%s it %zu loss %.4f val dice %.3f %.3f %.3f", name.c_str(),
                    row.iteration, row.train_loss, row.val_dice[0], row.val_dice[1], row.val_dice[2]);
    } else {
      std::snprintf(buf, sizeof buf, "%s it %zu loss %.4f", name.c_str(), row.iteration,
                    row.train_loss);
    }
    log(buf);
  });
  if (o.training.diverged) emit(log, name + ": training stopped: " + o.training.divergence);
  save_checkpoint(checkpoint_dir, model, o.training.state);
  o.validation = evaluate_model(model, data.split(Split::val), cfg.train.tile_input);
  o.test = evaluate_model(model, data.split(Split::test), cfg.train.tile_input);
  return o;
}

VariantOutcome run_train(const ExperimentConfig& cfg, const LogFn& log) {
  require_out(cfg.out, "train");
  const Variant variant = parse_variant(cfg.variant);
  const fs::path out = cfg.out;
  fs::create_directories(out);
  write_text(out / "run.json", detail::dump(run_record("train", config_json(cfg), "config")));
  const Dataset data = prepare_dataset(cfg, log);
  VariantOutcome o = train_variant(cfg, variant, data, out / "checkpoints" / to_string(variant), log);
  write_text(out / "metrics.csv", history_csv(o.training.history));
  OrderedJson report;
  report["format"] = "rrse-train-report";
  report["format_version"] = 1;
  report["variant"] = variant_json(o);
  write_text(out / "report.json", detail::dump(report));
  return o;
}

std::vector<VariantOutcome> run_compare(const ExperimentConfig& cfg, const LogFn& log) {
  require_out(cfg.out, "compare");
  const fs::path out = cfg.out;
  fs::create_directories(out);
  write_text(out / "run.json", detail::dump(run_record("compare", config_json(cfg), "config")));
  const Dataset data = prepare_dataset(cfg, log);

  std::vector<VariantOutcome> outcomes;
  for (Variant v : kCompareVariants) {
    outcomes.push_back(train_variant(cfg, v, data, out / "checkpoints" / to_string(v), log));
    write_text(out / "histories" / (to_string(v) + ".csv"),
               history_csv(outcomes.back().training.history));
  }

  std::string csv =
      "variant,parameters,dice_whole,dice_core,dice_enh,hd95_whole,hd95_core,hd95_enh\n";
  for (const VariantOutcome& o : outcomes) {
    csv += variant_label(o.variant) + "," + std::to_string(o.parameters);
    for (const RegionSummary& s : o.test.summary) csv += "," + format_number(s.dice.mean);
    for (const RegionSummary& s : o.test.summary) csv += "," + format_number(s.hd95.mean);
    csv += "\n";
  }
  write_text(out / "metrics.csv", csv);

  auto find = [&outcomes](Variant v) -> const VariantOutcome& {
    return *std::find_if(outcomes.begin(), outcomes.end(),
                         [v](const VariantOutcome& o) { return o.variant == v; });
  };
  const VariantOutcome& base = find(Variant::baseline);
  const VariantOutcome& segse = find(Variant::rr_segse);
  const VariantOutcome& wide = find(Variant::baseline_wide);

  OrderedJson report;
  report["format"] = "rrse-compare-report";
  report["format_version"] = 1;
  report["dataset"] = cfg.dataset;
  report["seed"] = cfg.train.seed;
  report["split_sizes"] = {{"train", data.split(Split::train).size()},
                           {"val", data.split(Split::val).size()},
                           {"test", data.split(Split::test).size()}};
  OrderedJson variants = OrderedJson::array();
  for (const VariantOutcome& o : outcomes) variants.push_back(variant_json(o));
  report["variants"] = std::move(variants);
  const double rel = std::abs(static_cast<double>(wide.parameters) -
                              static_cast<double>(segse.parameters)) /
                     static_cast<double>(segse.parameters);
  report["width_control"] = {{"variant", to_string(Variant::baseline_wide)},
                             {"matched_to", to_string(Variant::rr_segse)},
                             {"width_multiplier", wide.spec.width_multiplier},
                             {"parameters", wide.parameters},
                             {"target_parameters", segse.parameters},
                             {"relative_difference", rel},
                             {"within_tolerance", rel <= 0.05}};
  OrderedJson obs;
  for (const char* split : {"validation", "test"}) {
    const bool val = std::string(split) == "validation";
    const MetricsReport& a = val ? segse.validation : segse.test;
    const MetricsReport& b = val ? base.validation : base.test;
    OrderedJson diff;
    for (Region r : kRegions) {
      const std::size_t i = static_cast<std::size_t>(r);
      diff[to_string(r)] = number(a.summary[i].dice.mean - b.summary[i].dice.mean);
    }
    obs[split] = {{"segse_minus_baseline_dice", diff},
                  {"segse_ge_baseline_whole",
                   a.summary[0].dice.mean >= b.summary[0].dice.mean}};
  }
  obs["note"] = "ordering is an observation; differences of this size are within run-to-run noise";
  report["observations"] = std::move(obs);
  write_text(out / "report.json", detail::dump(report));
  return outcomes;
}

void run_synth(const SynthConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  write_text(out / "run.json",
             detail::dump(run_record("synth",
                                     {{"cases", cfg.cases},
                                      {"height", cfg.height},
                                      {"width", cfg.width},
                                      {"seed", cfg.seed},
                                      {"noise_sigma", cfg.noise_sigma},
                                      {"out", out.string()}},
                                     "args")));
  generate_synthetic(out, cfg);
}

namespace {

std::string case_stem(const fs::path& input) {
  std::string name = input.filename().string();
  for (const std::string suffix : {".image.rrse", ".rrse"}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      return name.substr(0, name.size() - suffix.size());
    }
  }
  return name;
}

}  // namespace

CascadeResult run_segment(const SegmentRequest& req) {
  require_out(req.out, "segment");
  const fs::path out = req.out;
  fs::create_directories(out);
  write_text(out / "run.json", detail::dump(run_record("segment",
                                                       {{"stage1", req.stage1},
                                                        {"stage2", req.stage2},
                                                        {"input", req.input},
                                                        {"margin", req.margin},
                                                        {"tile_input", req.tile_input},
                                                        {"out", req.out}},
                                                       "args")));
  LoadedCheckpoint s1 = load_checkpoint(req.stage1);
  LoadedCheckpoint s2 = load_checkpoint(req.stage2);
  const Tensor image = load_tensor(req.input);
  TileOptions tiles;
  tiles.input_extent = req.tile_input;
  CascadeResult r = cascade_segment(image, s1.model, s2.model, req.margin, tiles);
  const std::string stem = case_stem(req.input);
  save_tensor(out / (stem + ".labels.rrse"), r.labels);
  save_tensor(out / (stem + ".stage1.rrse"), r.stage1_mask);
  OrderedJson report;
  report["format"] = "rrse-segment-report";
  report["format_version"] = 1;
  report["case"] = stem;
  report["roi"] = {{"empty", r.roi.empty},
                   {"top", r.roi.top},
                   {"left", r.roi.left},
                   {"bottom", r.roi.bottom},
                   {"right", r.roi.right},
                   {"margin", req.margin}};
  std::array<std::size_t, 256> counts{};
  for (std::uint8_t v : r.labels.values()) ++counts[v];
  OrderedJson hist;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c]) hist[std::to_string(c)] = counts[c];
  }
  report["label_counts"] = std::move(hist);
  write_text(out / "report.json", detail::dump(report));
  return r;
}

MetricsReport run_eval(const EvalRequest& req) {
  require_out(req.out, "eval");
  const fs::path out = req.out;
  fs::create_directories(out);
  write_text(out / "run.json",
             detail::dump(run_record(
                 "eval", {{"pred", req.pred}, {"truth", req.truth}, {"out", req.out}}, "args")));
  if (!fs::is_directory(req.pred)) throw Error("eval: prediction directory '" + req.pred + "' not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(req.pred)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".labels.rrse")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("eval: no *.labels.rrse files in '" + req.pred + "'");
  std::vector<CaseMetrics> cases;
  for (const fs::path& f : files) {
    const fs::path truth = fs::path(req.truth) / f.filename();
    if (!fs::exists(truth)) throw Error("eval: no ground truth " + truth.string());
    const std::string name = f.filename().string();
    cases.push_back(evaluate_case(name.substr(0, name.size() - std::string(".labels.rrse").size()),
                                  load_label_map(f), load_label_map(truth)));
  }
  MetricsReport report = summarize(std::move(cases));
  write_text(out / "metrics.csv", cases_csv(report));
  OrderedJson j;
  j["format"] = "rrse-eval-report";
  j["format_version"] = 1;
  j["methods"] = {{"prediction", summary_json(report)}};
  write_text(out / "report.json", detail::dump(j));
  return report;
}

bool run_gradcheck(const GradcheckRequest& req, const LogFn& log) {
  const std::vector<GradcheckRow> rows = run_gradcheck_suite(req.block);
  emit(log, gradcheck_table(rows));
  const bool pass = std::all_of(rows.begin(), rows.end(),
                                [](const GradcheckRow& r) { return r.report.pass; });
  if (!req.out.empty()) {
    const fs::path out = req.out;
    fs::create_directories(out);
    write_text(out / "run.json",
               detail::dump(run_record("gradcheck", {{"block", req.block}, {"out", req.out}}, "args")));
    std::string csv = "name,kind,seed,max_rel_err,pass\n";
    OrderedJson list = OrderedJson::array();
    char buf[64];
    for (const GradcheckRow& r : rows) {
      std::snprintf(buf, sizeof buf, "%.6e", r.report.max_rel_err);
      csv += r.name + "," + r.kind + "," + std::to_string(r.seed) + "," + buf + "," +
             (r.report.pass ? "true" : "false") + "\n";
      list.push_back({{"name", r.name},
                      {"kind", r.kind},
                      {"seed", r.seed},
                      {"max_rel_err", r.report.max_rel_err},
                      {"pass", r.report.pass}});
    }
    write_text(out / "metrics.csv", csv);
    OrderedJson j;
    j["format"] = "rrse-gradcheck-report";
    j["format_version"] = 1;
    j["tolerance"] = 1e-4;
    j["pass"] = pass;
    j["rows"] = std::move(list);
    write_text(out / "report.json", detail::dump(j));
  }
  return pass;
}

int rerun(const fs::path& run_json, const std::optional<std::string>& out, const LogFn& log) {
  const std::string context = "run record " + run_json.string();
  const detail::Json j = detail::parse_json(read_text(run_json), context);
  detail::StrictObject o(j, context);
  std::string format, command, tool_version;
  std::size_t version = 0;
  o.required("format", format);
  o.required("format_version", version);
  o.required("tool_version", tool_version);
  o.required("command", command);
  if (format != "rrse-run" || version != 1) throw Error(context + ": not a run record");

  if (command == "train" || command == "compare") {
    if (!o.has("config")) throw Error(context + ": missing key 'config'");
    ExperimentConfig cfg = parse_experiment_config(o.raw("config").dump(), context + "/config");
    o.finish();
    if (out) cfg.out = *out;
    if (command == "train") {
      run_train(cfg, log);
    } else {
      run_compare(cfg, log);
    }
    return 0;
  }
  if (!o.has("args")) throw Error(context + ": missing key 'args'");
  detail::StrictObject a(o.raw("args"), context + "/args");
  o.finish();
  if (command == "synth") {
    SynthConfig s;
    std::size_t seed = 0;
    std::string dir;
    a.required("cases", s.cases);
    a.required("height", s.height);
    a.required("width", s.width);
    a.required("seed", seed);
    a.required("noise_sigma", s.noise_sigma);
    a.required("out", dir);
    a.finish();
    s.seed = seed;
    run_synth(s, out ? *out : dir);
    return 0;
  }
  if (command == "segment") {
    SegmentRequest r;
    a.required("stage1", r.stage1);
    a.required("stage2", r.stage2);
    a.required("input", r.input);
    a.required("margin", r.margin);
    a.required("tile_input", r.tile_input);
    a.required("out", r.out);
    a.finish();
    if (out) r.out = *out;
    run_segment(r);
    return 0;
  }
  if (command == "eval") {
    EvalRequest r;
    a.required("pred", r.pred);
    a.required("truth", r.truth);
    a.required("out", r.out);
    a.finish();
    if (out) r.out = *out;
    run_eval(r);
    return 0;
  }
  if (command == "gradcheck") {
    GradcheckRequest r;
    a.required("block", r.block);
    a.required("out", r.out);
    a.finish();
    if (out) r.out = *out;
    return run_gradcheck(r, log) ? 0 : 1;
  }
  throw Error(context + ": unknown command '" + command + "'");
}

}  // namespace rrse
