#include "rrse/config.hpp"

#include "json_util.hpp"
#include "rrse/tensor_io.hpp"

namespace rrse {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::baseline: return "baseline";
    case Variant::recomb: return "recomb";
    case Variant::rr_se: return "rr_se";
    case Variant::rr_segse: return "rr_segse";
    case Variant::baseline_wide: return "baseline_wide";
    case Variant::binary: return "binary";
  }
  return "?";
}

Variant parse_variant(const std::string& text) {
  for (Variant v : {Variant::baseline, Variant::recomb, Variant::rr_se, Variant::rr_segse,
                    Variant::baseline_wide, Variant::binary}) {
    if (to_string(v) == text) return v;
  }
  throw Error("unknown variant '" + text +
              "' (expected baseline, recomb, rr_se, rr_segse, baseline_wide or binary)");
}

NetworkSpec variant_spec(const NetworkSpec& base, Variant v) {
  NetworkSpec s = base;
  s.width_multiplier = 1.0;
  s.recombination = false;
  s.rr_mode = RRMode::none;
  switch (v) {
    case Variant::baseline:
      break;
    case Variant::recomb:
      s.recombination = true;
      break;
    case Variant::rr_se:
      s.recombination = true;
      s.rr_mode = RRMode::se;
      break;
    case Variant::rr_segse:
      s.recombination = true;
      s.rr_mode = RRMode::segse;
      break;
    case Variant::baseline_wide:
      s = scale_width_to_match(s, count_parameters(variant_spec(base, Variant::rr_segse)), 0.05);
      break;
    case Variant::binary:
      s.num_classes = 2;
      break;
  }
  s.validate();
  return s;
}

namespace {

void read_train(const detail::Json& j, TrainConfig& t, const std::string& context) {
  detail::StrictObject o(j, context);
  o.optional("iterations", t.iterations);
  o.optional("batch_size", t.batch_size);
  o.optional("patch_size", t.patch_size);
  o.optional("dropout_rate", t.dropout_rate);
  o.optional("flip", t.flip);
  o.optional("rotate", t.rotate);
  o.optional("class_balancing", t.class_balancing);
  std::size_t seed = t.seed;
  o.optional("seed", seed);
  t.seed = seed;
  o.optional("validation_every", t.validation_every);
  o.optional("tile_input", t.tile_input);
  o.optional("learning_rate", t.adam.learning_rate);
  o.optional("beta1", t.adam.beta1);
  o.optional("beta2", t.adam.beta2);
  o.optional("epsilon", t.adam.epsilon);
  o.optional("weight_decay", t.adam.weight_decay);
  o.finish();
  if (t.batch_size == 0) throw Error(context + ": batch_size must be >= 1");
  if (!(t.dropout_rate >= 0.0 && t.dropout_rate < 1.0)) {
    throw Error(context + ": dropout_rate must be in [0, 1)");
  }
  if (!(t.adam.learning_rate >= 0.0)) throw Error(context + ": learning_rate must be >= 0");
}

void read_synth(const detail::Json& j, SynthConfig& s, const std::string& context) {
  detail::StrictObject o(j, context);
  o.optional("cases", s.cases);
  o.optional("height", s.height);
  o.optional("width", s.width);
  std::size_t seed = s.seed;
  o.optional("seed", seed);
  s.seed = seed;
  o.optional("noise_sigma", s.noise_sigma);
  o.finish();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& context) {
  const detail::Json j = detail::parse_json(text, context);
  detail::StrictObject o(j, context);
  ExperimentConfig cfg;
  o.optional("dataset", cfg.dataset);
  o.optional("out", cfg.out);
  o.optional("variant", cfg.variant);
  parse_variant(cfg.variant);
  if (o.has("network")) detail::read_network_spec(o.raw("network"), cfg.network, context + "/network");
  if (o.has("train")) read_train(o.raw("train"), cfg.train, context + "/train");
  if (o.has("synth")) {
    SynthConfig s;
    read_synth(o.raw("synth"), s, context + "/synth");
    cfg.synth = s;
  }
  o.finish();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return parse_experiment_config(std::string(bytes.begin(), bytes.end()), "config " + path);
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  detail::OrderedJson j;
  j["dataset"] = cfg.dataset;
  j["out"] = cfg.out;
  j["variant"] = cfg.variant;
  j["network"] = detail::network_spec_json(cfg.network);
  const TrainConfig& t = cfg.train;
  j["train"] = {{"iterations", t.iterations},
                {"batch_size", t.batch_size},
                {"patch_size", t.patch_size},
                {"dropout_rate", t.dropout_rate},
                {"flip", t.flip},
                {"rotate", t.rotate},
                {"class_balancing", t.class_balancing},
                {"seed", t.seed},
                {"validation_every", t.validation_every},
                {"tile_input", t.tile_input},
                {"learning_rate", t.adam.learning_rate},
                {"beta1", t.adam.beta1},
                {"beta2", t.adam.beta2},
                {"epsilon", t.adam.epsilon},
                {"weight_decay", t.adam.weight_decay}};
  if (cfg.synth) {
    const SynthConfig& s = *cfg.synth;
    j["synth"] = {{"cases", s.cases},
                  {"height", s.height},
                  {"width", s.width},
                  {"seed", s.seed},
                  {"noise_sigma", s.noise_sigma}};
  }
  return detail::dump(j);
}

}  // namespace rrse
