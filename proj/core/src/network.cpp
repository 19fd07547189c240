#include "rrse/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json_util.hpp"
#include "rrse/random.hpp"

namespace rrse {

std::size_t NetworkSpec::width(std::size_t scale) const {
  const double w = static_cast<double>(base_channels) * std::ldexp(1.0, static_cast<int>(scale)) *
                   width_multiplier;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(w)));
}

void NetworkSpec::validate() const {
  if (num_scales == 0) throw Error("network: num_scales must be >= 1");
  if (base_channels == 0) throw Error("network: base_channels must be >= 1");
  if (convs_per_scale == 0) throw Error("network: convs_per_scale must be >= 1");
  if (input_channels == 0) throw Error("network: input_channels must be >= 1");
  if (num_classes < 2) throw Error("network: num_classes must be >= 2");
  if (!(width_multiplier > 0.0) || !std::isfinite(width_multiplier)) {
    throw Error("network: width_multiplier must be positive");
  }
  if (dilation_schedule.size() != num_scales) {
    throw Error("network: dilation_schedule has " + std::to_string(dilation_schedule.size()) +
                " entries for " + std::to_string(num_scales) + " scales");
  }
  for (std::size_t d : dilation_schedule) {
    if (d == 0) throw Error("network: dilations must be >= 1");
  }
  if (expansion_factor == 0) throw Error("network: expansion_factor must be >= 1");
  if (se_r == 0) throw Error("network: se_r must be >= 1");
  if (rr_mode != RRMode::none && !recombination) {
    throw Error("network: rr_mode '" + to_string(rr_mode) +
                "' requires recombination (the RR block always recombines first)");
  }
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::save_skip: return "save_skip";
    case LayerKind::upsample: return "upsample";
    case LayerKind::merge_add: return "merge_add";
    case LayerKind::rr: return "rr";
  }
  return "?";
}

std::vector<Layer> build_layers(const NetworkSpec& spec) {
  spec.validate();
  std::vector<Layer> layers;
  auto conv_stack = [&](const std::string& prefix, std::size_t in, std::size_t out) {
    for (std::size_t j = 0; j < spec.convs_per_scale; ++j) {
      const std::string name = prefix + std::to_string(j);
      layers.push_back({LayerKind::conv, name, j == 0 ? in : out, out, 3, 1});
      layers.push_back({LayerKind::batchnorm, name + ".bn", out, out});
      layers.push_back({LayerKind::relu, name + ".relu", out, out});
    }
  };

  const std::size_t S = spec.num_scales;
  std::size_t channels = spec.input_channels;
  for (std::size_t k = 0; k < S; ++k) {
    const std::string scale = "scale" + std::to_string(k);
    const std::size_t w = spec.width(k);
    conv_stack(scale + ".conv", channels, w);
    channels = w;
    layers.push_back({LayerKind::dropout, scale + ".drop", w, w});
    if (k + 1 < S) {
      layers.push_back({LayerKind::save_skip, scale + ".skip", w, w, 1, 1, k});
      layers.push_back({LayerKind::maxpool, scale + ".pool", w, w});
    }
  }

  for (std::size_t k = S; k-- > 0;) {
    const std::string scale = "scale" + std::to_string(k);
    const std::size_t w = spec.width(k);
    if (k + 1 < S) {
      layers.push_back({LayerKind::conv, scale + ".adjust", channels, w, 1, 1});
      layers.push_back({LayerKind::upsample, scale + ".up", w, w});
      layers.push_back({LayerKind::merge_add, scale + ".merge", w, w, 1, 1, k});
      conv_stack(scale + ".dconv", w, w);
      layers.push_back({LayerKind::dropout, scale + ".ddrop", w, w});
      channels = w;
    }
    if (spec.has_rr_blocks()) {
      const std::string rr = "rr" + std::to_string(k + 1);
      Layer block{LayerKind::rr, rr, w, w, 3, spec.dilation_schedule[k]};
      block.mode = spec.rr_mode;
      layers.push_back(block);
      layers.push_back({LayerKind::relu, rr + ".relu", w, w});
    }
  }
  layers.push_back({LayerKind::conv, "head", channels, spec.num_classes, 1, 1});
  return layers;
}

namespace {

std::size_t layer_parameter_count(const Layer& l, const NetworkSpec& spec) {
  switch (l.kind) {
    case LayerKind::conv:
      return l.in_channels * l.out_channels * l.kernel * l.kernel + l.out_channels;
    case LayerKind::batchnorm:
      return 2 * l.out_channels;
    case LayerKind::rr: {
      std::size_t n = recombination_parameter_count(l.out_channels, spec.expansion_factor);
      if (l.mode == RRMode::se) n += se_parameter_count(l.out_channels, spec.se_r);
      if (l.mode == RRMode::segse) n += segse_parameter_count(l.out_channels, spec.se_r);
      return n;
    }
    default:
      return 0;
  }
}

}  // namespace

std::size_t count_parameters(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const Layer& l : build_layers(spec)) n += layer_parameter_count(l, spec);
  return n;
}

ShapeReport walk_shapes(const std::vector<Layer>& layers, std::size_t height, std::size_t width) {
  ShapeReport r;
  r.aligned = true;
  std::size_t h = height, w = width;
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> skips;
  auto fail = [&](const Layer& l, const std::string& why) {
    r.valid = false;
    r.error = "layer '" + l.name + "': " + why;
    return r;
  };
  if (h == 0 || w == 0) {
    r.error = "input extent must be positive";
    return r;
  }
  for (const Layer& l : layers) {
    switch (l.kind) {
      case LayerKind::conv: {
        const std::size_t reach = (l.kernel - 1) * l.dilation;
        if (h <= reach || w <= reach) {
          return fail(l, "input " + std::to_string(h) + "x" + std::to_string(w) +
                             " smaller than receptive field " + std::to_string(reach + 1));
        }
        h -= reach;
        w -= reach;
        break;
      }
      case LayerKind::maxpool:
        if (h < 2 || w < 2) return fail(l, "input smaller than the 2x2 pooling window");
        if (h % 2 || w % 2) r.aligned = false;
        h /= 2;
        w /= 2;
        break;
      case LayerKind::upsample:
        h *= 2;
        w *= 2;
        break;
      case LayerKind::save_skip:
        skips[l.slot] = {h, w};
        break;
      case LayerKind::merge_add: {
        const auto [sh, sw] = skips.at(l.slot);
        const std::size_t nh = std::min(h, sh), nw = std::min(w, sw);
        if ((std::max(h, sh) - nh) % 2 || (std::max(w, sw) - nw) % 2) r.aligned = false;
        h = nh;
        w = nw;
        break;
      }
      case LayerKind::rr:
        if (l.mode == RRMode::segse) {
          if (h <= 2 * l.dilation || w <= 2 * l.dilation) {
            return fail(l, "SegSE with dilation " + std::to_string(l.dilation) + " needs more than " +
                               std::to_string(2 * l.dilation) + " per axis, got " +
                               std::to_string(h) + "x" + std::to_string(w));
          }
          h -= 2 * l.dilation;
          w -= 2 * l.dilation;
        }
        break;
      default:
        break;
    }
    r.layer_extents.emplace_back(h, w);
  }
  r.valid = true;
  r.out_height = h;
  r.out_width = w;
  return r;
}

template <typename T>
std::size_t ParameterSet<T>::add(std::string name, BasicTensor<T> value, bool trainable) {
  if (index_.count(name)) throw Error("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(value), trainable});
  return entries_.size() - 1;
}

template <typename T>
std::size_t ParameterSet<T>::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no parameter named '" + name + "'");
  return it->second;
}

template <typename T>
std::size_t ParameterSet<T>::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : entries_) {
    if (p.trainable) n += p.value.size();
  }
  return n;
}

template <typename T>
BasicModel<T> BasicModel<T>::build(const NetworkSpec& spec, std::uint64_t seed) {
  BasicModel m;
  m.spec_ = spec;
  m.layers_ = build_layers(spec);
  m.layer_params_.resize(m.layers_.size());
  auto add_conv = [&m](std::vector<std::size_t>& idx, const ConvParams<T>& c) {
    idx.push_back(m.params_.add(c.name + ".weight", c.weight));
    idx.push_back(m.params_.add(c.name + ".bias", c.bias));
  };
  for (std::size_t i = 0; i < m.layers_.size(); ++i) {
    const Layer& l = m.layers_[i];
    std::vector<std::size_t>& idx = m.layer_params_[i];
    const std::uint64_t layer_seed = mix_seed(seed, i);
    switch (l.kind) {
      case LayerKind::conv:
        add_conv(idx, ConvParams<T>::make(l.in_channels, l.out_channels, l.kernel, l.dilation,
                                          layer_seed, l.name));
        break;
      case LayerKind::batchnorm: {
        const std::size_t c = l.out_channels;
        idx.push_back(m.params_.add(l.name + ".gamma", BasicTensor<T>::ones({c})));
        idx.push_back(m.params_.add(l.name + ".beta", BasicTensor<T>::zeros({c})));
        idx.push_back(m.params_.add(l.name + ".running_mean", BasicTensor<T>::zeros({c}), false));
        idx.push_back(m.params_.add(l.name + ".running_var", BasicTensor<T>::ones({c}), false));
        break;
      }
      case LayerKind::rr: {
        const RRParams<T> p = RRParams<T>::make(l.out_channels, l.mode, spec.expansion_factor,
                                                spec.se_r, l.dilation, layer_seed, l.name);
        add_conv(idx, p.recombination.expand);
        add_conv(idx, p.recombination.compress);
        if (p.se) {
          add_conv(idx, p.se->fc1);
          add_conv(idx, p.se->fc2);
        }
        if (p.segse) {
          add_conv(idx, p.segse->compress);
          add_conv(idx, p.segse->expand);
        }
        break;
      }
      default:
        break;
    }
  }
  return m;
}

template <typename T>
std::size_t BasicModel<T>::min_input_extent() const {
  for (std::size_t s = 1; s <= 8192; ++s) {
    if (walk(s, s).valid) return s;
  }
  throw Error("network has no valid input size up to 8192");
}

template <typename T>
std::size_t BasicModel<T>::output_extent(std::size_t input) const {
  const ShapeReport r = walk(input, input);
  if (!r.valid) {
    throw Error("network: input " + std::to_string(input) + "x" + std::to_string(input) +
                " is too small (" + r.error + "); minimum valid input is " +
                std::to_string(min_input_extent()));
  }
  return r.out_height;
}

template <typename T>
std::size_t BasicModel<T>::aligned_input_extent(std::size_t at_least) const {
  for (std::size_t s = std::max(at_least, min_input_extent()); s <= 8192; ++s) {
    const ShapeReport r = walk(s, s);
    if (r.valid && r.aligned) return s;
  }
  throw Error("network has no aligned input size up to 8192");
}

template <typename T>
std::vector<Var<T>> BasicModel<T>::bind(Tape<T>& tape, bool requires_grad) const {
  std::vector<Var<T>> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(tape.leaf(p.value, requires_grad && p.trainable));
  return vars;
}

template <typename T>
Var<T> BasicModel<T>::forward(Tape<T>& /*tape*/, Var<T> input, const std::vector<Var<T>>& params,
                              const ForwardOptions& options) {
  if (params.size() != params_.size()) throw Error("network: parameter binding size mismatch");
  const Dims4 in = as_nchw(input.shape());
  {
    const ShapeReport r = walk(in.h, in.w);
    if (!r.valid) {
      throw Error("network: input " + std::to_string(in.h) + "x" + std::to_string(in.w) +
                  " is too small (" + r.error + "); minimum valid input is " +
                  std::to_string(min_input_extent()) + "x" + std::to_string(min_input_extent()));
    }
  }
  Var<T> h = input;
  std::map<std::size_t, Var<T>> skips;
  auto conv_vars = [&](const std::vector<std::size_t>& idx, std::size_t at,
                       std::size_t dilation, const std::string& name) {
    return ad::ConvVars<T>{params[idx[at]], params[idx[at + 1]], dilation, name};
  };

  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::vector<std::size_t>& idx = layer_params_[i];
    switch (l.kind) {
      case LayerKind::conv:
        h = ad::conv2d(h, params[idx[0]], params[idx[1]], l.dilation, l.name);
        break;
      case LayerKind::batchnorm:
        h = ad::batchnorm2d(h, params[idx[0]], params[idx[1]], params_[idx[2]].value,
                            params_[idx[3]].value, options.mode, options.update_batch_stats);
        break;
      case LayerKind::relu:
        h = ad::relu(h);
        break;
      case LayerKind::dropout:
        h = ad::spatial_dropout(h, options.dropout_rate, options.mode, mix_seed(options.seed, i));
        break;
      case LayerKind::maxpool:
        h = ad::maxpool2d(h);
        break;
      case LayerKind::save_skip:
        skips[l.slot] = h;
        break;
      case LayerKind::upsample:
        h = ad::upsample_nearest(h, 2);
        break;
      case LayerKind::merge_add: {
        Var<T> skip = skips.at(l.slot);
        const std::size_t r = h.shape().size();
        const std::size_t nh = std::min(h.shape()[r - 2], skip.shape()[r - 2]);
        const std::size_t nw = std::min(h.shape()[r - 1], skip.shape()[r - 1]);
        h = ad::add(ad::center_crop(h, nh, nw), ad::center_crop(skip, nh, nw));
        break;
      }
      case LayerKind::rr: {
        ad::RRVars<T> v;
        v.mode = l.mode;
        v.expand = conv_vars(idx, 0, 1, l.name + ".recomb.expand");
        v.compress = conv_vars(idx, 2, 1, l.name + ".recomb.compress");
        if (l.mode == RRMode::se) {
          v.recal_a = conv_vars(idx, 4, 1, l.name + ".se.fc1");
          v.recal_b = conv_vars(idx, 6, 1, l.name + ".se.fc2");
        } else if (l.mode == RRMode::segse) {
          v.recal_a = conv_vars(idx, 4, l.dilation, l.name + ".segse.compress");
          v.recal_b = conv_vars(idx, 6, 1, l.name + ".segse.expand");
        }
        h = ad::rr_block(h, v);
        break;
      }
    }
    if (options.trace) {
      const std::size_t r = h.shape().size();
      options.trace->emplace_back(h.shape()[r - 2], h.shape()[r - 1]);
    }
  }
  return h;
}

template <typename T>
BasicTensor<T> BasicModel<T>::predict(const BasicTensor<T>& input) {
  Tape<T> tape;
  const std::vector<Var<T>> vars = bind(tape, false);
  ForwardOptions options;
  options.mode = Mode::infer;
  return forward(tape, tape.constant(input), vars, options).value();
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class BasicModel<float>;
template class BasicModel<double>;

Model build_mcfcn(const NetworkSpec& spec, std::uint64_t seed) {
  return Model::build(spec, seed);
}

Model build_binary_fcn(const NetworkSpec& spec, std::uint64_t seed) {
  if (spec.num_classes != 2) {
    throw Error("binary FCN needs num_classes = 2, got " + std::to_string(spec.num_classes));
  }
  NetworkSpec s = spec;
  s.recombination = false;
  s.rr_mode = RRMode::none;
  return Model::build(s, seed);
}

NetworkSpec scale_width_to_match(const NetworkSpec& spec, std::size_t target_count,
                                 double tolerance) {
  auto with = [&spec](double m) {
    NetworkSpec s = spec;
    s.width_multiplier = m;
    return s;
  };
  auto rel = [target_count](std::size_t n) {
    return std::abs(static_cast<double>(n) - static_cast<double>(target_count)) /
           static_cast<double>(target_count);
  };
  const NetworkSpec base = with(1.0);
  const std::size_t base_count = count_parameters(base);
  if (target_count == 0) throw Error("scale_width_to_match: target must be positive");
  if (rel(base_count) <= tolerance) return base;
  if (target_count < base_count) {
    throw Error("scale_width_to_match: target " + std::to_string(target_count) +
                " is below the current count " + std::to_string(base_count));
  }
  if (count_parameters(with(8.0)) < target_count && rel(count_parameters(with(8.0))) > tolerance) {
    throw Error("scale_width_to_match: target " + std::to_string(target_count) +
                " is unreachable with width multiplier <= 8");
  }
  double lo = 1.0, hi = 8.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_parameters(with(mid)) < target_count) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const std::size_t n_lo = count_parameters(with(lo));
  const std::size_t n_hi = count_parameters(with(hi));
  const double best = rel(n_lo) <= rel(n_hi) ? lo : hi;
  if (rel(count_parameters(with(best))) > tolerance) {
    throw Error("scale_width_to_match: closest count " +
                std::to_string(count_parameters(with(best))) + " is not within " +
                std::to_string(tolerance * 100) + "% of " + std::to_string(target_count));
  }
  return with(best);
}

namespace detail {

Json parse_json(const std::string& text, const std::string& context) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(context + ": invalid JSON: " + e.what());
  }
}

std::string dump(const OrderedJson& j) { return j.dump(2) + "\n"; }

OrderedJson network_spec_json(const NetworkSpec& spec) {
  OrderedJson j;
  j["format_version"] = 1;
  j["num_scales"] = spec.num_scales;
  j["base_channels"] = spec.base_channels;
  j["convs_per_scale"] = spec.convs_per_scale;
  j["input_channels"] = spec.input_channels;
  j["num_classes"] = spec.num_classes;
  j["recombination"] = spec.recombination;
  j["rr_mode"] = to_string(spec.rr_mode);
  j["dilation_schedule"] = spec.dilation_schedule;
  j["expansion_factor"] = spec.expansion_factor;
  j["se_r"] = spec.se_r;
  j["width_multiplier"] = spec.width_multiplier;
  return j;
}

void read_network_spec(const Json& object, NetworkSpec& spec, const std::string& context) {
  StrictObject o(object, context);
  std::size_t version = 1;
  o.optional("format_version", version);
  if (version != 1) throw Error(context + ": unsupported format_version " + std::to_string(version));
  o.optional("num_scales", spec.num_scales);
  o.optional("base_channels", spec.base_channels);
  o.optional("convs_per_scale", spec.convs_per_scale);
  o.optional("input_channels", spec.input_channels);
  o.optional("num_classes", spec.num_classes);
  o.optional("recombination", spec.recombination);
  std::string mode = to_string(spec.rr_mode);
  o.optional("rr_mode", mode);
  spec.rr_mode = parse_rr_mode(mode);
  o.optional("dilation_schedule", spec.dilation_schedule);
  o.optional("expansion_factor", spec.expansion_factor);
  o.optional("se_r", spec.se_r);
  o.optional("width_multiplier", spec.width_multiplier);
  o.finish();
  spec.validate();
}

}  // namespace detail

std::string network_spec_to_json(const NetworkSpec& spec) {
  return detail::dump(detail::network_spec_json(spec));
}

NetworkSpec network_spec_from_json(const std::string& text) {
  NetworkSpec spec;
  detail::read_network_spec(detail::parse_json(text, "network spec"), spec, "network spec");
  return spec;
}

}  // namespace rrse
