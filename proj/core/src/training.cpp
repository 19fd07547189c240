#include "rrse/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rrse/metrics.hpp"

namespace rrse {

template <typename T>
AdamState<T> AdamState<T>::init(const ParameterSet<T>& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  for (const auto& p : params) {
    s.m.push_back(BasicTensor<T>::zeros(p.value.shape()));
    s.v.push_back(BasicTensor<T>::zeros(p.value.shape()));
  }
  return s;
}

template <typename T>
void adam_step(ParameterSet<T>& params, const std::vector<BasicTensor<T>>& grads,
               AdamState<T>& state) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw Error("adam_step: " + std::to_string(grads.size()) + " gradients and " +
                std::to_string(state.m.size()) + " moment slots for " +
                std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    if (grads[i].shape() != params[i].value.shape()) {
      throw Error("adam_step: gradient of '" + params[i].name + "' has shape " +
                  shape_str(grads[i].shape()) + ", expected " + shape_str(params[i].value.shape()));
    }
    for (T g : grads[i].values()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw Error("adam_step: non-finite gradient for parameter '" + params[i].name + "'");
      }
    }
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
  const T bc1 = static_cast<T>(1.0 - std::pow(c.beta1, t));
  const T bc2 = static_cast<T>(1.0 - std::pow(c.beta2, t));
  const T lr = static_cast<T>(c.learning_rate), eps = static_cast<T>(c.epsilon);
  const T wd = static_cast<T>(c.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    T* theta = params[i].value.data();
    const T* grad = grads[i].data();
    T* m = state.m[i].data();
    T* v = state.v[i].data();
    for (std::size_t k = 0; k < params[i].value.size(); ++k) {
      const T g = grad[k] + wd * theta[k];
      m[k] = b1 * m[k] + (T(1) - b1) * g;
      v[k] = b2 * v[k] + (T(1) - b2) * g * g;
      const T m_hat = m[k] / bc1;
      const T v_hat = v[k] / bc2;
      theta[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(ParameterSet<float>&, const std::vector<Tensor>&, AdamState<float>&);
template void adam_step(ParameterSet<double>&, const std::vector<TensorD>&, AdamState<double>&);

double crossentropy_loss(const Tensor& logits, const LabelMap& target) {
  TapeD tape;
  return ad::softmax_cross_entropy(tape.constant(logits.cast<double>()), target).value()[0];
}

Augmentation draw_augmentation(Rng& rng, const AugmentOptions& options) {
  Augmentation a;
  if (options.flip) a.flip = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  if (options.rotate) a.rotations = std::uniform_int_distribution<unsigned>(0, 3)(rng);
  return a;
}

template <typename T>
BasicTensor<T> apply_augmentation(const BasicTensor<T>& x, const Augmentation& aug) {
  if (x.rank() < 2) throw Error("augment: need at least two axes, got " + shape_str(x.shape()));
  const std::size_t H = x.dim(x.rank() - 2), W = x.dim(x.rank() - 1);
  const unsigned k = aug.rotations % 4;
  if (k != 0 && H != W) {
    throw Error("augment: rotation needs a square patch, got " + std::to_string(H) + "x" +
                std::to_string(W));
  }
  if (!aug.flip && k == 0) return x;
  const std::size_t planes = x.size() / (H * W);
  BasicTensor<T> out(x.shape());
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = x.data() + p * H * W;
    T* dst = out.data() + p * H * W;
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t xo = 0; xo < W; ++xo) {
        // Invert the rotation, then the flip, to find the source pixel.
        std::size_t sy = y, sx = xo;
        for (unsigned r = 0; r < k; ++r) {
          // counter-clockwise quarter turn: out(y, x) = in(x, W-1-y)
          const std::size_t ny = sx, nx = W - 1 - sy;
          sy = ny;
          sx = nx;
        }
        if (aug.flip) sx = W - 1 - sx;
        dst[y * W + xo] = src[sy * W + sx];
      }
    }
  }
  return out;
}

template Tensor apply_augmentation(const Tensor&, const Augmentation&);
template TensorD apply_augmentation(const TensorD&, const Augmentation&);
template LabelMap apply_augmentation(const LabelMap&, const Augmentation&);

std::pair<Tensor, LabelMap> augment(const Tensor& image, const LabelMap& labels, std::uint64_t seed,
                                    const AugmentOptions& options) {
  const std::size_t r = image.rank();
  if (r < 2 || labels.rank() < 2 || image.dim(r - 2) != labels.dim(labels.rank() - 2) ||
      image.dim(r - 1) != labels.dim(labels.rank() - 1)) {
    throw Error("augment: image " + shape_str(image.shape()) + " and labels " +
                shape_str(labels.shape()) + " differ spatially");
  }
  Rng rng(seed);
  const Augmentation a = draw_augmentation(rng, options);
  return {apply_augmentation(image, a), apply_augmentation(labels, a)};
}

PatchWindow sample_patch_window(const LabelMap& labels, std::size_t patch, bool class_balancing,
                                Rng& rng) {
  if (labels.rank() != 2) throw Error("sample_patch_window expects [H,W] labels");
  const std::size_t H = labels.dim(0), W = labels.dim(1);
  if (patch == 0 || patch > H || patch > W) {
    throw Error("patch " + std::to_string(patch) + " does not fit a " + std::to_string(H) + "x" +
                std::to_string(W) + " image");
  }
  PatchWindow w;
  std::size_t index = 0;
  if (class_balancing) {
    std::array<std::vector<std::size_t>, 256> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
    std::vector<int> present;
    for (int c = 0; c < 256; ++c) {
      if (!members[c].empty()) present.push_back(c);
    }
    w.center_class = present[std::uniform_int_distribution<std::size_t>(0, present.size() - 1)(rng)];
    const auto& pool = members[static_cast<std::size_t>(w.center_class)];
    index = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  } else {
    index = std::uniform_int_distribution<std::size_t>(0, labels.size() - 1)(rng);
  }
  w.center_y = index / W;
  w.center_x = index % W;
  auto start = [patch](std::size_t center, std::size_t extent) {
    const std::size_t half = patch / 2;
    const std::size_t s = center > half ? center - half : 0;
    return std::min(s, extent - patch);
  };
  w.top = start(w.center_y, H);
  w.left = start(w.center_x, W);
  return w;
}

Batch sample_batch(std::span<const Case* const> cases, std::size_t batch_size, std::size_t patch,
                   std::size_t output, const TrainConfig& cfg, bool fuse, Rng& rng) {
  if (cases.empty()) throw Error("sample_batch: no training cases");
  if (batch_size == 0) throw Error("sample_batch: batch size must be >= 1");
  const std::size_t C = cases.front()->image.dim(0);
  Batch b;
  b.images = Tensor({batch_size, C, patch, patch});
  b.targets = LabelMap({batch_size, output, output});
  const AugmentOptions aug_opts{cfg.flip, cfg.rotate};
  for (std::size_t n = 0; n < batch_size; ++n) {
    const Case& c = *cases[std::uniform_int_distribution<std::size_t>(0, cases.size() - 1)(rng)];
    if (c.image.dim(0) != C) throw Error("case '" + c.id + "' has a different channel count");
    const LabelMap labels = fuse ? fuse_labels(c.labels) : c.labels;
    const PatchWindow w = sample_patch_window(labels, patch, cfg.class_balancing, rng);
    const Augmentation a = draw_augmentation(rng, aug_opts);
    const Tensor img = apply_augmentation(crop_window(c.image, w.top, w.left, patch, patch), a);
    const LabelMap lab = center_crop(
        apply_augmentation(crop_window(labels, w.top, w.left, patch, patch), a), output, output);
    std::copy(img.data(), img.data() + img.size(), b.images.data() + n * img.size());
    std::copy(lab.data(), lab.data() + lab.size(), b.targets.data() + n * lab.size());
  }
  return b;
}

std::array<double, 3> validation_dice(Model& model, std::span<const Case* const> cases,
                                      std::size_t tile_input) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (cases.empty()) return {nan, nan, nan};
  const bool binary = model.spec().num_classes == 2;
  std::array<double, 3> sum{};
  TileOptions tiles;
  tiles.input_extent = tile_input;
  for (const Case* c : cases) {
    const LabelMap pred = predict_labels(model, c->image, std::nullopt, tiles);
    if (binary) {
      sum[0] += dice(region_mask(pred, Region::whole),
                     region_mask(fuse_labels(c->labels), Region::whole));
    } else {
      const RegionMasks p = to_region_masks(pred), t = to_region_masks(c->labels);
      for (Region r : kRegions) sum[static_cast<std::size_t>(r)] += dice(p[r], t[r]);
    }
  }
  const double n = static_cast<double>(cases.size());
  if (binary) return {sum[0] / n, nan, nan};
  return {sum[0] / n, sum[1] / n, sum[2] / n};
}

TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(const HistoryRow&)>& on_row) {
  const std::vector<const Case*> train_cases = data.split(Split::train);
  const std::vector<const Case*> val_cases = data.split(Split::val);
  if (train_cases.empty()) throw Error("train: dataset has no training cases");
  const std::size_t min_in = model.min_input_extent();
  const ShapeReport shape = model.walk(cfg.patch_size, cfg.patch_size);
  if (!shape.valid) {
    throw Error("train: patch_size " + std::to_string(cfg.patch_size) +
                " is below the network minimum input " + std::to_string(min_in));
  }
  if (!shape.aligned) {
    throw Error("train: patch_size " + std::to_string(cfg.patch_size) +
                " is not aligned for this network; the next aligned size is " +
                std::to_string(model.aligned_input_extent(cfg.patch_size)));
  }
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) {
    throw Error("train: dropout_rate must be in [0, 1)");
  }
  const std::size_t output = shape.out_height;
  const bool binary = model.spec().num_classes == 2;

  TrainResult result;
  result.state.seed = cfg.seed;
  AdamState<float> adam = AdamState<float>::init(model.parameters(), cfg.adam);
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    Rng rng(mix_seed(cfg.seed, 1, it));
    const Batch batch =
        sample_batch(train_cases, cfg.batch_size, cfg.patch_size, output, cfg, binary, rng);

    std::vector<Tensor> snapshot;
    snapshot.reserve(model.parameters().size());
    for (const auto& p : model.parameters()) snapshot.push_back(p.value);
    auto restore = [&] {
      for (std::size_t i = 0; i < snapshot.size(); ++i) {
        model.parameters()[i].value = std::move(snapshot[i]);
      }
    };

    TapeF tape;
    const std::vector<VarF> vars = model.bind(tape, true);
    ForwardOptions opts;
    opts.mode = Mode::train;
    opts.dropout_rate = cfg.dropout_rate;
    opts.seed = mix_seed(cfg.seed, 2, it);
    VarF logits = model.forward(tape, tape.constant(batch.images), vars, opts);
    VarF loss = ad::softmax_cross_entropy(logits, batch.targets);
    const double loss_value = loss.value()[0];
    if (!std::isfinite(loss_value)) {
      restore();
      result.diverged = true;
      result.divergence = "non-finite loss at iteration " + std::to_string(it);
      break;
    }
    tape.backward(loss);
    std::vector<Tensor> grads(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (model.parameters()[i].trainable) grads[i] = tape.grad(vars[i]);
    }
    try {
      adam_step(model.parameters(), grads, adam);
    } catch (const Error& e) {
      restore();
      result.diverged = true;
      result.divergence = std::string(e.what()) + " at iteration " + std::to_string(it);
      break;
    }
    result.state.step = it;

    HistoryRow row;
    row.iteration = it;
    row.train_loss = loss_value;
    const bool validate = !val_cases.empty() &&
                          ((cfg.validation_every && it % cfg.validation_every == 0) ||
                           it == cfg.iterations);
    if (validate) {
      row.has_validation = true;
      row.val_dice = validation_dice(model, val_cases, cfg.tile_input);
    }
    result.history.push_back(row);
    if (on_row) on_row(row);
  }
  return result;
}

std::string history_csv(const std::vector<HistoryRow>& history) {
  std::string out = "iteration,train_loss,val_dice_whole,val_dice_core,val_dice_enh\n";
  char buf[64];
  for (const HistoryRow& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g", r.iteration, r.train_loss);
    out += buf;
    for (double d : r.val_dice) {
      out += ",";
      if (r.has_validation && std::isfinite(d)) out += format_number(d);
    }
    out += "\n";
  }
  return out;
}

}  // namespace rrse
