#include "rrse/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "json_util.hpp"
#include "rrse/parallel.hpp"
#include "rrse/random.hpp"
#include "rrse/tensor_io.hpp"

namespace rrse {

namespace fs = std::filesystem;

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  throw Error("unknown split '" + text + "'");
}

namespace {

// Per-class channel means (rows: label code 0..3, columns: the four input
// channels). Edema is bright in channels 2-3, enhancing in channel 1.
constexpr std::array<std::array<double, kImageChannels>, 4> kClassMeans = {{
    {0.0, 0.0, 0.0, 0.0},
    {-0.8, 0.6, 1.4, 1.0},
    {0.6, 0.2, 2.0, 2.2},
    {0.4, 2.4, 1.0, 1.2},
}};

Case make_case(std::size_t index, const SynthConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double H = static_cast<double>(cfg.height), W = static_cast<double>(cfg.width);
  const double side = std::min(H, W);
  const double cy = H * (0.3 + 0.4 * unit(rng));
  const double cx = W * (0.3 + 0.4 * unit(rng));
  const double a = side * (0.12 + 0.13 * unit(rng));
  const double b = side * (0.12 + 0.13 * unit(rng));
  const double theta = std::numbers::pi * unit(rng);
  const double core_scale = 0.45 + 0.25 * unit(rng);
  const double enh_scale = core_scale * (0.35 + 0.25 * unit(rng));
  const double ct = std::cos(theta), st = std::sin(theta);

  Case c;
  char id[32];
  std::snprintf(id, sizeof id, "case_%03zu", index);
  c.id = id;
  c.labels = LabelMap({cfg.height, cfg.width}, 0);
  c.image = Tensor({kImageChannels, cfg.height, cfg.width});
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  for (std::size_t y = 0; y < cfg.height; ++y) {
    for (std::size_t x = 0; x < cfg.width; ++x) {
      const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
      const double u = (dx * ct + dy * st) / a, v = (-dx * st + dy * ct) / b;
      const double r = std::sqrt(u * u + v * v);
      std::uint8_t label = 0;
      if (r <= enh_scale) {
        label = 3;
      } else if (r <= core_scale) {
        label = 1;
      } else if (r <= 1.0) {
        label = 2;
      }
      c.labels.at(y, x) = label;
      for (std::size_t ch = 0; ch < kImageChannels; ++ch) {
        c.image.at(ch, y, x) = static_cast<float>(kClassMeans[label][ch] + noise(rng));
      }
    }
  }
  const std::size_t plane = cfg.height * cfg.width;
  for (std::size_t ch = 0; ch < kImageChannels; ++ch) {
    float* p = c.image.data() + ch * plane;
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < plane; ++i) mean += p[i];
    mean /= static_cast<double>(plane);
    for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mean) * (p[i] - mean);
    const double sd = std::sqrt(sq / static_cast<double>(plane));
    const double inv = sd > 0 ? 1.0 / sd : 1.0;
    for (std::size_t i = 0; i < plane; ++i) p[i] = static_cast<float>((p[i] - mean) * inv);
  }
  return c;
}

}  // namespace

std::vector<Case> generate_synthetic_cases(const SynthConfig& cfg) {
  if (cfg.cases < 5) throw Error("synthetic dataset needs at least 5 cases to split 60/20/20");
  if (cfg.height < 64 || cfg.width < 64) throw Error("synthetic images must be at least 64x64");
  if (!(cfg.noise_sigma >= 0.0)) throw Error("noise_sigma must be non-negative");
  std::vector<Case> cases(cfg.cases);
  parallel_for(cfg.cases, [&](std::size_t i) { cases[i] = make_case(i, cfg); });

  std::vector<std::size_t> order(cfg.cases);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(cfg.seed, 0xD5));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  const std::size_t n_train = cfg.cases * 3 / 5, n_val = cfg.cases / 5;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cases[order[k]].split = k < n_train ? Split::train : k < n_train + n_val ? Split::val : Split::test;
  }
  return cases;
}

void write_dataset(const fs::path& dir, const std::vector<Case>& cases, const SynthConfig& cfg) {
  fs::create_directories(dir);
  detail::OrderedJson j;
  j["format"] = "rrse-dataset";
  j["format_version"] = 1;
  j["generator"] = {{"cases", cfg.cases},
                    {"height", cfg.height},
                    {"width", cfg.width},
                    {"seed", cfg.seed},
                    {"noise_sigma", cfg.noise_sigma}};
  detail::OrderedJson list = detail::OrderedJson::array();
  for (const Case& c : cases) {
    const std::string image = c.id + ".image.rrse", labels = c.id + ".labels.rrse";
    save_tensor(dir / image, c.image);
    save_tensor(dir / labels, c.labels);
    list.push_back({{"id", c.id}, {"split", to_string(c.split)}, {"image", image}, {"labels", labels}});
  }
  j["cases"] = std::move(list);
  const std::string text = detail::dump(j);
  write_file_bytes(dir / "dataset.json",
                   {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void generate_synthetic(const fs::path& dir, const SynthConfig& cfg) {
  write_dataset(dir, generate_synthetic_cases(cfg), cfg);
}

std::vector<const Case*> Dataset::split(Split s) const {
  std::vector<const Case*> out;
  for (const Case& c : cases) {
    if (c.split == s) out.push_back(&c);
  }
  return out;
}

Dataset load_dataset(const fs::path& dir) {
  const std::string context = "dataset " + dir.string();
  const std::vector<std::uint8_t> bytes = read_file_bytes(dir / "dataset.json");
  const detail::Json j =
      detail::parse_json(std::string(bytes.begin(), bytes.end()), context + "/dataset.json");
  detail::StrictObject o(j, context + "/dataset.json");
  std::string format;
  std::size_t version = 0;
  o.required("format", format);
  o.required("format_version", version);
  if (format != "rrse-dataset" || version != 1) {
    throw Error(context + ": unsupported dataset format '" + format + "' v" + std::to_string(version));
  }
  if (o.has("generator")) o.raw("generator");
  if (!o.has("cases")) throw Error(context + ": missing key 'cases'");
  const detail::Json& list = o.raw("cases");
  o.finish();
  if (!list.is_array() || list.empty()) throw Error(context + ": 'cases' must be a non-empty array");

  Dataset ds;
  for (const detail::Json& entry : list) {
    detail::StrictObject e(entry, context + "/cases[]");
    Case c;
    std::string split, image, labels;
    e.required("id", c.id);
    e.required("split", split);
    e.required("image", image);
    e.required("labels", labels);
    e.finish();
    c.split = parse_split(split);
    c.image = load_tensor(dir / image);
    c.labels = load_label_map(dir / labels);
    if (c.image.rank() != 3 || c.labels.rank() != 2 || c.image.dim(1) != c.labels.dim(0) ||
        c.image.dim(2) != c.labels.dim(1)) {
      throw Error(context + ": case '" + c.id + "' has image " + shape_str(c.image.shape()) +
                  " and labels " + shape_str(c.labels.shape()));
    }
    ds.cases.push_back(std::move(c));
  }
  return ds;
}

LabelMap fuse_labels(const LabelMap& labels) {
  LabelMap out = labels;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] != 0 ? 1 : 0;
  return out;
}

}  // namespace rrse
