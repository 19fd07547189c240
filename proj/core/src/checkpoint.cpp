#include "rrse/checkpoint.hpp"

#include <set>

#include "json_util.hpp"
#include "rrse/tensor_io.hpp"

namespace rrse {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "rrse-checkpoint";

}  // namespace

void save_checkpoint(const fs::path& dir, const Model& model, const TrainingState& state) {
  fs::create_directories(dir);
  detail::OrderedJson j;
  j["format"] = kFormat;
  j["format_version"] = 1;
  j["network"] = detail::network_spec_json(model.spec());
  j["step"] = state.step;
  j["rng"] = {{"seed", state.seed}, {"next_iteration", state.step + 1}};
  detail::OrderedJson list = detail::OrderedJson::array();
  for (const auto& p : model.parameters()) {
    list.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"trainable", p.trainable}});
    save_tensor(dir / (p.name + ".rrse"), p.value);
  }
  j["parameters"] = std::move(list);
  const std::string text = detail::dump(j);
  write_file_bytes(dir / "spec.json",
                   {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  const std::string context = "checkpoint " + dir.string();
  if (!fs::is_directory(dir)) throw Error(context + ": not a directory");
  const std::vector<std::uint8_t> bytes = read_file_bytes(dir / "spec.json");
  const detail::Json j =
      detail::parse_json(std::string(bytes.begin(), bytes.end()), context + "/spec.json");
  detail::StrictObject o(j, context + "/spec.json");
  std::string format;
  std::size_t version = 0;
  o.required("format", format);
  o.required("format_version", version);
  if (format != kFormat) throw Error(context + ": not a checkpoint (format '" + format + "')");
  if (version != 1) throw Error(context + ": unsupported format_version " + std::to_string(version));

  NetworkSpec spec;
  detail::read_network_spec(o.raw("network"), spec, context + "/network");
  TrainingState state;
  o.required("step", state.step);
  {
    if (!o.has("rng")) throw Error(context + ": missing key 'rng'");
    detail::StrictObject rng(o.raw("rng"), context + "/rng");
    std::size_t seed = 0, next = 0;
    rng.required("seed", seed);
    rng.required("next_iteration", next);
    rng.finish();
    state.seed = seed;
  }
  if (!o.has("parameters")) throw Error(context + ": missing key 'parameters'");
  const detail::Json& list = o.raw("parameters");
  o.finish();
  if (!list.is_array()) throw Error(context + ": 'parameters' must be an array");

  Model model = Model::build(spec, 0);
  std::set<std::string> listed;
  for (const detail::Json& entry : list) {
    detail::StrictObject e(entry, context + "/parameters[]");
    std::string name;
    std::vector<std::size_t> shape;
    bool trainable = true;
    e.required("name", name);
    e.required("shape", shape);
    e.required("trainable", trainable);
    e.finish();
    if (!listed.insert(name).second) throw Error(context + ": parameter '" + name + "' listed twice");
    if (!model.parameters().contains(name)) {
      throw Error(context + ": unexpected parameter '" + name + "' for this network spec");
    }
    Parameter<float>& p = model.parameters().at(name);
    Tensor value = load_tensor(dir / (name + ".rrse"));
    if (value.shape() != p.value.shape() || shape != p.value.shape()) {
      throw Error(context + ": parameter '" + name + "' has shape " + shape_str(value.shape()) +
                  ", expected " + shape_str(p.value.shape()));
    }
    if (trainable != p.trainable) throw Error(context + ": trainable flag mismatch for '" + name + "'");
    p.value = std::move(value);
  }
  for (const auto& p : model.parameters()) {
    if (!listed.count(p.name)) throw Error(context + ": missing parameter '" + p.name + "'");
  }
  return {std::move(model), state};
}

}  // namespace rrse
