#pragma once

// Internal helpers for strict JSON reading. Not installed.

#include <cstdint>
#include <set>
#include <type_traits>
#include <string>
#include <vector>

#include "json.hpp"
#include "rrse/error.hpp"
#include "rrse/network.hpp"

namespace rrse::detail {

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seeds are read as std::size_t");

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Reads keys from a JSON object and rejects any key that was never read.
class StrictObject {
 public:
  StrictObject(const Json& object, std::string context)
      : object_(object), context_(std::move(context)) {
    if (!object_.is_object()) throw Error(context_ + ": expected a JSON object");
  }

  bool has(const char* key) const { return object_.contains(key); }

  const Json& raw(const char* key) {
    seen_.insert(key);
    return object_.at(key);
  }

  template <typename T>
  void optional(const char* key, T& out) {
    if (!object_.contains(key)) return;
    seen_.insert(key);
    read(object_.at(key), key, out);
  }

  template <typename T>
  void required(const char* key, T& out) {
    if (!object_.contains(key)) throw Error(context_ + ": missing key '" + key + "'");
    optional(key, out);
  }

  void finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!seen_.count(it.key())) throw Error(context_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  [[noreturn]] void type_error(const char* key, const char* expected) const {
    throw Error(context_ + ": key '" + key + "' must be " + expected);
  }

  void read(const Json& v, const char* key, std::size_t& out) const {
    if (!v.is_number_unsigned()) type_error(key, "a non-negative integer");
    out = v.get<std::size_t>();
  }
  void read(const Json& v, const char* key, double& out) const {
    if (!v.is_number()) type_error(key, "a number");
    out = v.get<double>();
  }
  void read(const Json& v, const char* key, bool& out) const {
    if (!v.is_boolean()) type_error(key, "a boolean");
    out = v.get<bool>();
  }
  void read(const Json& v, const char* key, std::string& out) const {
    if (!v.is_string()) type_error(key, "a string");
    out = v.get<std::string>();
  }
  void read(const Json& v, const char* key, std::vector<std::size_t>& out) const {
    if (!v.is_array()) type_error(key, "an array of non-negative integers");
    out.clear();
    for (const Json& e : v) {
      if (!e.is_number_unsigned()) type_error(key, "an array of non-negative integers");
      out.push_back(e.get<std::size_t>());
    }
  }

  const Json& object_;
  std::string context_;
  std::set<std::string> seen_;
};

Json parse_json(const std::string& text, const std::string& context);

OrderedJson network_spec_json(const NetworkSpec& spec);
void read_network_spec(const Json& object, NetworkSpec& spec, const std::string& context);

/// Stable textual form: 2-space indent, trailing newline.
std::string dump(const OrderedJson& j);

}  // namespace rrse::detail
