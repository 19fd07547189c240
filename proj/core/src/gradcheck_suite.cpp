#include "rrse/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>

#include "rrse/blocks.hpp"
#include "rrse/random.hpp"

namespace rrse {

namespace {

TensorD normal(const Shape& shape, std::uint64_t seed, double sd = 1.0) {
  TensorD t(shape);
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, sd);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

// Keeps values at least `gap` away from zero so ReLU kinks are not straddled.
TensorD away_from_zero(TensorD t, double gap) {
  for (double& v : t.values()) {
    if (std::abs(v) < gap) v = v < 0 ? -gap : gap;
  }
  return t;
}

// Distinct values spaced 0.05 apart in random order: no max-pool ties.
TensorD spaced(const Shape& shape, std::uint64_t seed) {
  TensorD t(shape);
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = 0.05 * static_cast<double>(order[i]) - 0.025 * static_cast<double>(t.size());
  }
  return t;
}

LabelMap random_labels(const Shape& shape, std::uint8_t classes, std::uint64_t seed) {
  LabelMap t(shape);
  Rng rng(seed);
  std::uniform_int_distribution<int> dist(0, classes - 1);
  for (auto& v : t.values()) v = static_cast<std::uint8_t>(dist(rng));
  return t;
}

struct Case {
  std::string name;
  std::string kind;
  // Builds (inputs, scalar function) for one seed.
  std::function<std::pair<std::vector<TensorD>, MultiScalarFn>(std::uint64_t)> make;
};

// Random projection of an output, so every output element gets a distinct weight.
VarD project(VarD out, std::uint64_t seed) {
  return ad::weighted_sum(out, normal(out.shape(), mix_seed(seed, 99)));
}

Case conv_case(std::size_t d) {
  return {"conv2d_d" + std::to_string(d), "op", [d](std::uint64_t s) {
            const std::size_t e = 2 * d + 4;
            std::vector<TensorD> in = {normal({2, 3, e, e}, mix_seed(s, 0)),
                                       normal({4, 3, 3, 3}, mix_seed(s, 1), 0.5),
                                       normal({4}, mix_seed(s, 2))};
            MultiScalarFn f = [d, s](TapeD&, std::span<const VarD> v) {
              return project(ad::conv2d(v[0], v[1], v[2], d), s);
            };
            return std::make_pair(in, f);
          }};
}

ad::ConvVars<double> cv(std::span<const VarD> v, std::size_t at, std::size_t dilation = 1) {
  return {v[at], v[at + 1], dilation, "gc"};
}

std::vector<TensorD> conv_inputs(std::size_t in, std::size_t out, std::size_t k, std::uint64_t seed) {
  return {normal({out, in, k, k}, mix_seed(seed, 0), std::sqrt(2.0 / double(in * k * k))),
          normal({out}, mix_seed(seed, 1), 0.3)};
}

void append(std::vector<TensorD>& a, std::vector<TensorD> b) {
  for (auto& t : b) a.push_back(std::move(t));
}

// RR block cases. Input [2,C,e,e] with C = 6, expansion 4, bottleneck 2.
Case rr_case(const std::string& name, RRMode mode, std::size_t d, bool recombine) {
  return {name, "block", [=](std::uint64_t s) {
            const std::size_t C = 6, b = 2, e = 2 * d + 5;
            std::vector<TensorD> in = {normal({2, C, e, e}, mix_seed(s, 0))};
            if (recombine) {
              append(in, conv_inputs(C, 4 * C, 1, mix_seed(s, 1)));
              append(in, conv_inputs(4 * C, C, 1, mix_seed(s, 2)));
            }
            if (mode == RRMode::se) {
              append(in, conv_inputs(C, b, 1, mix_seed(s, 3)));
              append(in, conv_inputs(b, C, 1, mix_seed(s, 4)));
            } else if (mode == RRMode::segse) {
              append(in, conv_inputs(C, b, 3, mix_seed(s, 3)));
              append(in, conv_inputs(b, C, 1, mix_seed(s, 4)));
            }
            MultiScalarFn f = [=](TapeD&, std::span<const VarD> v) {
              VarD y = v[0];
              std::size_t at = 1;
              if (recombine) {
                y = ad::recombination(y, cv(v, 1), cv(v, 3));
                at = 5;
              }
              if (mode == RRMode::se) y = ad::se_block(y, cv(v, at), cv(v, at + 2));
              if (mode == RRMode::segse) y = ad::segse_block(y, cv(v, at, d), cv(v, at + 2));
              return project(y, s);
            };
            return std::make_pair(in, f);
          }};
}

std::vector<Case> all_cases() {
  std::vector<Case> cases;
  for (std::size_t d : {1, 2, 3}) cases.push_back(conv_case(d));
  cases.push_back({"conv1x1", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({2, 3, 5, 5}, mix_seed(s, 0))};
                     append(in, conv_inputs(3, 4, 1, mix_seed(s, 1)));
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::conv2d(v[0], v[1], v[2], 1), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"maxpool", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {spaced({2, 3, 6, 6}, mix_seed(s, 0))};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::maxpool2d(v[0]), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"upsample", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({2, 3, 3, 4}, mix_seed(s, 0))};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::upsample_nearest(v[0], 2), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"global_avg_pool", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({2, 3, 4, 5}, mix_seed(s, 0))};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::global_avg_pool(v[0]), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"batchnorm_train", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({3, 3, 4, 4}, mix_seed(s, 0), 2.0),
                                                normal({3}, mix_seed(s, 1)),
                                                normal({3}, mix_seed(s, 2))};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       TensorD mean = TensorD::zeros({3}), var = TensorD::ones({3});
                       return project(ad::batchnorm2d(v[0], v[1], v[2], mean, var, Mode::train, false),
                                      s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"dropout_frozen", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({2, 4, 3, 3}, mix_seed(s, 0))};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::spatial_dropout(v[0], 0.5, Mode::train, mix_seed(s, 7)), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"relu", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {away_from_zero(normal({2, 3, 4, 4}, mix_seed(s, 0)), 1e-2)};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::relu(v[0]), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"sigmoid", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({2, 3, 4, 4}, mix_seed(s, 0), 3.0)};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::sigmoid(v[0]), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"channel_gate_mul", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({2, 3, 4, 4}, mix_seed(s, 0)),
                                                normal({2, 3, 1, 1}, mix_seed(s, 1))};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::mul(v[0], v[1]), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"crop_add", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({2, 3, 7, 7}, mix_seed(s, 0)),
                                                normal({2, 3, 5, 5}, mix_seed(s, 1))};
                     MultiScalarFn f = [s](TapeD&, std::span<const VarD> v) {
                       return project(ad::add(ad::center_crop(v[0], 5, 5), v[1]), s);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back({"crossentropy", "op", [](std::uint64_t s) {
                     std::vector<TensorD> in = {normal({2, 4, 3, 3}, mix_seed(s, 0), 2.0)};
                     const LabelMap target = random_labels({2, 3, 3}, 4, mix_seed(s, 1));
                     MultiScalarFn f = [target](TapeD&, std::span<const VarD> v) {
                       return ad::softmax_cross_entropy(v[0], target);
                     };
                     return std::make_pair(in, f);
                   }});
  cases.push_back(rr_case("recombination", RRMode::none, 1, true));
  cases.push_back(rr_case("se", RRMode::se, 1, false));
  for (std::size_t d : {1, 2, 3}) {
    cases.push_back(rr_case("segse_d" + std::to_string(d), RRMode::segse, d, false));
  }
  cases.push_back(rr_case("rr_none", RRMode::none, 1, true));
  cases.push_back(rr_case("rr_se", RRMode::se, 1, true));
  cases.push_back(rr_case("rr_segse", RRMode::segse, 2, true));
  return cases;
}

bool selected(const std::string& name, const std::string& filter) {
  if (filter.empty() || name == filter) return true;
  return name.rfind(filter + "_", 0) == 0;
}

}  // namespace

std::vector<std::string> gradcheck_case_names() {
  std::vector<std::string> names;
  for (const Case& c : all_cases()) names.push_back(c.name);
  return names;
}

std::vector<GradcheckRow> run_gradcheck_suite(const std::string& filter,
                                              const std::vector<std::uint64_t>& seeds,
                                              double tolerance) {
  std::vector<GradcheckRow> rows;
  bool any = false;
  for (const Case& c : all_cases()) {
    if (!selected(c.name, filter)) continue;
    any = true;
    for (std::uint64_t seed : seeds) {
      auto [inputs, fn] = c.make(seed);
      rows.push_back({c.name, c.kind, seed, gradcheck(fn, std::move(inputs), 1e-4, tolerance)});
    }
  }
  if (!any) {
    std::string known;
    for (const std::string& n : gradcheck_case_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error("unknown gradcheck block '" + filter + "' (known: " + known + ")");
  }
  return rows;
}

std::string gradcheck_table(const std::vector<GradcheckRow>& rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %-6s %5s %14s %7s\n", "name", "kind", "seed", "max_rel_err",
                "status");
  out += buf;
  for (const GradcheckRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%-18s %-6s %5llu %14.3e %7s\n", r.name.c_str(), r.kind.c_str(),
                  static_cast<unsigned long long>(r.seed), r.report.max_rel_err,
                  r.report.pass ? "ok" : "FAIL");
    out += buf;
  }
  return out;
}

}  // namespace rrse
