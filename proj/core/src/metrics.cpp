#include "rrse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rrse {

std::string to_string(Region region) {
  switch (region) {
    case Region::whole: return "whole";
    case Region::core: return "core";
    case Region::enhancing: return "enhancing";
  }
  return "?";
}

std::size_t RegionMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

const RegionMask& RegionMasks::operator[](Region r) const {
  switch (r) {
    case Region::whole: return whole;
    case Region::core: return core;
    case Region::enhancing: return enhancing;
  }
  return whole;
}

namespace {

void require_2d(const LabelMap& labels) {
  if (labels.rank() != 2) {
    throw Error("label map must be [H,W], got " + shape_str(labels.shape()));
  }
}

void require_same_grid(const RegionMask& a, const RegionMask& b) {
  if (a.height != b.height || a.width != b.width) {
    throw Error("mask shapes differ: " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                " vs " + std::to_string(b.height) + "x" + std::to_string(b.width));
  }
}

bool in_region(std::uint8_t code, Region r) {
  switch (r) {
    case Region::whole: return code != 0;
    case Region::core: return code == 1 || code == 3;
    case Region::enhancing: return code == 3;
  }
  return false;
}

}  // namespace

RegionMask region_mask(const LabelMap& labels, Region region) {
  require_2d(labels);
  RegionMask m(labels.dim(0), labels.dim(1));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > kMaxLabel) {
      throw Error("invalid label code " + std::to_string(labels[i]) + " at index " +
                  std::to_string(i) + " (expected 0..3)");
    }
    m.bits[i] = in_region(labels[i], region) ? 1 : 0;
  }
  return m;
}

RegionMasks to_region_masks(const LabelMap& labels) {
  return {region_mask(labels, Region::whole), region_mask(labels, Region::core),
          region_mask(labels, Region::enhancing)};
}

double dice(const RegionMask& a, const RegionMask& b) {
  require_same_grid(a, b);
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    na += a.bits[i];
    nb += b.bits[i];
    both += a.bits[i] & b.bits[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

RegionMask boundary(const RegionMask& mask) {
  RegionMask out(mask.height, mask.width);
  const auto H = static_cast<std::ptrdiff_t>(mask.height);
  const auto W = static_cast<std::ptrdiff_t>(mask.width);
  for (std::ptrdiff_t y = 0; y < H; ++y) {
    for (std::ptrdiff_t x = 0; x < W; ++x) {
      if (!mask(y, x)) continue;
      bool edge = false;
      for (std::ptrdiff_t dy = -1; dy <= 1 && !edge; ++dy) {
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
          const std::ptrdiff_t ny = y + dy, nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= H || nx >= W || !mask(ny, nx)) {
            edge = true;
            break;
          }
        }
      }
      if (edge) out.set(y, x);
    }
  }
  return out;
}

namespace {

constexpr double kFar = 1e20;

// 1-D squared distance transform of the sampled function f (lower envelope of
// parabolas rooted at every sample).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<std::size_t>& v,
            std::vector<double>& z) {
  const std::size_t n = f.size();
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = kFar * 10;
  auto intersect = [&f](std::size_t q, std::size_t p) {
    const double qd = static_cast<double>(q), pd = static_cast<double>(p);
    return ((f[q] + qd * qd) - (f[p] + pd * pd)) / (2.0 * qd - 2.0 * pd);
  };
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar * 10;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double qd = static_cast<double>(q);
    while (z[k + 1] < qd) ++k;
    const double diff = qd - static_cast<double>(v[k]);
    d[q] = diff * diff + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const RegionMask& mask) {
  const std::size_t H = mask.height, W = mask.width;
  std::vector<double> grid(H * W);
  if (mask.empty_set()) {
    std::fill(grid.begin(), grid.end(), kInfDistance);
    return grid;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = mask.bits[i] ? 0.0 : kFar;
  const std::size_t n = std::max(H, W);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<std::size_t> v(n);
  f.resize(H);
  d.resize(H);
  for (std::size_t x = 0; x < W; ++x) {
    for (std::size_t y = 0; y < H; ++y) f[y] = grid[y * W + x];
    edt_1d(f, d, v, z);
    for (std::size_t y = 0; y < H; ++y) grid[y * W + x] = d[y];
  }
  f.resize(W);
  d.resize(W);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) f[x] = grid[y * W + x];
    edt_1d(f, d, v, z);
    for (std::size_t x = 0; x < W; ++x) grid[y * W + x] = d[x];
  }
  return grid;
}

namespace {

double directed_percentile(const RegionMask& from, const std::vector<double>& to_sq_dist,
                           unsigned percentile, double spacing) {
  std::vector<double> dist;
  for (std::size_t i = 0; i < from.bits.size(); ++i) {
    if (from.bits[i]) dist.push_back(std::sqrt(to_sq_dist[i]) * spacing);
  }
  std::sort(dist.begin(), dist.end());
  const std::size_t n = dist.size();
  const std::size_t rank = std::max<std::size_t>(1, (percentile * n + 99) / 100);
  return dist[rank - 1];
}

}  // namespace

double hausdorff_percentile(const RegionMask& a, const RegionMask& b, unsigned percentile,
                            double spacing) {
  require_same_grid(a, b);
  if (percentile == 0 || percentile > 100) throw Error("percentile must be in 1..100");
  const bool ea = a.empty_set(), eb = b.empty_set();
  if (ea && eb) return 0.0;
  if (ea || eb) return kInfDistance;
  const RegionMask ba = boundary(a), bb = boundary(b);
  const double ab = directed_percentile(ba, squared_distance_transform(bb), percentile, spacing);
  const double ba_ = directed_percentile(bb, squared_distance_transform(ba), percentile, spacing);
  return std::max(ab, ba_);
}

PpvSensitivity ppv_sensitivity(const RegionMask& pred, const RegionMask& truth) {
  require_same_grid(pred, truth);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i) {
    tp += pred.bits[i] & truth.bits[i];
    fp += pred.bits[i] & (1 - truth.bits[i]);
    fn += (1 - pred.bits[i]) & truth.bits[i];
  }
  const bool both_empty = tp + fp == 0 && tp + fn == 0;
  auto ratio = [both_empty](std::size_t num, std::size_t den) {
    if (den == 0) return both_empty ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(tp, tp + fp), ratio(tp, tp + fn)};
}

CaseMetrics evaluate_case(const std::string& case_id, const LabelMap& pred, const LabelMap& truth) {
  if (pred.shape() != truth.shape()) {
    throw Error("case '" + case_id + "': prediction " + shape_str(pred.shape()) +
                " and truth " + shape_str(truth.shape()) + " differ in shape");
  }
  const RegionMasks p = to_region_masks(pred), t = to_region_masks(truth);
  CaseMetrics m;
  m.case_id = case_id;
  for (Region r : kRegions) {
    RegionScores& s = m.regions[static_cast<std::size_t>(r)];
    s.dice = dice(p[r], t[r]);
    s.hd95 = hd95(p[r], t[r]);
    const PpvSensitivity ps = ppv_sensitivity(p[r], t[r]);
    s.ppv = ps.ppv;
    s.sensitivity = ps.sensitivity;
  }
  return m;
}

namespace {

void accumulate(MetricSummary& s, double v) {
  if (std::isfinite(v)) {
    s.mean += v;
    ++s.finite;
  } else {
    ++s.infinite;
  }
}

void finalize(MetricSummary& s) {
  s.mean = s.finite ? s.mean / static_cast<double>(s.finite) : 0.0;
}

}  // namespace

MetricsReport summarize(std::vector<CaseMetrics> cases) {
  MetricsReport report;
  report.cases = std::move(cases);
  for (const CaseMetrics& c : report.cases) {
    for (std::size_t r = 0; r < 3; ++r) {
      accumulate(report.summary[r].dice, c.regions[r].dice);
      accumulate(report.summary[r].hd95, c.regions[r].hd95);
      accumulate(report.summary[r].ppv, c.regions[r].ppv);
      accumulate(report.summary[r].sensitivity, c.regions[r].sensitivity);
    }
  }
  for (RegionSummary& s : report.summary) {
    finalize(s.dice);
    finalize(s.hd95);
    finalize(s.ppv);
    finalize(s.sensitivity);
  }
  return report;
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string cases_csv(const MetricsReport& report) {
  std::string out = "case,region,dice,hd95,ppv,sensitivity\n";
  for (const CaseMetrics& c : report.cases) {
    for (Region r : kRegions) {
      const RegionScores& s = c.regions[static_cast<std::size_t>(r)];
      out += c.case_id + "," + to_string(r) + "," + format_number(s.dice) + "," +
             format_number(s.hd95) + "," + format_number(s.ppv) + "," +
             format_number(s.sensitivity) + "\n";
    }
  }
  return out;
}

}  // namespace rrse
