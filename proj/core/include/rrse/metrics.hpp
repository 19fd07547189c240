#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rrse/tensor.hpp"

// Label codes: 0 background, 1 necrotic / non-enhancing core, 2 edema,
// 3 enhancing. Regions: whole = {1,2,3}, core = {1,3}, enhancing = {3}.

namespace rrse {

enum class Region { whole, core, enhancing };
inline constexpr std::array<Region, 3> kRegions = {Region::whole, Region::core, Region::enhancing};
inline constexpr std::uint8_t kMaxLabel = 3;

std::string to_string(Region region);

/// Boolean mask over an [H,W] grid, one byte per pixel.
struct RegionMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> bits;

  RegionMask() = default;
  RegionMask(std::size_t h, std::size_t w) : height(h), width(w), bits(h * w, 0) {}

  bool operator()(std::size_t y, std::size_t x) const { return bits[y * width + x] != 0; }
  void set(std::size_t y, std::size_t x, bool v = true) { bits[y * width + x] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty_set() const { return count() == 0; }
  bool operator==(const RegionMask&) const = default;
};

struct RegionMasks {
  RegionMask whole, core, enhancing;
  const RegionMask& operator[](Region r) const;
};

/// labels must be [H,W] with codes in {0,1,2,3}.
RegionMasks to_region_masks(const LabelMap& labels);
RegionMask region_mask(const LabelMap& labels, Region region);

/// 2|a & b| / (|a| + |b|); 1 when both are empty.
double dice(const RegionMask& a, const RegionMask& b);

inline constexpr double kInfDistance = std::numeric_limits<double>::infinity();

/// Pixels of the mask with at least one 8-neighbour outside it (the image
/// border counts as outside).
RegionMask boundary(const RegionMask& mask);

/// Symmetric percentile Hausdorff distance between the boundaries of a and
/// b. Each direction takes the nearest-rank percentile (1-based index
/// ceil(p/100 * n)) of the distances from every boundary pixel of one mask to
/// the nearest boundary pixel of the other. Both empty -> 0, one empty -> inf.
double hausdorff_percentile(const RegionMask& a, const RegionMask& b, unsigned percentile,
                            double spacing = 1.0);
inline double hd95(const RegionMask& a, const RegionMask& b, double spacing = 1.0) {
  return hausdorff_percentile(a, b, 95, spacing);
}

/// Squared Euclidean distance from every pixel to the nearest set pixel of
/// `mask` (two-pass lower-envelope transform). Infinity when the mask is empty.
std::vector<double> squared_distance_transform(const RegionMask& mask);

struct PpvSensitivity {
  double ppv = 0.0;
  double sensitivity = 0.0;
};

/// TP/(TP+FP) and TP/(TP+FN); an empty denominator gives 1 when both masks
/// are empty and 0 otherwise.
PpvSensitivity ppv_sensitivity(const RegionMask& pred, const RegionMask& truth);

struct RegionScores {
  double dice = 0.0;
  double hd95 = 0.0;
  double ppv = 0.0;
  double sensitivity = 0.0;
};

struct CaseMetrics {
  std::string case_id;
  std::array<RegionScores, 3> regions;  // indexed by Region
};

CaseMetrics evaluate_case(const std::string& case_id, const LabelMap& pred, const LabelMap& truth);

struct MetricSummary {
  double mean = 0.0;         // over finite values
  std::size_t finite = 0;
  std::size_t infinite = 0;  // hd95 sentinels, excluded from the mean
};

struct RegionSummary {
  MetricSummary dice, hd95, ppv, sensitivity;
};

struct MetricsReport {
  std::vector<CaseMetrics> cases;
  std::array<RegionSummary, 3> summary;
};

MetricsReport summarize(std::vector<CaseMetrics> cases);

/// Fixed-precision decimal for reports; inf prints as "inf".
std::string format_number(double value);

/// Header `case,region,dice,hd95,ppv,sensitivity`, one row per case and region.
std::string cases_csv(const MetricsReport& report);

}  // namespace rrse
