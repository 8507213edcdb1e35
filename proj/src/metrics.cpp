#include "retouch/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "retouch/color.hpp"

namespace retouch {

MetricError::MetricError(const std::string& message)
    : std::runtime_error("DimensionMismatch: " + message) {}

namespace {

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b))
    throw MetricError("images are " + std::to_string(a.height()) + "x" +
                      std::to_string(a.width()) + " vs " +
                      std::to_string(b.height()) + "x" +
                      std::to_string(b.width()));
}

// Shared accumulation so that alpha = 1 weighting is bit-identical to the
// unweighted metric.
template <typename Weight, typename Term>
double mean_over_samples(const Image& a, const Image& b, Weight weight,
                         Term term) {
  double sum = 0.0;
  for (Eigen::Index r = 0; r < a.height(); ++r)
    for (Eigen::Index c = 0; c < a.width(); ++c) {
      const double w = weight(r, c);
      sum += w * term(static_cast<double>(a.r(r, c)), static_cast<double>(b.r(r, c)));
      sum += w * term(static_cast<double>(a.g(r, c)), static_cast<double>(b.g(r, c)));
      sum += w * term(static_cast<double>(a.b(r, c)), static_cast<double>(b.b(r, c)));
    }
  return sum / (static_cast<double>(a.pixels()) * 3.0);
}

double abs_diff(double x, double y) { return std::fabs(x - y); }
double sq_diff(double x, double y) { return (x - y) * (x - y); }

void require_region(const Image& a, const MaskBuffer& region, double alpha) {
  if (region.rows() != a.height() || region.cols() != a.width())
    throw MetricError("region mask size does not match the images");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw MetricError("alpha outside [0,1]");
}

}  // namespace

double l1_distance(const Image& a, const Image& b) {
  require_same_shape(a, b);
  return mean_over_samples(a, b, [](Eigen::Index, Eigen::Index) { return 1.0; },
                           abs_diff);
}

double l2_distance(const Image& a, const Image& b) {
  require_same_shape(a, b);
  return mean_over_samples(a, b, [](Eigen::Index, Eigen::Index) { return 1.0; },
                           sq_diff);
}

double region_weighted_l1(const Image& a, const Image& b,
                          const MaskBuffer& region, double alpha) {
  require_same_shape(a, b);
  require_region(a, region, alpha);
  return mean_over_samples(
      a, b,
      [&](Eigen::Index r, Eigen::Index c) {
        return region(r, c) >= 0.5f ? 1.0 : alpha;
      },
      abs_diff);
}

double region_weighted_l2(const Image& a, const Image& b,
                          const MaskBuffer& region, double alpha) {
  require_same_shape(a, b);
  require_region(a, region, alpha);
  return mean_over_samples(
      a, b,
      [&](Eigen::Index r, Eigen::Index c) {
        return region(r, c) >= 0.5f ? 1.0 : alpha;
      },
      sq_diff);
}

namespace {

constexpr int kBins = 32;

struct LabHistograms {
  std::array<std::int64_t, kBins> l{}, a{}, b{};
};

int bin_of(double value, double lo, double hi) {
  const double t = (value - lo) / (hi - lo);
  const int bin = static_cast<int>(t * kBins);
  return std::min(kBins - 1, std::max(0, bin));
}

LabHistograms lab_histograms(const Image& img) {
  LabHistograms h;
  for (Eigen::Index r = 0; r < img.height(); ++r)
    for (Eigen::Index c = 0; c < img.width(); ++c) {
      const Lab lab = linear_rgb_to_lab(img.r(r, c), img.g(r, c), img.b(r, c));
      ++h.l[bin_of(lab.l, 0.0, 100.0)];
      ++h.a[bin_of(lab.a, -128.0, 128.0)];
      ++h.b[bin_of(lab.b, -128.0, 128.0)];
    }
  return h;
}

// Intersection over raw counts, divided once by the pixel count, so that
// identical histograms score exactly 1.
double intersection(const std::array<std::int64_t, kBins>& p,
                    const std::array<std::int64_t, kBins>& q,
                    std::int64_t total) {
  std::int64_t sum = 0;
  for (int i = 0; i < kBins; ++i) sum += std::min(p[i], q[i]);
  return static_cast<double>(sum) / static_cast<double>(total);
}

}  // namespace

double color_distribution_similarity(const Image& a, const Image& b) {
  require_same_shape(a, b);
  const LabHistograms ha = lab_histograms(a);
  const LabHistograms hb = lab_histograms(b);
  const std::int64_t total = static_cast<std::int64_t>(a.pixels());
  return (intersection(ha.l, hb.l, total) + intersection(ha.a, hb.a, total) +
          intersection(ha.b, hb.b, total)) /
         3.0;
}

double pixel_fidelity(const Image& a, const Image& b) {
  return 1.0 - l1_distance(a, b);
}

}  // namespace retouch
