#pragma once

#include <stdexcept>

#include "retouch/image.hpp"

namespace retouch {

class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& message);
};

/// Mean over pixels and channels of |a-b|, on the [0,1] sample scale.
double l1_distance(const Image& a, const Image& b);

/// Mean over pixels and channels of (a-b)^2.
double l2_distance(const Image& a, const Image& b);

/// Mean of w*|a-b| with per-pixel weight 1 where the region mask is >= 0.5
/// and alpha elsewhere. alpha in [0,1]; alpha = 1 degenerates to l1_distance.
double region_weighted_l1(const Image& a, const Image& b,
                          const MaskBuffer& region, double alpha = 0.5);

/// Mean of w*(a-b)^2 with the same weighting matrix.
double region_weighted_l2(const Image& a, const Image& b,
                          const MaskBuffer& region, double alpha = 0.5);

/// Per-channel CIELAB histogram intersection averaged over the three
/// channels: 32 bins per channel, L over [0,100], a and b over [-128,128].
/// 1 for identical color distributions, 0 for disjoint ones.
double color_distribution_similarity(const Image& a, const Image& b);

/// The pixel-fidelity term of the perceptual-quality reward:
/// 1 - l1_distance(a, b).
double pixel_fidelity(const Image& a, const Image& b);

}  // namespace retouch
