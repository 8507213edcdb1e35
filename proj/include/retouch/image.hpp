#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace retouch {

template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// H x W x 3 planar raster. Samples are linear-light sRGB primaries in
/// [0,1]; every operation that produces an image clamps back into range.
template <typename Scalar>
struct PlanarImage {
  Plane<Scalar> r, g, b;

  PlanarImage() = default;
  PlanarImage(Eigen::Index height, Eigen::Index width)
      : r(Plane<Scalar>::Zero(height, width)),
        g(Plane<Scalar>::Zero(height, width)),
        b(Plane<Scalar>::Zero(height, width)) {}

  static PlanarImage constant(Eigen::Index height, Eigen::Index width,
                              Scalar rv, Scalar gv, Scalar bv) {
    PlanarImage img;
    img.r = Plane<Scalar>::Constant(height, width, rv);
    img.g = Plane<Scalar>::Constant(height, width, gv);
    img.b = Plane<Scalar>::Constant(height, width, bv);
    return img;
  }

  Eigen::Index height() const { return r.rows(); }
  Eigen::Index width() const { return r.cols(); }
  Eigen::Index pixels() const { return r.size(); }

  Plane<Scalar>& channel(int i) { return i == 0 ? r : (i == 1 ? g : b); }
  const Plane<Scalar>& channel(int i) const {
    return i == 0 ? r : (i == 1 ? g : b);
  }

  bool same_shape(const PlanarImage& other) const {
    return height() == other.height() && width() == other.width();
  }

  /// Bitwise equality, used by determinism and locality tests.
  bool equals(const PlanarImage& other) const {
    return same_shape(other) && (r == other.r).all() && (g == other.g).all() &&
           (b == other.b).all();
  }
};

using Image = PlanarImage<float>;

/// Per-pixel blend weights in [0,1].
using MaskBuffer = Plane<float>;

/// Per-pixel category ids from a segmentation side-file.
using Segmentation = Plane<std::uint8_t>;

/// Rec.709 relative luminance of linear-light RGB.
template <typename Scalar>
Plane<Scalar> luminance(const PlanarImage<Scalar>& img) {
  return Scalar(0.2126729) * img.r + Scalar(0.7151522) * img.g +
         Scalar(0.0721750) * img.b;
}

template <typename Scalar>
Scalar luminance(Scalar r, Scalar g, Scalar b) {
  return Scalar(0.2126729) * r + Scalar(0.7151522) * g + Scalar(0.0721750) * b;
}

}  // namespace retouch
