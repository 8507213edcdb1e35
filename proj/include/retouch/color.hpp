#pragma once

namespace retouch {

/// A CIELAB color. L on the 0..100 scale, a/b unbounded (sRGB stays
/// roughly within +-110).
struct Lab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
  bool operator==(const Lab&) const = default;
};

// sRGB transfer function (IEC 61966-2-1). Scalar double versions are used
// by the metrics/reward path, float versions by the render path.
double srgb_decode(double encoded);
double srgb_encode(double linear);
float srgb_decode_f(float encoded);
float srgb_encode_f(float linear);

/// Linear-light sRGB primaries -> CIELAB under D65.
Lab linear_rgb_to_lab(double r, double g, double b);

/// Nonlinear (display-encoded) sRGB in [0,1] -> CIELAB under D65.
Lab srgb_to_lab(double r, double g, double b);

/// CIEDE2000 color difference with kL = kC = kH = 1.
double ciede2000(const Lab& lhs, const Lab& rhs);

}  // namespace retouch
