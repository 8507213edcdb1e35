#include "retouch/color.hpp"

#include <cmath>

namespace retouch {

double srgb_decode(double encoded) {
  if (encoded <= 0.04045) return encoded / 12.92;
  return std::pow((encoded + 0.055) / 1.055, 2.4);
}

double srgb_encode(double linear) {
  if (linear <= 0.0031308) return linear * 12.92;
  return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

float srgb_decode_f(float encoded) {
  if (encoded <= 0.04045f) return encoded / 12.92f;
  return std::pow((encoded + 0.055f) / 1.055f, 2.4f);
}

float srgb_encode_f(float linear) {
  if (linear <= 0.0031308f) return linear * 12.92f;
  return 1.055f * std::pow(linear, 1.0f / 2.4f) - 0.055f;
}

namespace {

// CIE standard f(t) for the XYZ -> Lab mapping.
double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  if (t > delta * delta * delta) return std::cbrt(t);
  return t / (3.0 * delta * delta) + 4.0 / 29.0;
}

constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;

}  // namespace

Lab linear_rgb_to_lab(double r, double g, double b) {
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);
  return Lab{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Lab srgb_to_lab(double r, double g, double b) {
  return linear_rgb_to_lab(srgb_decode(r), srgb_decode(g), srgb_decode(b));
}

double ciede2000(const Lab& lhs, const Lab& rhs) {
  constexpr double kPi = 3.14159265358979323846;
  const double deg2rad = kPi / 180.0;
  const double pow25_7 = 6103515625.0;  // 25^7

  const double c1 = std::hypot(lhs.a, lhs.b);
  const double c2 = std::hypot(rhs.a, rhs.b);
  const double c_bar = (c1 + c2) / 2.0;

  const double c_bar7 = std::pow(c_bar, 7.0);
  const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + pow25_7)));

  const double a1p = (1.0 + g) * lhs.a;
  const double a2p = (1.0 + g) * rhs.a;
  const double c1p = std::hypot(a1p, lhs.b);
  const double c2p = std::hypot(a2p, rhs.b);

  auto hue_angle = [&](double ap, double b) {
    if (ap == 0.0 && b == 0.0) return 0.0;
    double h = std::atan2(b, ap);
    if (h < 0.0) h += 2.0 * kPi;
    return h;
  };
  const double h1p = hue_angle(a1p, lhs.b);
  const double h2p = hue_angle(a2p, rhs.b);

  const double dlp = rhs.l - lhs.l;
  const double dcp = c2p - c1p;

  double dhp = 0.0;
  if (c1p * c2p != 0.0) {
    dhp = h2p - h1p;
    if (dhp > kPi) dhp -= 2.0 * kPi;
    else if (dhp < -kPi) dhp += 2.0 * kPi;
  }
  const double dHp = 2.0 * std::sqrt(c1p * c2p) * std::sin(dhp / 2.0);

  const double l_bar = (lhs.l + rhs.l) / 2.0;
  const double cp_bar = (c1p + c2p) / 2.0;

  double hp_bar = h1p + h2p;
  if (c1p * c2p != 0.0) {
    if (std::fabs(h1p - h2p) <= kPi) {
      hp_bar = (h1p + h2p) / 2.0;
    } else if (h1p + h2p < 2.0 * kPi) {
      hp_bar = (h1p + h2p + 2.0 * kPi) / 2.0;
    } else {
      hp_bar = (h1p + h2p - 2.0 * kPi) / 2.0;
    }
  }

  const double t = 1.0 - 0.17 * std::cos(hp_bar - 30.0 * deg2rad) +
                   0.24 * std::cos(2.0 * hp_bar) +
                   0.32 * std::cos(3.0 * hp_bar + 6.0 * deg2rad) -
                   0.20 * std::cos(4.0 * hp_bar - 63.0 * deg2rad);

  const double dtheta =
      30.0 * deg2rad *
      std::exp(-std::pow((hp_bar - 275.0 * deg2rad) / (25.0 * deg2rad), 2.0));

  const double cp_bar7 = std::pow(cp_bar, 7.0);
  const double rc = 2.0 * std::sqrt(cp_bar7 / (cp_bar7 + pow25_7));

  const double l50 = (l_bar - 50.0) * (l_bar - 50.0);
  const double sl = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
  const double sc = 1.0 + 0.045 * cp_bar;
  const double sh = 1.0 + 0.015 * cp_bar * t;
  const double rt = -std::sin(2.0 * dtheta) * rc;

  const double vl = dlp / sl;
  const double vc = dcp / sc;
  const double vh = dHp / sh;
  return std::sqrt(vl * vl + vc * vc + vh * vh + rt * vc * vh);
}

}  // namespace retouch
