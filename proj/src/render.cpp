#include "retouch/render.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "retouch/color.hpp"

namespace retouch {

namespace {

const char* render_errc_name(RenderErrc code) {
  switch (code) {
    case RenderErrc::unsupported_tool: return "UnsupportedTool";
    case RenderErrc::dimension_mismatch: return "DimensionMismatch";
    case RenderErrc::missing_segmentation: return "MissingSegmentation";
    case RenderErrc::bad_curve: return "BadCurve";
    case RenderErrc::timeout: return "Timeout";
  }
  return "?";
}

}  // namespace

RenderError::RenderError(RenderErrc code, const std::string& message)
    : std::runtime_error(std::string(render_errc_name(code)) + ": " + message),
      code_(code) {}

namespace {

[[noreturn]] void fail(RenderErrc code, const std::string& message) {
  throw RenderError(code, message);
}

float smoothstep(float edge0, float edge1, float x) {
  float t = (x - edge0) / (edge1 - edge0);
  t = std::min(1.0f, std::max(0.0f, t));
  return t * t * (3.0f - 2.0f * t);
}

Plane<float> clamp01(const Plane<float>& p) { return p.max(0.0f).min(1.0f); }

void clamp_image(Image& img) {
  img.r = clamp01(img.r);
  img.g = clamp01(img.g);
  img.b = clamp01(img.b);
}

// --- kernels ---------------------------------------------------------------

void exposure_kernel(Image& img, double stops) {
  const float gain = std::exp2(static_cast<float>(stops));
  img.r = clamp01(img.r * gain);
  img.g = clamp01(img.g * gain);
  img.b = clamp01(img.b * gain);
}

void contrast_kernel(Image& img, double value) {
  const float k = 1.0f + static_cast<float>(value) / 100.0f;
  auto remap = [k](float x) {
    const float s = srgb_encode_f(x);
    const float sp = std::min(1.0f, std::max(0.0f, 0.5f + (s - 0.5f) * k));
    return srgb_decode_f(sp);
  };
  img.r = img.r.unaryExpr(remap);
  img.g = img.g.unaryExpr(remap);
  img.b = img.b.unaryExpr(remap);
}

enum class Band { highlights, shadows, whites, blacks };

void band_kernel(Image& img, Band band, double value) {
  const float strength = static_cast<float>(value) / 100.0f;
  const float k = (band == Band::highlights || band == Band::shadows) ? 0.6f : 0.8f;
  Plane<float> t = luminance(img).unaryExpr([](float y) { return srgb_encode_f(y); });
  Plane<float> w;
  switch (band) {
    case Band::highlights:
      w = t.unaryExpr([](float x) { return smoothstep(0.5f, 1.0f, x); });
      break;
    case Band::shadows:
      w = t.unaryExpr([](float x) { return 1.0f - smoothstep(0.0f, 0.5f, x); });
      break;
    case Band::whites:
      w = t.unaryExpr([](float x) { return smoothstep(0.75f, 1.0f, x); });
      break;
    case Band::blacks:
      w = t.unaryExpr([](float x) { return 1.0f - smoothstep(0.0f, 0.25f, x); });
      break;
  }
  Plane<float> gain = 1.0f + (k * strength) * w;
  img.r = clamp01(img.r * gain);
  img.g = clamp01(img.g * gain);
  img.b = clamp01(img.b * gain);
}

void temperature_kernel(Image& img, double value) {
  const float s = static_cast<float>(value) / 100.0f;
  img.r = clamp01(img.r * (1.0f + 0.25f * s));
  img.b = clamp01(img.b * (1.0f - 0.25f * s));
}

void tint_kernel(Image& img, double value) {
  const float s = static_cast<float>(value) / 100.0f;
  img.g = clamp01(img.g * (1.0f - 0.25f * s));
}

void saturation_kernel(Image& img, double value) {
  const float sigma = 1.0f + static_cast<float>(value) / 100.0f;
  Plane<float> y = luminance(img);
  img.r = clamp01(y + (img.r - y) * sigma);
  img.g = clamp01(y + (img.g - y) * sigma);
  img.b = clamp01(y + (img.b - y) * sigma);
}

void vibrance_kernel(Image& img, double value) {
  const float strength = static_cast<float>(value) / 100.0f;
  Plane<float> maxc = img.r.max(img.g).max(img.b);
  Plane<float> minc = img.r.min(img.g).min(img.b);
  Plane<float> sat = (maxc > 1e-8f).select((maxc - minc) / maxc, Plane<float>::Zero(maxc.rows(), maxc.cols()));
  Plane<float> sigma = 1.0f + strength * (1.0f - sat);
  Plane<float> y = luminance(img);
  img.r = clamp01(y + (img.r - y) * sigma);
  img.g = clamp01(y + (img.g - y) * sigma);
  img.b = clamp01(y + (img.b - y) * sigma);
}

// Fritsch-Carlson monotone piecewise-cubic interpolant.
struct Pchip {
  std::vector<float> x, y, m;

  explicit Pchip(const Curve& points) {
    const std::size_t n = points.size();
    x.resize(n);
    y.resize(n);
    m.assign(n, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<float>(points[i].x);
      y[i] = static_cast<float>(points[i].y);
    }
    std::vector<float> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      d[i] = (y[i + 1] - y[i]) / h[i];
    }
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0f) {
        m[i] = 0.0f;
      } else {
        const float w1 = 2.0f * h[i] + h[i - 1];
        const float w2 = h[i] + 2.0f * h[i - 1];
        m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
  }

  float operator()(float v) const {
    if (v <= x.front()) return y.front();
    if (v >= x.back()) return y.back();
    std::size_t hi = 1;
    while (x[hi] < v) ++hi;
    const std::size_t lo = hi - 1;
    const float h = x[hi] - x[lo];
    const float t = (v - x[lo]) / h;
    const float t2 = t * t;
    const float t3 = t2 * t;
    const float h00 = 2.0f * t3 - 3.0f * t2 + 1.0f;
    const float h10 = t3 - 2.0f * t2 + t;
    const float h01 = -2.0f * t3 + 3.0f * t2;
    const float h11 = t3 - t2;
    return h00 * y[lo] + h10 * h * m[lo] + h01 * y[hi] + h11 * h * m[hi];
  }
};

void curve_kernel(Image& img, const Curve& points, int channel) {
  if (points.size() < 2) fail(RenderErrc::bad_curve, "curve needs >= 2 points");
  const Pchip curve(points);
  auto remap = [&curve](float v) {
    const float s = curve(srgb_encode_f(v));
    return srgb_decode_f(std::min(1.0f, std::max(0.0f, s)));
  };
  if (channel < 0) {
    img.r = img.r.unaryExpr(remap);
    img.g = img.g.unaryExpr(remap);
    img.b = img.b.unaryExpr(remap);
  } else {
    auto& plane = img.channel(channel);
    plane = plane.unaryExpr(remap);
  }
}

// --- parameter access -------------------------------------------------------

double scalar_param(const ToolInvocation& tool, const char* key, bool* present) {
  const auto it = tool.params.find(key);
  if (it == tool.params.end()) {
    *present = false;
    return 0.0;
  }
  const double* v = std::get_if<double>(&it->second);
  if (!v)
    fail(RenderErrc::unsupported_tool,
         "parameter '" + std::string(key) + "' of '" + tool.name +
             "' is not a scalar");
  *present = true;
  return *v;
}

const Curve* curve_param(const ToolInvocation& tool, const char* key) {
  const auto it = tool.params.find(key);
  if (it == tool.params.end()) return nullptr;
  const Curve* c = std::get_if<Curve>(&it->second);
  if (!c)
    fail(RenderErrc::unsupported_tool,
         "parameter '" + std::string(key) + "' of '" + tool.name +
             "' is not a curve");
  return c;
}

using ScalarKernel = void (*)(Image&, double);

void run_scalar(Image& img, const ToolInvocation& tool, ScalarKernel kernel) {
  bool present = false;
  const double v = scalar_param(tool, "value", &present);
  if (present && v != 0.0) kernel(img, v);
}

void highlights_kernel(Image& img, double v) { band_kernel(img, Band::highlights, v); }
void shadows_kernel(Image& img, double v) { band_kernel(img, Band::shadows, v); }
void whites_kernel(Image& img, double v) { band_kernel(img, Band::whites, v); }
void blacks_kernel(Image& img, double v) { band_kernel(img, Band::blacks, v); }

struct LocalParam {
  const char* name;
  ScalarKernel kernel;
};

// Application order of the scalar parameters on masked tools.
constexpr LocalParam kLocalParams[] = {
    {"temperature", temperature_kernel},
    {"tint", tint_kernel},
    {"exposure", exposure_kernel},
    {"contrast", contrast_kernel},
    {"highlights", highlights_kernel},
    {"shadows", shadows_kernel},
    {"whites", whites_kernel},
    {"blacks", blacks_kernel},
    {"saturation", saturation_kernel},
};

const std::set<std::string>& mask_tool_names() {
  static const std::set<std::string> kNames = {
      "LinearGradient",    "RadialGradient", "ObjectMask",
      "PortraitMask",      "ColorRangeMask", "LuminanceRangeMask",
  };
  return kNames;
}

void apply_local_params(Image& img, const ToolInvocation& tool) {
  std::set<std::string> known;
  for (const LocalParam& p : kLocalParams) known.insert(p.name);
  for (const auto& [key, value] : tool.params) {
    if (!known.count(key))
      fail(RenderErrc::unsupported_tool,
           "no render semantics for parameter '" + key + "' of '" + tool.name + "'");
  }
  for (const LocalParam& p : kLocalParams) {
    bool present = false;
    const double v = scalar_param(tool, p.name, &present);
    if (present && v != 0.0) p.kernel(img, v);
  }
}

}  // namespace

bool render_supported(const std::string& tool_name) {
  static const std::set<std::string> kGlobals = {
      "Exposure", "Contrast",  "Highlights",   "Shadows",       "Whites",
      "Blacks",   "Temperature", "Tint",       "Saturation",    "Vibrance",
      "ToneCurve", "ToneCurveRed", "ToneCurveGreen", "ToneCurveBlue",
  };
  return kGlobals.count(tool_name) > 0 || mask_tool_names().count(tool_name) > 0;
}

Image apply_global(const Image& img, const ToolInvocation& tool) {
  Image out = img;
  const std::string& n = tool.name;
  if (n == "Exposure") {
    run_scalar(out, tool, exposure_kernel);
  } else if (n == "Contrast") {
    run_scalar(out, tool, contrast_kernel);
  } else if (n == "Highlights") {
    run_scalar(out, tool, highlights_kernel);
  } else if (n == "Shadows") {
    run_scalar(out, tool, shadows_kernel);
  } else if (n == "Whites") {
    run_scalar(out, tool, whites_kernel);
  } else if (n == "Blacks") {
    run_scalar(out, tool, blacks_kernel);
  } else if (n == "Temperature") {
    run_scalar(out, tool, temperature_kernel);
  } else if (n == "Tint") {
    run_scalar(out, tool, tint_kernel);
  } else if (n == "Saturation") {
    run_scalar(out, tool, saturation_kernel);
  } else if (n == "Vibrance") {
    run_scalar(out, tool, vibrance_kernel);
  } else if (n == "ToneCurve") {
    if (const Curve* c = curve_param(tool, "points")) curve_kernel(out, *c, -1);
  } else if (n == "ToneCurveRed") {
    if (const Curve* c = curve_param(tool, "points")) curve_kernel(out, *c, 0);
  } else if (n == "ToneCurveGreen") {
    if (const Curve* c = curve_param(tool, "points")) curve_kernel(out, *c, 1);
  } else if (n == "ToneCurveBlue") {
    if (const Curve* c = curve_param(tool, "points")) curve_kernel(out, *c, 2);
  } else if (mask_tool_names().count(n)) {
    apply_local_params(out, tool);
  } else {
    fail(RenderErrc::unsupported_tool, "no render semantics for '" + n + "'");
  }
  return out;
}

MaskBuffer rasterize_mask(const MaskSpec& spec, Eigen::Index height,
                          Eigen::Index width, const Image& img,
                          const RenderOptions& options) {
  MaskBuffer mask(height, width);

  auto px = [width](Eigen::Index col) {
    return (static_cast<float>(col) + 0.5f) / static_cast<float>(width);
  };
  auto py = [height](Eigen::Index row) {
    return (static_cast<float>(row) + 0.5f) / static_cast<float>(height);
  };

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMask>) {
          const float dx = static_cast<float>(m.end.x - m.start.x);
          const float dy = static_cast<float>(m.end.y - m.start.y);
          const float len2 = dx * dx + dy * dy;
          if (len2 < 1e-12f) {
            mask.setOnes();
            return;
          }
          for (Eigen::Index r = 0; r < height; ++r)
            for (Eigen::Index c = 0; c < width; ++c) {
              const float t = ((px(c) - static_cast<float>(m.start.x)) * dx +
                               (py(r) - static_cast<float>(m.start.y)) * dy) /
                              len2;
              mask(r, c) = std::min(1.0f, std::max(0.0f, 1.0f - t));
            }
        } else if constexpr (std::is_same_v<T, RadialMask>) {
          const float rad =
              static_cast<float>(m.angle) * (3.14159265358979323846f / 180.0f);
          const float ca = std::cos(rad);
          const float sa = std::sin(rad);
          const float ax = static_cast<float>(m.width) * 0.5f;
          const float ay = static_cast<float>(m.height) * 0.5f;
          for (Eigen::Index r = 0; r < height; ++r)
            for (Eigen::Index c = 0; c < width; ++c) {
              const float dx = px(c) - static_cast<float>(m.center.x);
              const float dy = py(r) - static_cast<float>(m.center.y);
              const float u = (ca * dx + sa * dy) / ax;
              const float v = (-sa * dx + ca * dy) / ay;
              const float rho = std::sqrt(u * u + v * v);
              mask(r, c) = std::min(1.0f, std::max(0.0f, 1.0f - rho));
            }
        } else if constexpr (std::is_same_v<T, ObjectMask>) {
          for (Eigen::Index r = 0; r < height; ++r)
            for (Eigen::Index c = 0; c < width; ++c) {
              const bool inside = px(c) >= m.x1 && px(c) <= m.x2 &&
                                  py(r) >= m.y1 && py(r) <= m.y2;
              mask(r, c) = inside ? 1.0f : 0.0f;
            }
        } else if constexpr (std::is_same_v<T, PortraitMask>) {
          if (!options.segmentation)
            fail(RenderErrc::missing_segmentation,
                 "portrait mask needs a segmentation side-file");
          const Segmentation& seg = *options.segmentation;
          if (seg.rows() != height || seg.cols() != width)
            fail(RenderErrc::dimension_mismatch,
                 "segmentation size does not match the image");
          mask = (seg == static_cast<std::uint8_t>(m.category_id)).cast<float>();
        } else if constexpr (std::is_same_v<T, ColorRangeMask>) {
          if (img.height() != height || img.width() != width)
            fail(RenderErrc::dimension_mismatch,
                 "color-range mask needs matching image content");
          const double tau = options.color_tolerance;
          for (Eigen::Index r = 0; r < height; ++r)
            for (Eigen::Index c = 0; c < width; ++c) {
              const Lab pixel = linear_rgb_to_lab(img.r(r, c), img.g(r, c), img.b(r, c));
              double w = 0.0;
              for (const Lab& s : m.samples)
                w = std::max(w, std::max(0.0, 1.0 - ciede2000(pixel, s) / tau));
              mask(r, c) = static_cast<float>(w);
            }
        } else if constexpr (std::is_same_v<T, LuminanceRangeMask>) {
          if (img.height() != height || img.width() != width)
            fail(RenderErrc::dimension_mismatch,
                 "luminance-range mask needs matching image content");
          const float lo = static_cast<float>(m.l_min);
          const float hi = static_cast<float>(m.l_max);
          const float feather = static_cast<float>(options.luminance_feather);
          Plane<float> y = luminance(img);
          mask = y.unaryExpr([lo, hi, feather](float v) {
            if (v >= lo && v <= hi) return 1.0f;
            if (feather <= 0.0f) return 0.0f;
            const float d = v < lo ? lo - v : v - hi;
            return std::max(0.0f, 1.0f - d / feather);
          });
        }
      },
      spec);
  return mask;
}

Image apply_local(const Image& img, const ToolInvocation& tool,
                  const MaskBuffer& mask) {
  if (mask.rows() != img.height() || mask.cols() != img.width())
    fail(RenderErrc::dimension_mismatch, "mask size does not match the image");
  ToolInvocation unmasked = tool;
  unmasked.mask.reset();
  const Image edited = apply_global(img, unmasked);
  Image out(img.height(), img.width());
  out.r = (1.0f - mask) * img.r + mask * edited.r;
  out.g = (1.0f - mask) * img.g + mask * edited.g;
  out.b = (1.0f - mask) * img.b + mask * edited.b;
  clamp_image(out);
  return out;
}

Image apply_roc(const Image& img, const RocDocument& doc,
                const RenderOptions& options) {
  Image out = img;
  for (const ToolInvocation& tool : doc.tools) {
    if (options.deadline &&
        std::chrono::steady_clock::now() > *options.deadline)
      fail(RenderErrc::timeout, "render exceeded its deadline");
    if (tool.mask) {
      const MaskBuffer mask =
          rasterize_mask(*tool.mask, out.height(), out.width(), out, options);
      out = apply_local(out, tool, mask);
    } else {
      out = apply_global(out, tool);
    }
  }
  return out;
}

}  // namespace retouch
