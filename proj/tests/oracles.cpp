#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <thread>
#include <vector>

#include "retouch/a2l/server.hpp"
#include "retouch/a2l/transport.hpp"
#include "retouch/color.hpp"
#include "retouch/png_io.hpp"

namespace oracles {

using namespace retouch;

std::string source_dir() { return RETOUCH_SOURCE_DIR; }
std::string data_dir() { return source_dir() + "/tests/data"; }
std::string data_path(const std::string& name) { return data_dir() + "/" + name; }

ToolCatalog shipped_catalog() {
  return load_catalog_file(source_dir() + "/data/catalog.json");
}

ToolCatalog toy_catalog() {
  return load_catalog(R"({
    "tools": [
      {"name": "Exposure", "params": [{"name": "value", "kind": "scalar", "min": -100.0, "max": 100.0}]},
      {"name": "Contrast", "params": [{"name": "value", "kind": "scalar", "min": -100.0, "max": 100.0}]},
      {"name": "Saturation", "params": [{"name": "value", "kind": "scalar", "min": -100.0, "max": 100.0}]}
    ]
  })");
}

// ---------------------------------------------------------------------------
// Brute-force reward evaluation
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> keys_of(const ToolInvocation& tool) {
  std::vector<std::string> keys;
  for (const auto& kv : tool.params) keys.push_back(kv.first);
  if (tool.mask.has_value()) keys.push_back("mask");
  return keys;
}

bool contains(const std::vector<std::string>& keys, const std::string& k) {
  return std::find(keys.begin(), keys.end(), k) != keys.end();
}

double piecewise_linear(const Curve& curve, double x) {
  if (x <= curve.front().x) return curve.front().y;
  if (x >= curve.back().x) return curve.back().y;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].x >= x) {
      const double t = (x - curve[i - 1].x) / (curve[i].x - curve[i - 1].x);
      return curve[i - 1].y + t * (curve[i].y - curve[i - 1].y);
    }
  }
  return curve.back().y;
}

double similarity_of_masks(const MaskSpec& pre, const MaskSpec& tgt,
                           const CatalogDefaults& defaults) {
  if (pre.index() != tgt.index()) return 0.0;
  if (const auto* t = std::get_if<LinearMask>(&tgt)) {
    const auto& p = std::get<LinearMask>(pre);
    const double ds = std::sqrt(std::pow(p.start.x - t->start.x, 2) +
                                std::pow(p.start.y - t->start.y, 2));
    const double de = std::sqrt(std::pow(p.end.x - t->end.x, 2) +
                                std::pow(p.end.y - t->end.y, 2));
    return std::max(0.0, 1.0 - ds - de);
  }
  if (const auto* t = std::get_if<RadialMask>(&tgt)) {
    const auto& p = std::get<RadialMask>(pre);
    const double dc = std::sqrt(std::pow(p.center.x - t->center.x, 2) +
                                std::pow(p.center.y - t->center.y, 2));
    const double sc = std::max(0.0, 1.0 - 2.0 * dc);
    const double ss = std::max(0.0, 1.0 - std::fabs(p.width / t->width - 1.0) -
                                        std::fabs(p.height / t->height - 1.0));
    const double sa =
        std::max(0.0, 1.0 - std::fabs(p.angle - t->angle) /
                                (defaults.angle_max - defaults.angle_min));
    return 0.4 * sc + 0.4 * ss + 0.2 * sa;
  }
  if (const auto* t = std::get_if<ObjectMask>(&tgt)) {
    const auto& p = std::get<ObjectMask>(pre);
    const double w = std::min(p.x2, t->x2) - std::max(p.x1, t->x1);
    const double h = std::min(p.y2, t->y2) - std::max(p.y1, t->y1);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    const double inter = w * h;
    const double uni = (p.x2 - p.x1) * (p.y2 - p.y1) +
                       (t->x2 - t->x1) * (t->y2 - t->y1) - inter;
    return inter / uni;
  }
  if (const auto* t = std::get_if<PortraitMask>(&tgt)) {
    return std::get<PortraitMask>(pre).category_id == t->category_id ? 1.0 : 0.0;
  }
  if (const auto* t = std::get_if<ColorRangeMask>(&tgt)) {
    const auto& p = std::get<ColorRangeMask>(pre);
    double acc = 0.0;
    for (std::size_t i = 0; i < t->samples.size(); ++i)
      acc += ciede2000(p.samples[i], t->samples[i]) / 100.0;
    return std::max(0.0, 1.0 - acc / static_cast<double>(t->samples.size()));
  }
  const auto& t = std::get<LuminanceRangeMask>(tgt);
  const auto& p = std::get<LuminanceRangeMask>(pre);
  return std::max(0.0, 1.0 - (std::fabs(p.l_min - t.l_min) +
                              std::fabs(p.l_max - t.l_max)) /
                                 (2.0 * (t.l_max - t.l_min)));
}

double similarity_of_values(const std::string& key, const ToolInvocation& pre,
                            const ToolInvocation& tgt,
                            const ToolCatalog& catalog) {
  if (key == "mask")
    return similarity_of_masks(*pre.mask, *tgt.mask, catalog.defaults);
  const ParamValue& pv = pre.params.at(key);
  const ParamValue& tv = tgt.params.at(key);
  if (const auto* tn = std::get_if<double>(&tv)) {
    const auto& schema = catalog.entries.at(tgt.name).params.at(key);
    return std::max(0.0, 1.0 - std::fabs(std::get<double>(pv) - *tn) /
                                   (schema.max - schema.min));
  }
  if (const auto* ts = std::get_if<std::string>(&tv))
    return std::get<std::string>(pv) == *ts ? 1.0 : 0.0;
  const Curve& tc = std::get<Curve>(tv);
  const Curve& pc = std::get<Curve>(pv);
  double acc = 0.0;
  for (int i = 0; i <= 16; ++i) {
    const double x = i / 16.0;
    acc += std::fabs(piecewise_linear(pc, x) - piecewise_linear(tc, x));
  }
  return std::max(0.0, 1.0 - acc / 17.0);
}

}  // namespace

double bruteforce_roa(const RocDocument& pred, const RocDocument& tgt,
                      const ToolCatalog& catalog) {
  // Tool-name Jaccard.
  std::set<std::string> pn, tn;
  for (const auto& t : pred.tools) pn.insert(t.name);
  for (const auto& t : tgt.tools) tn.insert(t.name);
  std::set<std::string> inter, uni;
  for (const auto& n : pn)
    if (tn.count(n)) inter.insert(n);
  uni = pn;
  uni.insert(tn.begin(), tn.end());
  const double r_name =
      static_cast<double>(inter.size()) / static_cast<double>(uni.size());

  // Parameter-name Jaccard over all pairs; only name-matched pairs overlap.
  double r_param = 0.0;
  for (const auto& t : tgt.tools)
    for (const auto& p : pred.tools) {
      if (p.name != t.name) continue;
      const auto pk = keys_of(p);
      const auto tk = keys_of(t);
      if (pk.empty() && tk.empty()) {
        r_param += 1.0;
        continue;
      }
      int shared = 0;
      for (const auto& k : pk)
        if (contains(tk, k)) ++shared;
      r_param += static_cast<double>(shared) /
                 static_cast<double>(pk.size() + tk.size() - shared);
    }

  // Parameter-value similarity over target keys.
  double r_value = 0.0;
  std::size_t total_keys = 0;
  for (const auto& t : tgt.tools) {
    const auto tk = keys_of(t);
    total_keys += tk.size();
    for (const auto& p : pred.tools) {
      if (p.name != t.name) continue;
      for (const auto& k : tk) {
        if (!contains(keys_of(p), k)) continue;  // absent key scores 0
        r_value += similarity_of_values(k, p, t, catalog);
      }
    }
  }

  double third;
  if (total_keys > 0) {
    third = r_value / static_cast<double>(total_keys);
  } else {
    third = 1.0;
    for (const auto& t : tgt.tools)
      for (const auto& p : pred.tools)
        if (p.name == t.name && !keys_of(p).empty()) third = 0.0;
  }
  return (r_name + r_param / static_cast<double>(tgt.tools.size()) + third) / 3.0;
}

// ---------------------------------------------------------------------------
// Naive reference renderer
// ---------------------------------------------------------------------------

namespace {

float clampf(float v) { return std::min(1.0f, std::max(0.0f, v)); }

float encode_f(float linear) {
  if (linear <= 0.0031308f) return linear * 12.92f;
  return 1.055f * std::pow(linear, 1.0f / 2.4f) - 0.055f;
}

float decode_f(float encoded) {
  if (encoded <= 0.04045f) return encoded / 12.92f;
  return std::pow((encoded + 0.055f) / 1.055f, 2.4f);
}

float sstep(float e0, float e1, float x) {
  float t = (x - e0) / (e1 - e0);
  t = std::min(1.0f, std::max(0.0f, t));
  return t * t * (3.0f - 2.0f * t);
}

float luma_f(float r, float g, float b) {
  return 0.2126729f * r + 0.7151522f * g + 0.0721750f * b;
}

struct Px {
  float r, g, b;
};

void px_exposure(Px& p, double stops) {
  const float gain = std::exp2(static_cast<float>(stops));
  p.r = clampf(p.r * gain);
  p.g = clampf(p.g * gain);
  p.b = clampf(p.b * gain);
}

void px_contrast(Px& p, double value) {
  const float k = 1.0f + static_cast<float>(value) / 100.0f;
  auto remap = [k](float x) {
    const float s = encode_f(x);
    const float sp = std::min(1.0f, std::max(0.0f, 0.5f + (s - 0.5f) * k));
    return decode_f(sp);
  };
  p.r = remap(p.r);
  p.g = remap(p.g);
  p.b = remap(p.b);
}

void px_band(Px& p, int band, double value) {
  const float strength = static_cast<float>(value) / 100.0f;
  const float k = (band == 0 || band == 1) ? 0.6f : 0.8f;
  const float t = encode_f(luma_f(p.r, p.g, p.b));
  float w = 0.0f;
  if (band == 0) w = sstep(0.5f, 1.0f, t);                  // highlights
  else if (band == 1) w = 1.0f - sstep(0.0f, 0.5f, t);      // shadows
  else if (band == 2) w = sstep(0.75f, 1.0f, t);            // whites
  else w = 1.0f - sstep(0.0f, 0.25f, t);                    // blacks
  const float gain = 1.0f + (k * strength) * w;
  p.r = clampf(p.r * gain);
  p.g = clampf(p.g * gain);
  p.b = clampf(p.b * gain);
}

void px_temperature(Px& p, double value) {
  const float s = static_cast<float>(value) / 100.0f;
  p.r = clampf(p.r * (1.0f + 0.25f * s));
  p.b = clampf(p.b * (1.0f - 0.25f * s));
}

void px_tint(Px& p, double value) {
  const float s = static_cast<float>(value) / 100.0f;
  p.g = clampf(p.g * (1.0f - 0.25f * s));
}

void px_saturation(Px& p, double value) {
  const float sigma = 1.0f + static_cast<float>(value) / 100.0f;
  const float y = luma_f(p.r, p.g, p.b);
  p.r = clampf(y + (p.r - y) * sigma);
  p.g = clampf(y + (p.g - y) * sigma);
  p.b = clampf(y + (p.b - y) * sigma);
}

void px_vibrance(Px& p, double value) {
  const float strength = static_cast<float>(value) / 100.0f;
  const float maxc = std::max(std::max(p.r, p.g), p.b);
  const float minc = std::min(std::min(p.r, p.g), p.b);
  const float sat = maxc > 1e-8f ? (maxc - minc) / maxc : 0.0f;
  const float sigma = 1.0f + strength * (1.0f - sat);
  const float y = luma_f(p.r, p.g, p.b);
  p.r = clampf(y + (p.r - y) * sigma);
  p.g = clampf(y + (p.g - y) * sigma);
  p.b = clampf(y + (p.b - y) * sigma);
}

// Fritsch-Carlson tangents, mirrored from the documented construction.
struct NaiveCurve {
  std::vector<float> x, y, m;
  explicit NaiveCurve(const Curve& pts) {
    const std::size_t n = pts.size();
    x.resize(n);
    y.resize(n);
    m.assign(n, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<float>(pts[i].x);
      y[i] = static_cast<float>(pts[i].y);
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
    const float hh = x[hi] - x[lo];
    const float t = (v - x[lo]) / hh;
    const float t2 = t * t;
    const float t3 = t2 * t;
    const float b00 = 2.0f * t3 - 3.0f * t2 + 1.0f;
    const float b10 = t3 - 2.0f * t2 + t;
    const float b01 = -2.0f * t3 + 3.0f * t2;
    const float b11 = t3 - t2;
    return b00 * y[lo] + b10 * hh * m[lo] + b01 * y[hi] + b11 * hh * m[hi];
  }
};

void px_curve(Px& p, const NaiveCurve& curve, int channel) {
  auto remap = [&curve](float v) {
    const float s = curve(encode_f(v));
    return decode_f(std::min(1.0f, std::max(0.0f, s)));
  };
  if (channel < 0) {
    p.r = remap(p.r);
    p.g = remap(p.g);
    p.b = remap(p.b);
  } else if (channel == 0) {
    p.r = remap(p.r);
  } else if (channel == 1) {
    p.g = remap(p.g);
  } else {
    p.b = remap(p.b);
  }
}

double get_scalar(const ToolInvocation& tool, const char* key, bool* present) {
  const auto it = tool.params.find(key);
  if (it == tool.params.end()) {
    *present = false;
    return 0.0;
  }
  *present = true;
  return std::get<double>(it->second);
}

void apply_tool_to_pixel(Px& p, const ToolInvocation& tool) {
  bool has = false;
  const std::string& n = tool.name;
  if (n == "Exposure") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_exposure(p, v);
  } else if (n == "Contrast") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_contrast(p, v);
  } else if (n == "Highlights") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_band(p, 0, v);
  } else if (n == "Shadows") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_band(p, 1, v);
  } else if (n == "Whites") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_band(p, 2, v);
  } else if (n == "Blacks") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_band(p, 3, v);
  } else if (n == "Temperature") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_temperature(p, v);
  } else if (n == "Tint") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_tint(p, v);
  } else if (n == "Saturation") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_saturation(p, v);
  } else if (n == "Vibrance") {
    const double v = get_scalar(tool, "value", &has);
    if (has && v != 0.0) px_vibrance(p, v);
  } else if (n == "ToneCurve" || n == "ToneCurveRed" || n == "ToneCurveGreen" ||
             n == "ToneCurveBlue") {
    const auto it = tool.params.find("points");
    if (it != tool.params.end()) {
      const NaiveCurve curve(std::get<Curve>(it->second));
      const int channel = n == "ToneCurve" ? -1
                          : n == "ToneCurveRed" ? 0
                          : n == "ToneCurveGreen" ? 1 : 2;
      px_curve(p, curve, channel);
    }
  } else {
    // Masked tools: fixed parameter order.
    static const char* kOrder[] = {"temperature", "tint",    "exposure",
                                   "contrast",    "highlights", "shadows",
                                   "whites",      "blacks",  "saturation"};
    for (const char* key : kOrder) {
      const double v = get_scalar(tool, key, &has);
      if (!has || v == 0.0) continue;
      if (key == std::string("temperature")) px_temperature(p, v);
      else if (key == std::string("tint")) px_tint(p, v);
      else if (key == std::string("exposure")) px_exposure(p, v);
      else if (key == std::string("contrast")) px_contrast(p, v);
      else if (key == std::string("highlights")) px_band(p, 0, v);
      else if (key == std::string("shadows")) px_band(p, 1, v);
      else if (key == std::string("whites")) px_band(p, 2, v);
      else if (key == std::string("blacks")) px_band(p, 3, v);
      else px_saturation(p, v);
    }
  }
}

float mask_weight_at(const MaskSpec& spec, Eigen::Index row, Eigen::Index col,
                     const Image& img, const RenderOptions& options) {
  const float x = (static_cast<float>(col) + 0.5f) / static_cast<float>(img.width());
  const float y = (static_cast<float>(row) + 0.5f) / static_cast<float>(img.height());
  if (const auto* m = std::get_if<LinearMask>(&spec)) {
    const float dx = static_cast<float>(m->end.x - m->start.x);
    const float dy = static_cast<float>(m->end.y - m->start.y);
    const float len2 = dx * dx + dy * dy;
    if (len2 < 1e-12f) return 1.0f;
    const float t = ((x - static_cast<float>(m->start.x)) * dx +
                     (y - static_cast<float>(m->start.y)) * dy) /
                    len2;
    return std::min(1.0f, std::max(0.0f, 1.0f - t));
  }
  if (const auto* m = std::get_if<RadialMask>(&spec)) {
    const float rad = static_cast<float>(m->angle) * (3.14159265358979323846f / 180.0f);
    const float ca = std::cos(rad);
    const float sa = std::sin(rad);
    const float ax = static_cast<float>(m->width) * 0.5f;
    const float ay = static_cast<float>(m->height) * 0.5f;
    const float dx = x - static_cast<float>(m->center.x);
    const float dy = y - static_cast<float>(m->center.y);
    const float u = (ca * dx + sa * dy) / ax;
    const float v = (-sa * dx + ca * dy) / ay;
    const float rho = std::sqrt(u * u + v * v);
    return std::min(1.0f, std::max(0.0f, 1.0f - rho));
  }
  if (const auto* m = std::get_if<ObjectMask>(&spec)) {
    return (x >= m->x1 && x <= m->x2 && y >= m->y1 && y <= m->y2) ? 1.0f : 0.0f;
  }
  if (const auto* m = std::get_if<PortraitMask>(&spec)) {
    return (*options.segmentation)(row, col) ==
                   static_cast<std::uint8_t>(m->category_id)
               ? 1.0f
               : 0.0f;
  }
  if (const auto* m = std::get_if<ColorRangeMask>(&spec)) {
    const Lab pixel = linear_rgb_to_lab(img.r(row, col), img.g(row, col), img.b(row, col));
    double w = 0.0;
    for (const Lab& s : m->samples)
      w = std::max(w, std::max(0.0, 1.0 - ciede2000(pixel, s) / options.color_tolerance));
    return static_cast<float>(w);
  }
  const auto& m = std::get<LuminanceRangeMask>(spec);
  const float lo = static_cast<float>(m.l_min);
  const float hi = static_cast<float>(m.l_max);
  const float feather = static_cast<float>(options.luminance_feather);
  const float v = luma_f(img.r(row, col), img.g(row, col), img.b(row, col));
  if (v >= lo && v <= hi) return 1.0f;
  if (feather <= 0.0f) return 0.0f;
  const float d = v < lo ? lo - v : v - hi;
  return std::max(0.0f, 1.0f - d / feather);
}

}  // namespace

Image naive_render(const Image& img, const RocDocument& doc,
                   const RenderOptions& options) {
  Image out = img;
  for (const ToolInvocation& tool : doc.tools) {
    Image next(out.height(), out.width());
    for (Eigen::Index r = 0; r < out.height(); ++r)
      for (Eigen::Index c = 0; c < out.width(); ++c) {
        Px p{out.r(r, c), out.g(r, c), out.b(r, c)};
        if (tool.mask) {
          Px edited = p;
          apply_tool_to_pixel(edited, tool);
          const float w = mask_weight_at(*tool.mask, r, c, out, options);
          p.r = clampf((1.0f - w) * p.r + w * edited.r);
          p.g = clampf((1.0f - w) * p.g + w * edited.g);
          p.b = clampf((1.0f - w) * p.b + w * edited.b);
        } else {
          apply_tool_to_pixel(p, tool);
        }
        next.r(r, c) = p.r;
        next.g(r, c) = p.g;
        next.b(r, c) = p.b;
      }
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random documents
// ---------------------------------------------------------------------------

namespace {

MaskSpec random_mask(std::mt19937_64& rng, MaskKind kind,
                     const CatalogDefaults& defaults) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (kind) {
    case MaskKind::linear: {
      LinearMask m;
      m.start = {unit(rng), unit(rng)};
      m.end = {unit(rng), unit(rng)};
      return m;
    }
    case MaskKind::radial: {
      RadialMask m;
      m.center = {unit(rng), unit(rng)};
      m.width = 0.05 + 0.95 * unit(rng);
      m.height = 0.05 + 0.95 * unit(rng);
      m.angle = defaults.angle_min +
                unit(rng) * 0.999 * (defaults.angle_max - defaults.angle_min);
      return m;
    }
    case MaskKind::object: {
      double x1 = unit(rng), x2 = unit(rng), y1 = unit(rng), y2 = unit(rng);
      if (x1 > x2) std::swap(x1, x2);
      if (y1 > y2) std::swap(y1, y2);
      if (x2 - x1 < 0.01) x2 = std::min(1.0, x1 + 0.01);
      if (y2 - y1 < 0.01) y2 = std::min(1.0, y1 + 0.01);
      if (x2 - x1 < 0.01) x1 = x2 - 0.01;
      if (y2 - y1 < 0.01) y1 = y2 - 0.01;
      return ObjectMask{x1, y1, x2, y2};
    }
    case MaskKind::portrait: {
      std::uniform_int_distribution<int> id(0, 7);
      return PortraitMask{id(rng)};
    }
    case MaskKind::color_range: {
      ColorRangeMask m;
      std::uniform_int_distribution<int> count(1, defaults.color_samples);
      const int n = count(rng);
      for (int i = 0; i < n; ++i)
        m.samples.push_back(Lab{100.0 * unit(rng), 200.0 * unit(rng) - 100.0,
                                200.0 * unit(rng) - 100.0});
      return m;
    }
    case MaskKind::luminance_range: {
      double lo = unit(rng), hi = unit(rng);
      if (lo > hi) std::swap(lo, hi);
      if (hi - lo < 0.01) hi = std::min(1.0, lo + 0.01);
      if (hi - lo < 0.01) lo = hi - 0.01;
      return LuminanceRangeMask{lo, hi};
    }
  }
  return LinearMask{};
}

Curve random_monotone_curve(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(2, 5);
  const int n = count(rng);
  std::vector<double> xs{0.0, 1.0};
  while (static_cast<int>(xs.size()) < n) {
    const double x = unit(rng);
    bool distinct = true;
    for (double e : xs)
      if (std::fabs(e - x) < 0.02) distinct = false;
    if (distinct) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  std::vector<double> ys;
  for (std::size_t i = 0; i < xs.size(); ++i) ys.push_back(unit(rng));
  std::sort(ys.begin(), ys.end());  // monotone tone curves
  Curve curve;
  for (std::size_t i = 0; i < xs.size(); ++i)
    curve.push_back(CurvePoint{xs[i], ys[i]});
  return curve;
}

}  // namespace

RocDocument random_document(std::mt19937_64& rng, const ToolCatalog& catalog,
                            const DocGenOptions& options) {
  std::vector<const ToolSchema*> eligible;
  for (const auto& [name, schema] : catalog.entries) {
    if (options.render_safe && !render_supported(name)) continue;
    if (!options.allow_portrait && schema.mask == MaskKind::portrait) continue;
    eligible.push_back(&schema);
  }
  std::shuffle(eligible.begin(), eligible.end(), rng);

  std::uniform_int_distribution<int> tool_count(0, options.max_tools);
  const int n = std::min<int>(tool_count(rng), static_cast<int>(eligible.size()));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RocDocument doc;
  for (int i = 0; i < n; ++i) {
    const ToolSchema& schema = *eligible[i];
    ToolInvocation tool;
    tool.name = schema.name;

    std::vector<const ParamSchema*> params;
    for (const auto& kv : schema.params) params.push_back(&kv.second);
    std::shuffle(params.begin(), params.end(), rng);
    std::uniform_int_distribution<int> key_count(0, options.max_keys);
    const int k = std::min<int>(key_count(rng), static_cast<int>(params.size()));
    for (int j = 0; j < k; ++j) {
      const ParamSchema& ps = *params[j];
      switch (ps.kind) {
        case ParamKind::scalar:
          tool.params[ps.name] = ps.min + unit(rng) * (ps.max - ps.min);
          break;
        case ParamKind::enumeration: {
          std::uniform_int_distribution<std::size_t> pick(0, ps.allowed.size() - 1);
          tool.params[ps.name] = ps.allowed[pick(rng)];
          break;
        }
        case ParamKind::curve:
          tool.params[ps.name] = random_monotone_curve(rng);
          break;
      }
    }
    if (schema.mask && unit(rng) < 0.8)
      tool.mask = random_mask(rng, *schema.mask, catalog.defaults);
    doc.tools.push_back(std::move(tool));
  }
  return doc;
}

Image test_card(Eigen::Index height, Eigen::Index width) {
  Image img(height, width);
  for (Eigen::Index r = 0; r < height; ++r)
    for (Eigen::Index c = 0; c < width; ++c) {
      const float x = static_cast<float>(c) / static_cast<float>(width - 1);
      const float y = static_cast<float>(r) / static_cast<float>(height - 1);
      img.r(r, c) = x;
      img.g(r, c) = y;
      img.b(r, c) = 0.25f + 0.5f * ((r / 32 + c / 32) % 2);
    }
  // A few saturated patches exercise the chroma paths.
  const Eigen::Index ph = std::max<Eigen::Index>(1, height / 8);
  const Eigen::Index pw = std::max<Eigen::Index>(1, width / 8);
  for (Eigen::Index r = 0; r < ph; ++r)
    for (Eigen::Index c = 0; c < pw; ++c) {
      img.r(r, c) = 0.9f;
      img.g(r, c) = 0.05f;
      img.b(r, c) = 0.05f;
      img.r(r, width - 1 - c) = 0.05f;
      img.g(r, width - 1 - c) = 0.8f;
      img.b(r, width - 1 - c) = 0.1f;
      img.r(height - 1 - r, c) = 0.1f;
      img.g(height - 1 - r, c) = 0.1f;
      img.b(height - 1 - r, c) = 0.85f;
    }
  return img;
}

Segmentation test_segmentation(Eigen::Index height, Eigen::Index width) {
  Segmentation seg(height, width);
  for (Eigen::Index r = 0; r < height; ++r)
    for (Eigen::Index c = 0; c < width; ++c)
      seg(r, c) = static_cast<std::uint8_t>((4 * r) / height % 4);
  return seg;
}

std::string fixture_roc_text() {
  return R"({
  "tools": [
    {"name": "Exposure", "params": {"value": 0.4}},
    {"name": "Contrast", "params": {"value": 18.0}},
    {"name": "Temperature", "params": {"value": 12.0}},
    {"name": "Vibrance", "params": {"value": 35.0}},
    {"name": "ToneCurve", "params": {"points": [[0.0, 0.0], [0.3, 0.22], [0.7, 0.8], [1.0, 1.0]]}},
    {"name": "LinearGradient", "params": {"exposure": -0.6, "saturation": 20.0},
     "mask": {"kind": "linear", "start": [0.5, 0.0], "end": [0.5, 1.0]}},
    {"name": "RadialGradient", "params": {"shadows": 45.0, "temperature": -20.0},
     "mask": {"kind": "radial", "center": [0.45, 0.55], "width": 0.7, "height": 0.5, "angle": 25.0}},
    {"name": "ColorRangeMask", "params": {"contrast": -25.0},
     "mask": {"kind": "color_range", "samples": [[53.0, 70.0, 55.0], [60.0, -40.0, 30.0]]}},
    {"name": "LuminanceRangeMask", "params": {"highlights": 30.0},
     "mask": {"kind": "luminance_range", "l_min": 0.55, "l_max": 1.0}}
  ]
})";
}

// ---------------------------------------------------------------------------
// Scripted protocol session
// ---------------------------------------------------------------------------

namespace {

using namespace retouch::a2l;

struct Recorder {
  FramedStream& stream;
  std::string& log;

  void send(const Frame& frame) {
    std::string wire = encode_frame(frame);
    log += "C: " + wire;
    stream.write_frame(frame);
  }
  void send_blob(const std::vector<std::uint8_t>& bytes) {
    log += "C: [blob " + std::to_string(bytes.size()) + " bytes sha256=" +
           sha256_hex(bytes) + "]\n";
    stream.write_blob(bytes);
  }
  void expect() {
    const auto reply = stream.read_frame();
    if (!reply) {
      log += "S: <eof>\n";
      return;
    }
    log += "S: " + encode_frame(*reply);
  }
  void expect_blob() {
    const auto bytes = stream.read_blob();
    log += "S: [blob " + std::to_string(bytes.size()) + " bytes sha256=" +
           sha256_hex(bytes) + "]\n";
  }
};

}  // namespace

std::string record_scripted_session() {
  using namespace retouch::a2l;

  ServerConfig config;
  config.catalog = shipped_catalog();
  config.workers = 1;
  int counter = 1;
  config.session_id_gen = [counter]() mutable {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%04d", counter++);
    return std::string(buf);
  };
  Server server(config);

  auto [client_end, server_end] = make_memory_pipe();
  std::thread server_thread([&server, t = server_end.get()] { server.serve(*t); });

  const std::string roc = R"({"tools":[{"name":"Exposure","params":{"value":1.0}}]})";
  const std::vector<std::uint8_t> roc_bytes(roc.begin(), roc.end());
  const std::vector<std::uint8_t> png_bytes = encode_png(test_card(64, 64));

  std::string log;
  {
    FramedStream stream(*client_end);
    Recorder rec{stream, log};

    rec.send(make_frame(Verb::hello, "-", {"fixture-client"}));
    rec.expect();
    const std::string sid = "s0001";

    rec.send(make_frame(Verb::file, sid,
                        {"edit.roc", sha256_hex(roc_bytes),
                         std::to_string(roc_bytes.size())}));
    rec.send_blob(roc_bytes);
    rec.expect();

    rec.send(make_frame(Verb::file, sid,
                        {"src.png", sha256_hex(png_bytes),
                         std::to_string(png_bytes.size())}));
    rec.send_blob(png_bytes);
    rec.expect();

    rec.send(make_frame(Verb::exec, sid, {"job-1", "edit.roc", "src.png"}));
    rec.expect();

    server.wait_idle();  // settle out-of-band so the transcript stays fixed

    rec.send(make_frame(Verb::status, sid, {"job-1"}));
    rec.expect();

    rec.send(make_frame(Verb::result, sid, {"job-1"}));
    rec.expect();
    rec.expect_blob();

    rec.send(make_frame(Verb::bye, sid));
    rec.expect();
  }
  client_end->close();
  server_thread.join();
  return log;
}

}  // namespace oracles
