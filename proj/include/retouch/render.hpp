#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>

#include "retouch/image.hpp"
#include "retouch/roc.hpp"

namespace retouch {

enum class RenderErrc {
  unsupported_tool,
  dimension_mismatch,
  missing_segmentation,
  bad_curve,
  timeout,
};

class RenderError : public std::runtime_error {
 public:
  RenderError(RenderErrc code, const std::string& message);
  RenderErrc code() const { return code_; }

 private:
  RenderErrc code_;
};

struct RenderOptions {
  double color_tolerance = 20.0;    // deltaE00 radius for color-range masks
  double luminance_feather = 0.05;  // feather width for luminance-range masks
  const Segmentation* segmentation = nullptr;  // portrait-mask side file
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// ---------------------------------------------------------------------------
// Adjustment semantics. Lightroom's real develop math is proprietary; the
// kernels below are fixed, documented approximations operating on
// linear-light RGB in [0,1], clamped after every step. A parameter whose
// value is exactly 0 is skipped, so zero-parameter tools are exact
// identities. Pixel centers sample normalized coordinates
// ((col+0.5)/W, (row+0.5)/H).
//
//   exposure e (stops):      rgb *= 2^e
//   contrast c in [-100,100]: per channel, s = srgb_encode(x),
//                            s' = clamp01(0.5 + (s-0.5)*(1+c/100)),
//                            x' = srgb_decode(s')
//   highlights/shadows/whites/blacks v in [-100,100]: multiplicative gain
//                            1 + k*(v/100)*w(t) with t = srgb_encode(Y),
//                            k = 0.6 for highlights/shadows, 0.8 for
//                            whites/blacks, and band weights
//                              highlights: smoothstep(0.5, 1.0, t)
//                              shadows:    1 - smoothstep(0.0, 0.5, t)
//                              whites:     smoothstep(0.75, 1.0, t)
//                              blacks:     1 - smoothstep(0.0, 0.25, t)
//   temperature v:           r *= 1 + 0.25*(v/100), b *= 1 - 0.25*(v/100)
//   tint v:                  g *= 1 - 0.25*(v/100)
//   saturation v:            out = Y + (rgb - Y)*(1 + v/100)
//   vibrance v:              as saturation with per-pixel strength
//                            (1 + (v/100)*(1 - sat)), sat = (max-min)/max
//   tone curve:              monotone piecewise-cubic (Fritsch-Carlson)
//                            through the control points, applied to the
//                            srgb-encoded value per channel
//
// Masked tools apply their scalar parameters as the kernels above in the
// fixed order: temperature, tint, exposure, contrast, highlights, shadows,
// whites, blacks, saturation.
// ---------------------------------------------------------------------------

/// True when apply_global knows how to execute the named tool.
bool render_supported(const std::string& tool_name);

/// Rasterizes a mask at the given size. Weight profiles:
///   linear:   w = clamp01(1 - t), t the projection of the pixel onto the
///             start->end axis (t=0 at start, t=1 at end); a degenerate
///             axis yields an all-ones mask
///   radial:   w = clamp01(1 - rho), rho the normalized elliptical radius
///             after rotating by -angle, semi-axes width/2 and height/2
///   object:   1 inside the closed bbox, 0 outside
///   portrait: 1 where the segmentation id equals category_id
///   color:    w = max over samples of max(0, 1 - deltaE00/tau_c), pixel
///             converted from linear RGB to Lab
///   luminance: 1 inside [l_min, l_max] of linear luminance, linear
///             feather of width tau_l outside
MaskBuffer rasterize_mask(const MaskSpec& spec, Eigen::Index height,
                          Eigen::Index width, const Image& img,
                          const RenderOptions& options = {});

/// Applies one tool without a mask. Unknown semantics -> unsupported_tool.
Image apply_global(const Image& img, const ToolInvocation& tool);

/// out = (1-w)*img + w*apply_global(img, tool-without-mask), per pixel.
Image apply_local(const Image& img, const ToolInvocation& tool,
                  const MaskBuffer& mask);

/// Applies a whole document in order. Deterministic: identical inputs give
/// bit-identical outputs.
Image apply_roc(const Image& img, const RocDocument& doc,
                const RenderOptions& options = {});

}  // namespace retouch
