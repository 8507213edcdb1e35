#pragma once

#include <stdexcept>
#include <string_view>
#include <vector>

#include "retouch/image.hpp"
#include "retouch/render.hpp"
#include "retouch/roc.hpp"

namespace retouch {

// ---------------------------------------------------------------------------
// The GRPO-R reward stack: binary format reward, retouching-operation
// accuracy (tool-name Jaccard + parameter-name Jaccard + parameter-value
// similarity), and the perceptual-quality blend of color-distribution
// similarity and pixel fidelity. Total reward lives in [0,3].
// ---------------------------------------------------------------------------

struct RewardBreakdown {
  double r_format = 0.0;     // {0,1}
  double r_name = 0.0;       // [0,1]
  double r_param_raw = 0.0;  // [0, |tgt tools|]
  double r_value_raw = 0.0;  // [0, total tgt keys]
  double r_roa = 0.0;        // [0,1]
  double cd = 0.0;           // [0,1]
  double l = 0.0;            // [0,1]
  double r_pq = 0.0;         // [0,1]
  double total = 0.0;        // r_format + r_roa + r_pq, in [0,3]
};

struct GroupSample {
  double reward = 0.0;
  double advantage = 0.0;
};

enum class RewardErrc {
  empty_target,
  unknown_param_type,
  sample_count_mismatch,
  degenerate_target,
  bad_range,
  group_too_small,
  dimension_mismatch,
};

class RewardError : public std::runtime_error {
 public:
  RewardError(RewardErrc code, const std::string& message);
  RewardErrc code() const { return code_; }

 private:
  RewardErrc code_;
};

// --- parameter-value similarity kernels, each in [0,1] ----------------------

/// max(0, 1 - |pre-tgt| / (max-min)).
double scalar_similarity(double pre, double tgt, double min, double max);

/// max(0, 1 - ||start_pre-start_tgt|| - ||end_pre-end_tgt||).
double linear_mask_similarity(const LinearMask& pre, const LinearMask& tgt);

/// 0.4*S_center + 0.4*S_scale + 0.2*S_angle with
///   S_center = max(0, 1 - 2*||c_pre-c_tgt||)
///   S_scale  = max(0, 1 - |W_pre/W_tgt - 1| - |H_pre/H_tgt - 1|)
///   S_angle  = max(0, 1 - |theta_pre-theta_tgt| / (angle_max-angle_min)).
double radial_mask_similarity(const RadialMask& pre, const RadialMask& tgt,
                              double angle_min, double angle_max);

/// Intersection-over-union of the two boxes; 0 when disjoint.
double object_mask_iou(const ObjectMask& pre, const ObjectMask& tgt);

/// 1 iff the category ids coincide.
double portrait_mask_match(const PortraitMask& pre, const PortraitMask& tgt);

/// max(0, 1 - mean_n deltaE00(pre_n, tgt_n) / 100), samples paired by index.
double color_mask_similarity(const ColorRangeMask& pre, const ColorRangeMask& tgt);

/// max(0, 1 - (|dl_min| + |dl_max|) / (2*(l_max_tgt - l_min_tgt))).
double luminance_mask_similarity(const LuminanceRangeMask& pre,
                                 const LuminanceRangeMask& tgt);

/// Curves compared as piecewise-linear interpolants sampled on a fixed
/// 17-point grid: max(0, 1 - mean |y_pre - y_tgt|).
double curve_similarity(const Curve& pre, const Curve& tgt);

// --- reward components -------------------------------------------------------

/// 1 iff `raw` parses as a well-formed agent response against `catalog`.
double format_reward(std::string_view raw, const ToolCatalog& catalog);

/// Jaccard index of the two tool-name sets.
double tool_name_reward(const RocDocument& pred, const RocDocument& tgt);

/// Sum over name-matched (pred, tgt) tool pairs of the Jaccard index of
/// their parameter-key sets (an attached mask counts as the key "mask";
/// two empty key sets score 1). Range [0, |tgt tools|].
double param_name_reward(const RocDocument& pred, const RocDocument& tgt);

/// Sum over target tools, name-matched predictions and target keys of the
/// per-type similarity; an absent key scores 0. Range [0, total tgt keys].
double param_value_reward(const RocDocument& pred, const RocDocument& tgt,
                          const ToolCatalog& catalog);

/// (r_name + r_param/|tgt| + r_value/total_keys) / 3. With a zero-key
/// target the value term is 1 iff the matched predictions also carry no
/// keys.
double roa_reward(const RocDocument& pred, const RocDocument& tgt,
                  const ToolCatalog& catalog);

struct PqScore {
  double cd = 0.0;
  double l = 0.0;
  double r_pq = 0.0;
};

/// r_pq = gamma*CD + (1-gamma)*L on equally sized images.
PqScore pq_reward(const Image& edit, const Image& tgt, double gamma = 0.4);

/// Full pipeline: parse `raw`; on format failure the breakdown is all
/// zeros except total == 0. Otherwise renders the prediction against `src`
/// and scores it against `tgt`/`tgt_img`.
RewardBreakdown total_reward(std::string_view raw, const RocDocument& tgt,
                             const Image& src, const Image& tgt_img,
                             const ToolCatalog& catalog,
                             const RenderOptions& options = {},
                             double gamma = 0.4);

/// Group-relative advantages: (r - mean) / population std; all zeros when
/// the group is degenerate. Needs at least two samples.
std::vector<GroupSample> group_advantages(const std::vector<double>& rewards);

}  // namespace retouch
