#include "retouch/reward.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "retouch/color.hpp"
#include "retouch/metrics.hpp"

namespace retouch {

namespace {

const char* reward_errc_name(RewardErrc code) {
  switch (code) {
    case RewardErrc::empty_target: return "EmptyTarget";
    case RewardErrc::unknown_param_type: return "UnknownParamType";
    case RewardErrc::sample_count_mismatch: return "SampleCountMismatch";
    case RewardErrc::degenerate_target: return "DegenerateTarget";
    case RewardErrc::bad_range: return "BadRange";
    case RewardErrc::group_too_small: return "GroupTooSmall";
    case RewardErrc::dimension_mismatch: return "DimensionMismatch";
  }
  return "?";
}

[[noreturn]] void fail(RewardErrc code, const std::string& message) {
  throw RewardError(code, message);
}

}  // namespace

RewardError::RewardError(RewardErrc code, const std::string& message)
    : std::runtime_error(std::string(reward_errc_name(code)) + ": " + message),
      code_(code) {}

// ---------------------------------------------------------------------------
// Similarity kernels
// ---------------------------------------------------------------------------

double scalar_similarity(double pre, double tgt, double min, double max) {
  if (!(min < max)) fail(RewardErrc::bad_range, "min must be < max");
  return std::max(0.0, 1.0 - std::fabs(pre - tgt) / (max - min));
}

double linear_mask_similarity(const LinearMask& pre, const LinearMask& tgt) {
  const double ds = std::hypot(pre.start.x - tgt.start.x, pre.start.y - tgt.start.y);
  const double de = std::hypot(pre.end.x - tgt.end.x, pre.end.y - tgt.end.y);
  return std::max(0.0, 1.0 - ds - de);
}

double radial_mask_similarity(const RadialMask& pre, const RadialMask& tgt,
                              double angle_min, double angle_max) {
  if (!(tgt.width > 0.0 && tgt.height > 0.0))
    fail(RewardErrc::degenerate_target, "target radial mask has zero extent");
  const double dc = std::hypot(pre.center.x - tgt.center.x, pre.center.y - tgt.center.y);
  const double s_center = std::max(0.0, 1.0 - 2.0 * dc);
  const double s_scale =
      std::max(0.0, 1.0 - std::fabs(pre.width / tgt.width - 1.0) -
                        std::fabs(pre.height / tgt.height - 1.0));
  const double s_angle =
      std::max(0.0, 1.0 - std::fabs(pre.angle - tgt.angle) / (angle_max - angle_min));
  return 0.4 * s_center + 0.4 * s_scale + 0.2 * s_angle;
}

double object_mask_iou(const ObjectMask& pre, const ObjectMask& tgt) {
  const double ix = std::min(pre.x2, tgt.x2) - std::max(pre.x1, tgt.x1);
  const double iy = std::min(pre.y2, tgt.y2) - std::max(pre.y1, tgt.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double a1 = (pre.x2 - pre.x1) * (pre.y2 - pre.y1);
  const double a2 = (tgt.x2 - tgt.x1) * (tgt.y2 - tgt.y1);
  return inter / (a1 + a2 - inter);
}

double portrait_mask_match(const PortraitMask& pre, const PortraitMask& tgt) {
  return pre.category_id == tgt.category_id ? 1.0 : 0.0;
}

double color_mask_similarity(const ColorRangeMask& pre, const ColorRangeMask& tgt) {
  if (pre.samples.empty() || tgt.samples.empty())
    fail(RewardErrc::sample_count_mismatch, "color masks need samples");
  if (pre.samples.size() != tgt.samples.size())
    fail(RewardErrc::sample_count_mismatch,
         std::to_string(pre.samples.size()) + " vs " +
             std::to_string(tgt.samples.size()) + " samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < pre.samples.size(); ++i)
    sum += ciede2000(pre.samples[i], tgt.samples[i]) / 100.0;
  return std::max(0.0, 1.0 - sum / static_cast<double>(pre.samples.size()));
}

double luminance_mask_similarity(const LuminanceRangeMask& pre,
                                 const LuminanceRangeMask& tgt) {
  if (!(tgt.l_max > tgt.l_min))
    fail(RewardErrc::degenerate_target, "target luminance range is empty");
  const double d =
      std::fabs(pre.l_min - tgt.l_min) + std::fabs(pre.l_max - tgt.l_max);
  return std::max(0.0, 1.0 - d / (2.0 * (tgt.l_max - tgt.l_min)));
}

double curve_similarity(const Curve& pre, const Curve& tgt) {
  auto eval = [](const Curve& curve, double x) {
    if (x <= curve.front().x) return curve.front().y;
    if (x >= curve.back().x) return curve.back().y;
    std::size_t hi = 1;
    while (curve[hi].x < x) ++hi;
    const CurvePoint& a = curve[hi - 1];
    const CurvePoint& b = curve[hi];
    const double t = (x - a.x) / (b.x - a.x);
    return a.y + t * (b.y - a.y);
  };
  constexpr int kSamples = 17;
  double sum = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double x = static_cast<double>(i) / (kSamples - 1);
    sum += std::fabs(eval(pre, x) - eval(tgt, x));
  }
  return std::max(0.0, 1.0 - sum / kSamples);
}

// ---------------------------------------------------------------------------
// Document-level rewards
// ---------------------------------------------------------------------------

double format_reward(std::string_view raw, const ToolCatalog& catalog) {
  try {
    parse_agent_response(raw, catalog);
    return 1.0;
  } catch (const RocError&) {
    return 0.0;
  }
}

namespace {

// Parameter keys of a tool; an attached mask participates as "mask".
std::set<std::string> key_set(const ToolInvocation& tool) {
  std::set<std::string> keys;
  for (const auto& [key, value] : tool.params) keys.insert(key);
  if (tool.mask) keys.insert("mask");
  return keys;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& k : a) inter += b.count(k);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

const ToolInvocation* find_tool(const RocDocument& doc, const std::string& name) {
  for (const ToolInvocation& t : doc.tools)
    if (t.name == name) return &t;
  return nullptr;
}

void require_nonempty_target(const RocDocument& tgt) {
  if (tgt.tools.empty()) fail(RewardErrc::empty_target, "target document is empty");
}

double mask_similarity(const MaskSpec& pre, const MaskSpec& tgt,
                       const CatalogDefaults& defaults) {
  if (mask_kind(pre) != mask_kind(tgt)) return 0.0;
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        const T& p = std::get<T>(pre);
        if constexpr (std::is_same_v<T, LinearMask>) {
          return linear_mask_similarity(p, t);
        } else if constexpr (std::is_same_v<T, RadialMask>) {
          return radial_mask_similarity(p, t, defaults.angle_min, defaults.angle_max);
        } else if constexpr (std::is_same_v<T, ObjectMask>) {
          return object_mask_iou(p, t);
        } else if constexpr (std::is_same_v<T, PortraitMask>) {
          return portrait_mask_match(p, t);
        } else if constexpr (std::is_same_v<T, ColorRangeMask>) {
          return color_mask_similarity(p, t);
        } else {
          return luminance_mask_similarity(p, t);
        }
      },
      tgt);
}

// Dispatches one key of a name-matched pair. The catalog schema is the
// authority for the parameter type.
double key_similarity(const ToolInvocation& pred, const ToolInvocation& tgt,
                      const std::string& key, const ToolCatalog& catalog) {
  if (key == "mask") {
    if (!pred.mask || !tgt.mask) return 0.0;
    return mask_similarity(*pred.mask, *tgt.mask, catalog.defaults);
  }

  const auto pre_it = pred.params.find(key);
  if (pre_it == pred.params.end()) return 0.0;
  const auto tgt_it = tgt.params.find(key);
  if (tgt_it == tgt.params.end()) return 0.0;

  const ToolSchema* schema = catalog.find(tgt.name);
  if (!schema)
    fail(RewardErrc::unknown_param_type, "tool '" + tgt.name + "' not in catalog");
  const auto ps = schema->params.find(key);
  if (ps == schema->params.end())
    fail(RewardErrc::unknown_param_type,
         "parameter '" + key + "' of '" + tgt.name + "' not in catalog");

  switch (ps->second.kind) {
    case ParamKind::scalar: {
      const double* pre_v = std::get_if<double>(&pre_it->second);
      const double* tgt_v = std::get_if<double>(&tgt_it->second);
      if (!pre_v || !tgt_v)
        fail(RewardErrc::unknown_param_type,
             "parameter '" + key + "' is not a scalar value");
      return scalar_similarity(*pre_v, *tgt_v, ps->second.min, ps->second.max);
    }
    case ParamKind::enumeration: {
      const std::string* pre_v = std::get_if<std::string>(&pre_it->second);
      const std::string* tgt_v = std::get_if<std::string>(&tgt_it->second);
      if (!pre_v || !tgt_v)
        fail(RewardErrc::unknown_param_type,
             "parameter '" + key + "' is not an enum token");
      return *pre_v == *tgt_v ? 1.0 : 0.0;
    }
    case ParamKind::curve: {
      const Curve* pre_v = std::get_if<Curve>(&pre_it->second);
      const Curve* tgt_v = std::get_if<Curve>(&tgt_it->second);
      if (!pre_v || !tgt_v)
        fail(RewardErrc::unknown_param_type,
             "parameter '" + key + "' is not a curve");
      return curve_similarity(*pre_v, *tgt_v);
    }
  }
  fail(RewardErrc::unknown_param_type, "unreachable");
}

}  // namespace

double tool_name_reward(const RocDocument& pred, const RocDocument& tgt) {
  require_nonempty_target(tgt);
  std::set<std::string> pred_names, tgt_names;
  for (const auto& t : pred.tools) pred_names.insert(t.name);
  for (const auto& t : tgt.tools) tgt_names.insert(t.name);
  std::size_t inter = 0;
  for (const auto& n : pred_names) inter += tgt_names.count(n);
  const std::size_t uni = pred_names.size() + tgt_names.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double param_name_reward(const RocDocument& pred, const RocDocument& tgt) {
  require_nonempty_target(tgt);
  double sum = 0.0;
  for (const ToolInvocation& t : tgt.tools) {
    const ToolInvocation* p = find_tool(pred, t.name);
    if (p) sum += jaccard(key_set(*p), key_set(t));
  }
  return sum;
}

double param_value_reward(const RocDocument& pred, const RocDocument& tgt,
                          const ToolCatalog& catalog) {
  require_nonempty_target(tgt);
  double sum = 0.0;
  for (const ToolInvocation& t : tgt.tools) {
    const ToolInvocation* p = find_tool(pred, t.name);
    if (!p) continue;
    for (const std::string& key : key_set(t))
      sum += key_similarity(*p, t, key, catalog);
  }
  return sum;
}

double roa_reward(const RocDocument& pred, const RocDocument& tgt,
                  const ToolCatalog& catalog) {
  require_nonempty_target(tgt);
  const double r_name = tool_name_reward(pred, tgt);
  const double r_param = param_name_reward(pred, tgt) /
                         static_cast<double>(tgt.tools.size());

  std::size_t total_keys = 0;
  for (const ToolInvocation& t : tgt.tools) total_keys += key_set(t).size();

  double r_value = 0.0;
  if (total_keys > 0) {
    r_value = param_value_reward(pred, tgt, catalog) /
              static_cast<double>(total_keys);
  } else {
    // Vacuously perfect when the matched predictions carry no keys either.
    r_value = 1.0;
    for (const ToolInvocation& t : tgt.tools) {
      const ToolInvocation* p = find_tool(pred, t.name);
      if (p && !key_set(*p).empty()) {
        r_value = 0.0;
        break;
      }
    }
  }
  return (r_name + r_param + r_value) / 3.0;
}

PqScore pq_reward(const Image& edit, const Image& tgt, double gamma) {
  if (!edit.same_shape(tgt))
    fail(RewardErrc::dimension_mismatch, "edit and target differ in size");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    fail(RewardErrc::bad_range, "gamma outside [0,1]");
  PqScore score;
  score.cd = color_distribution_similarity(edit, tgt);
  score.l = pixel_fidelity(edit, tgt);
  score.r_pq = gamma * score.cd + (1.0 - gamma) * score.l;
  return score;
}

RewardBreakdown total_reward(std::string_view raw, const RocDocument& tgt,
                             const Image& src, const Image& tgt_img,
                             const ToolCatalog& catalog,
                             const RenderOptions& options, double gamma) {
  RewardBreakdown out;
  AgentResponse response;
  try {
    response = parse_agent_response(raw, catalog);
  } catch (const RocError&) {
    out.total = 0.0;
    return out;
  }
  out.r_format = 1.0;

  const RocDocument& pred = response.answer;
  out.r_name = tool_name_reward(pred, tgt);
  out.r_param_raw = param_name_reward(pred, tgt);
  out.r_value_raw = param_value_reward(pred, tgt, catalog);
  out.r_roa = roa_reward(pred, tgt, catalog);

  const Image edit = apply_roc(src, pred, options);
  const PqScore pq = pq_reward(edit, tgt_img, gamma);
  out.cd = pq.cd;
  out.l = pq.l;
  out.r_pq = pq.r_pq;

  out.total = out.r_format + out.r_roa + out.r_pq;
  return out;
}

std::vector<GroupSample> group_advantages(const std::vector<double>& rewards) {
  if (rewards.size() < 2)
    fail(RewardErrc::group_too_small, "need at least two samples");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;  // population variance
  const double std_dev = std::sqrt(var);

  std::vector<GroupSample> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i].reward = rewards[i];
    out[i].advantage = std_dev == 0.0 ? 0.0 : (rewards[i] - mean) / std_dev;
  }
  return out;
}

}  // namespace retouch
