#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "retouch/color.hpp"

namespace retouch {

// ---------------------------------------------------------------------------
// Mask geometry
// ---------------------------------------------------------------------------

enum class MaskKind {
  linear,
  radial,
  object,
  portrait,
  color_range,
  luminance_range,
};

const char* mask_kind_name(MaskKind kind);
std::optional<MaskKind> mask_kind_from(std::string_view name);

/// 2-D point in normalized image coordinates; (0,0) is the top-left corner,
/// (1,1) the bottom-right.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct LinearMask {
  Vec2 start, end;
  bool operator==(const LinearMask&) const = default;
};

struct RadialMask {
  Vec2 center;
  double width = 0.0;   // full extent along the unrotated x axis
  double height = 0.0;  // full extent along the unrotated y axis
  double angle = 0.0;   // degrees, in [angle_min, angle_max)
  bool operator==(const RadialMask&) const = default;
};

struct ObjectMask {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;  // normalized, x1<x2, y1<y2
  bool operator==(const ObjectMask&) const = default;
};

struct PortraitMask {
  int category_id = 0;
  bool operator==(const PortraitMask&) const = default;
};

struct ColorRangeMask {
  std::vector<Lab> samples;  // non-empty
  bool operator==(const ColorRangeMask&) const = default;
};

struct LuminanceRangeMask {
  double l_min = 0.0;
  double l_max = 1.0;  // l_min < l_max, both in [0,1]
  bool operator==(const LuminanceRangeMask&) const = default;
};

using MaskSpec = std::variant<LinearMask, RadialMask, ObjectMask, PortraitMask,
                              ColorRangeMask, LuminanceRangeMask>;

MaskKind mask_kind(const MaskSpec& spec);

// ---------------------------------------------------------------------------
// Tool catalog
// ---------------------------------------------------------------------------

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

/// Control points of a tone curve, in [0,1]^2 and strictly increasing in x.
using Curve = std::vector<CurvePoint>;

using ParamValue = std::variant<double, std::string, Curve>;

enum class ParamKind { scalar, enumeration, curve };

struct ParamSchema {
  std::string name;
  ParamKind kind = ParamKind::scalar;
  double min = 0.0;  // scalar only; finite, min < max
  double max = 0.0;
  std::vector<std::string> allowed;  // enum only
  std::string script_key;            // empty: no develop-settings mapping
};

struct ToolSchema {
  std::string name;
  std::map<std::string, ParamSchema> params;
  std::optional<MaskKind> mask;  // mask family this tool accepts, if any
};

struct CatalogDefaults {
  double color_tolerance = 20.0;    // deltaE00 radius of color-range masks
  double luminance_feather = 0.05;  // feather width of luminance-range masks
  int color_samples = 5;            // samples emitted per color-range mask
  double angle_min = -180.0;        // radial-mask angle normalization bounds
  double angle_max = 180.0;
};

struct ToolCatalog {
  std::map<std::string, ToolSchema> entries;
  CatalogDefaults defaults;

  const ToolSchema* find(const std::string& name) const;
  std::size_t size() const { return entries.size(); }
};

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

struct ToolInvocation {
  std::string name;
  std::map<std::string, ParamValue> params;
  std::optional<MaskSpec> mask;
  bool operator==(const ToolInvocation&) const = default;
};

/// Ordered list of tool invocations; tool names are unique per document.
struct RocDocument {
  std::vector<ToolInvocation> tools;
  bool operator==(const RocDocument&) const = default;
};

struct AgentResponse {
  std::string raw;
  std::string think;
  RocDocument answer;
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class RocErrc {
  syntax,
  unknown_tool,
  unknown_param,
  out_of_range,
  duplicate_tool,
  bad_mask,
  bad_value,
  missing_think,
  missing_answer,
  multiple_blocks,
  bad_structure,
  inner_roc,
};

const char* roc_errc_name(RocErrc code);

/// Parse/validation failure. `where()` is a JSON pointer into the offending
/// document ("/tools/2/name") or a byte offset for syntax errors.
class RocError : public std::runtime_error {
 public:
  RocError(RocErrc code, std::string where, const std::string& message);
  RocErrc code() const { return code_; }
  const std::string& where() const { return where_; }

 private:
  RocErrc code_;
  std::string where_;
};

class CatalogError : public std::runtime_error {
 public:
  CatalogError(std::string where, const std::string& message);
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parses and validates a ROC document against `catalog`. Tool order is
/// preserved. Throws RocError; no partial documents escape.
RocDocument parse_roc(std::string_view text, const ToolCatalog& catalog);

/// Canonical serialization: fixed field order, params sorted by key,
/// shortest round-trip number formatting. parse(serialize(d)) == d and
/// structurally equal documents serialize byte-identically.
std::string serialize_roc(const RocDocument& doc);

/// Accepts exactly one <think> block followed by exactly one <answer> block
/// whose contents parse as a valid ROC; whitespace outside blocks ignored.
AgentResponse parse_agent_response(std::string_view raw,
                                   const ToolCatalog& catalog);

/// Loads and validates a catalog file (UTF-8 JSON). Throws CatalogError.
ToolCatalog load_catalog(std::string_view text);
ToolCatalog load_catalog_file(const std::string& path);

/// Formats a double the way the canonical serializer does ("3.0", "0.375").
std::string canonical_number(double value);

}  // namespace retouch
