#include "retouch/roc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace retouch {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* mask_kind_name(MaskKind kind) {
  switch (kind) {
    case MaskKind::linear: return "linear";
    case MaskKind::radial: return "radial";
    case MaskKind::object: return "object";
    case MaskKind::portrait: return "portrait";
    case MaskKind::color_range: return "color_range";
    case MaskKind::luminance_range: return "luminance_range";
  }
  return "?";
}

std::optional<MaskKind> mask_kind_from(std::string_view name) {
  static const std::map<std::string_view, MaskKind> kNames = {
      {"linear", MaskKind::linear},
      {"radial", MaskKind::radial},
      {"object", MaskKind::object},
      {"portrait", MaskKind::portrait},
      {"color_range", MaskKind::color_range},
      {"luminance_range", MaskKind::luminance_range},
  };
  auto it = kNames.find(name);
  if (it == kNames.end()) return std::nullopt;
  return it->second;
}

MaskKind mask_kind(const MaskSpec& spec) {
  return static_cast<MaskKind>(spec.index());
}

const ToolSchema* ToolCatalog::find(const std::string& name) const {
  auto it = entries.find(name);
  return it == entries.end() ? nullptr : &it->second;
}

const char* roc_errc_name(RocErrc code) {
  switch (code) {
    case RocErrc::syntax: return "SyntaxError";
    case RocErrc::unknown_tool: return "UnknownTool";
    case RocErrc::unknown_param: return "UnknownParam";
    case RocErrc::out_of_range: return "OutOfRange";
    case RocErrc::duplicate_tool: return "DuplicateTool";
    case RocErrc::bad_mask: return "BadMask";
    case RocErrc::bad_value: return "BadValue";
    case RocErrc::missing_think: return "MissingThink";
    case RocErrc::missing_answer: return "MissingAnswer";
    case RocErrc::multiple_blocks: return "MultipleBlocks";
    case RocErrc::bad_structure: return "BadStructure";
    case RocErrc::inner_roc: return "InnerRocError";
  }
  return "?";
}

RocError::RocError(RocErrc code, std::string where, const std::string& message)
    : std::runtime_error(std::string(roc_errc_name(code)) + " at " + where +
                         ": " + message),
      code_(code),
      where_(std::move(where)) {}

CatalogError::CatalogError(std::string where, const std::string& message)
    : std::runtime_error("CatalogError at " + where + ": " + message),
      where_(std::move(where)) {}

std::string canonical_number(double value) { return json(value).dump(); }

namespace {

[[noreturn]] void fail(RocErrc code, const std::string& where,
                       const std::string& message) {
  throw RocError(code, where, message);
}

double require_number(const json& node, const std::string& where) {
  if (!node.is_number()) fail(RocErrc::bad_value, where, "expected a number");
  return node.get<double>();
}

double require_unit(const json& node, const std::string& where) {
  const double v = require_number(node, where);
  if (!(v >= 0.0 && v <= 1.0))
    fail(RocErrc::out_of_range, where, "coordinate outside [0,1]");
  return v;
}

Vec2 parse_point(const json& node, const std::string& where) {
  if (!node.is_array() || node.size() != 2)
    fail(RocErrc::bad_mask, where, "expected a [x,y] pair");
  return Vec2{require_unit(node[0], where + "/0"),
              require_unit(node[1], where + "/1")};
}

MaskSpec parse_mask(const json& node, const std::string& where,
                    const CatalogDefaults& defaults) {
  if (!node.is_object()) fail(RocErrc::bad_mask, where, "mask must be an object");
  const auto kind_it = node.find("kind");
  if (kind_it == node.end() || !kind_it->is_string())
    fail(RocErrc::bad_mask, where + "/kind", "missing mask kind");
  const auto kind = mask_kind_from(kind_it->get<std::string>());
  if (!kind)
    fail(RocErrc::bad_mask, where + "/kind",
         "unknown mask kind '" + kind_it->get<std::string>() + "'");

  auto require = [&](const char* key) -> const json& {
    const auto it = node.find(key);
    if (it == node.end())
      fail(RocErrc::bad_mask, where + "/" + key, "missing field");
    return *it;
  };

  switch (*kind) {
    case MaskKind::linear: {
      LinearMask m;
      m.start = parse_point(require("start"), where + "/start");
      m.end = parse_point(require("end"), where + "/end");
      return m;
    }
    case MaskKind::radial: {
      RadialMask m;
      m.center = parse_point(require("center"), where + "/center");
      m.width = require_number(require("width"), where + "/width");
      m.height = require_number(require("height"), where + "/height");
      m.angle = require_number(require("angle"), where + "/angle");
      if (!(m.width > 0.0))
        fail(RocErrc::out_of_range, where + "/width", "width must be > 0");
      if (!(m.height > 0.0))
        fail(RocErrc::out_of_range, where + "/height", "height must be > 0");
      if (!(m.angle >= defaults.angle_min && m.angle < defaults.angle_max))
        fail(RocErrc::out_of_range, where + "/angle",
             "angle outside [" + canonical_number(defaults.angle_min) + ", " +
                 canonical_number(defaults.angle_max) + ")");
      return m;
    }
    case MaskKind::object: {
      const json& bbox = require("bbox");
      if (!bbox.is_array() || bbox.size() != 4)
        fail(RocErrc::bad_mask, where + "/bbox", "expected [x1,y1,x2,y2]");
      ObjectMask m;
      m.x1 = require_unit(bbox[0], where + "/bbox/0");
      m.y1 = require_unit(bbox[1], where + "/bbox/1");
      m.x2 = require_unit(bbox[2], where + "/bbox/2");
      m.y2 = require_unit(bbox[3], where + "/bbox/3");
      if (!(m.x1 < m.x2))
        fail(RocErrc::out_of_range, where + "/bbox", "x1 must be < x2");
      if (!(m.y1 < m.y2))
        fail(RocErrc::out_of_range, where + "/bbox", "y1 must be < y2");
      return m;
    }
    case MaskKind::portrait: {
      const json& id = require("category_id");
      if (!id.is_number_integer() || id.get<long long>() < 0)
        fail(RocErrc::out_of_range, where + "/category_id",
             "category_id must be a non-negative integer");
      return PortraitMask{static_cast<int>(id.get<long long>())};
    }
    case MaskKind::color_range: {
      const json& samples = require("samples");
      if (!samples.is_array() || samples.empty())
        fail(RocErrc::bad_mask, where + "/samples",
             "samples must be a non-empty array");
      ColorRangeMask m;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::string sw = where + "/samples/" + std::to_string(i);
        const json& s = samples[i];
        if (!s.is_array() || s.size() != 3)
          fail(RocErrc::bad_mask, sw, "expected a [L,a,b] triple");
        m.samples.push_back(Lab{require_number(s[0], sw + "/0"),
                                require_number(s[1], sw + "/1"),
                                require_number(s[2], sw + "/2")});
      }
      return m;
    }
    case MaskKind::luminance_range: {
      LuminanceRangeMask m;
      m.l_min = require_unit(require("l_min"), where + "/l_min");
      m.l_max = require_unit(require("l_max"), where + "/l_max");
      if (!(m.l_min < m.l_max))
        fail(RocErrc::out_of_range, where + "/l_min", "l_min must be < l_max");
      return m;
    }
  }
  fail(RocErrc::bad_mask, where, "unreachable");
}

Curve parse_curve(const json& node, const std::string& where) {
  if (!node.is_array() || node.size() < 2)
    fail(RocErrc::bad_value, where, "curve needs at least two control points");
  Curve curve;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string pw = where + "/" + std::to_string(i);
    const json& p = node[i];
    if (!p.is_array() || p.size() != 2)
      fail(RocErrc::bad_value, pw, "expected a [x,y] control point");
    CurvePoint pt{require_unit(p[0], pw + "/0"), require_unit(p[1], pw + "/1")};
    if (!curve.empty() && !(pt.x > curve.back().x))
      fail(RocErrc::bad_value, pw, "control points must strictly increase in x");
    curve.push_back(pt);
  }
  return curve;
}

ParamValue parse_param_value(const json& node, const ParamSchema& schema,
                             const std::string& where) {
  switch (schema.kind) {
    case ParamKind::scalar: {
      const double v = require_number(node, where);
      if (!std::isfinite(v) || v < schema.min || v > schema.max)
        fail(RocErrc::out_of_range, where,
             "value " + canonical_number(v) + " outside [" +
                 canonical_number(schema.min) + ", " +
                 canonical_number(schema.max) + "]");
      return v;
    }
    case ParamKind::enumeration: {
      if (!node.is_string())
        fail(RocErrc::bad_value, where, "expected an enum token");
      const auto token = node.get<std::string>();
      if (std::find(schema.allowed.begin(), schema.allowed.end(), token) ==
          schema.allowed.end())
        fail(RocErrc::out_of_range, where, "token '" + token + "' not allowed");
      return token;
    }
    case ParamKind::curve:
      return parse_curve(node, where);
  }
  fail(RocErrc::bad_value, where, "unreachable");
}

ToolInvocation parse_tool(const json& node, const ToolCatalog& catalog,
                          const std::string& where) {
  if (!node.is_object()) fail(RocErrc::syntax, where, "tool must be an object");
  const auto name_it = node.find("name");
  if (name_it == node.end() || !name_it->is_string())
    fail(RocErrc::syntax, where + "/name", "missing tool name");

  ToolInvocation tool;
  tool.name = name_it->get<std::string>();
  const ToolSchema* schema = catalog.find(tool.name);
  if (!schema)
    fail(RocErrc::unknown_tool, where + "/name",
         "tool '" + tool.name + "' not in catalog");

  if (const auto params_it = node.find("params"); params_it != node.end()) {
    if (!params_it->is_object())
      fail(RocErrc::syntax, where + "/params", "params must be an object");
    for (const auto& [key, value] : params_it->items()) {
      const std::string pw = where + "/params/" + key;
      const auto ps = schema->params.find(key);
      if (ps == schema->params.end())
        fail(RocErrc::unknown_param, pw,
             "tool '" + tool.name + "' has no parameter '" + key + "'");
      tool.params.emplace(key, parse_param_value(value, ps->second, pw));
    }
  }

  if (const auto mask_it = node.find("mask");
      mask_it != node.end() && !mask_it->is_null()) {
    MaskSpec spec = parse_mask(*mask_it, where + "/mask", catalog.defaults);
    if (!schema->mask || *schema->mask != mask_kind(spec))
      fail(RocErrc::bad_mask, where + "/mask",
           "tool '" + tool.name + "' does not accept a " +
               std::string(mask_kind_name(mask_kind(spec))) + " mask");
    tool.mask = std::move(spec);
  }

  for (const auto& [key, value] : node.items()) {
    if (key != "name" && key != "params" && key != "mask")
      fail(RocErrc::syntax, where + "/" + key, "unexpected field");
  }
  return tool;
}

json parse_json_or_fail(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(RocErrc::syntax, "offset " + std::to_string(e.byte), e.what());
  }
}

}  // namespace

RocDocument parse_roc(std::string_view text, const ToolCatalog& catalog) {
  const json root = parse_json_or_fail(text);
  if (!root.is_object())
    fail(RocErrc::syntax, "/", "document must be an object");
  const auto tools_it = root.find("tools");
  if (tools_it == root.end() || !tools_it->is_array())
    fail(RocErrc::syntax, "/tools", "missing 'tools' array");
  for (const auto& [key, value] : root.items()) {
    if (key != "tools") fail(RocErrc::syntax, "/" + key, "unexpected field");
  }

  RocDocument doc;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < tools_it->size(); ++i) {
    const std::string where = "/tools/" + std::to_string(i);
    ToolInvocation tool = parse_tool((*tools_it)[i], catalog, where);
    if (!seen.insert(tool.name).second)
      fail(RocErrc::duplicate_tool, where + "/name",
           "tool '" + tool.name + "' appears more than once");
    doc.tools.push_back(std::move(tool));
  }
  return doc;
}

namespace {

ordered_json mask_to_json(const MaskSpec& spec) {
  ordered_json out;
  out["kind"] = mask_kind_name(mask_kind(spec));
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMask>) {
          out["start"] = {m.start.x, m.start.y};
          out["end"] = {m.end.x, m.end.y};
        } else if constexpr (std::is_same_v<T, RadialMask>) {
          out["center"] = {m.center.x, m.center.y};
          out["width"] = m.width;
          out["height"] = m.height;
          out["angle"] = m.angle;
        } else if constexpr (std::is_same_v<T, ObjectMask>) {
          out["bbox"] = {m.x1, m.y1, m.x2, m.y2};
        } else if constexpr (std::is_same_v<T, PortraitMask>) {
          out["category_id"] = m.category_id;
        } else if constexpr (std::is_same_v<T, ColorRangeMask>) {
          auto samples = ordered_json::array();
          for (const Lab& s : m.samples) samples.push_back({s.l, s.a, s.b});
          out["samples"] = std::move(samples);
        } else if constexpr (std::is_same_v<T, LuminanceRangeMask>) {
          out["l_min"] = m.l_min;
          out["l_max"] = m.l_max;
        }
      },
      spec);
  return out;
}

ordered_json value_to_json(const ParamValue& value) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return v;
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          auto points = ordered_json::array();
          for (const CurvePoint& p : v) points.push_back({p.x, p.y});
          return points;
        }
      },
      value);
}

}  // namespace

std::string serialize_roc(const RocDocument& doc) {
  ordered_json root;
  auto tools = ordered_json::array();
  for (const ToolInvocation& tool : doc.tools) {
    ordered_json t;
    t["name"] = tool.name;
    auto params = ordered_json::object();
    for (const auto& [key, value] : tool.params)  // std::map: sorted keys
      params[key] = value_to_json(value);
    t["params"] = std::move(params);
    if (tool.mask) t["mask"] = mask_to_json(*tool.mask);
    tools.push_back(std::move(t));
  }
  root["tools"] = std::move(tools);
  return root.dump();
}

namespace {

bool whitespace_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

// Positions of every occurrence of `tag` in `raw`.
std::vector<std::size_t> find_all(std::string_view raw, std::string_view tag) {
  std::vector<std::size_t> out;
  for (std::size_t pos = raw.find(tag); pos != std::string_view::npos;
       pos = raw.find(tag, pos + 1))
    out.push_back(pos);
  return out;
}

}  // namespace

AgentResponse parse_agent_response(std::string_view raw,
                                   const ToolCatalog& catalog) {
  constexpr std::string_view kThinkOpen = "<think>";
  constexpr std::string_view kThinkClose = "</think>";
  constexpr std::string_view kAnswerOpen = "<answer>";
  constexpr std::string_view kAnswerClose = "</answer>";

  const auto think_open = find_all(raw, kThinkOpen);
  const auto think_close = find_all(raw, kThinkClose);
  const auto answer_open = find_all(raw, kAnswerOpen);
  const auto answer_close = find_all(raw, kAnswerClose);

  if (think_open.empty() || think_close.empty())
    fail(RocErrc::missing_think, "raw", "no <think> block");
  if (think_open.size() > 1 || think_close.size() > 1)
    fail(RocErrc::multiple_blocks, "raw", "more than one <think> block");
  if (answer_open.empty() || answer_close.empty())
    fail(RocErrc::missing_answer, "raw", "no <answer> block");
  if (answer_open.size() > 1 || answer_close.size() > 1)
    fail(RocErrc::multiple_blocks, "raw", "more than one <answer> block");

  const std::size_t t0 = think_open[0], t1 = think_close[0];
  const std::size_t a0 = answer_open[0], a1 = answer_close[0];
  if (!(t0 < t1 && t1 < a0 && a0 < a1))
    fail(RocErrc::bad_structure, "raw",
         "expected one <think> block followed by one <answer> block");

  if (!whitespace_only(raw.substr(0, t0)) ||
      !whitespace_only(raw.substr(t1 + kThinkClose.size(),
                                  a0 - (t1 + kThinkClose.size()))) ||
      !whitespace_only(raw.substr(a1 + kAnswerClose.size())))
    fail(RocErrc::bad_structure, "raw", "unexpected content outside blocks");

  AgentResponse response;
  response.raw = std::string(raw);
  response.think =
      std::string(raw.substr(t0 + kThinkOpen.size(), t1 - t0 - kThinkOpen.size()));
  const std::string_view answer =
      raw.substr(a0 + kAnswerOpen.size(), a1 - a0 - kAnswerOpen.size());
  try {
    response.answer = parse_roc(answer, catalog);
  } catch (const RocError& e) {
    fail(RocErrc::inner_roc, "answer " + e.where(), e.what());
  }
  return response;
}

// ---------------------------------------------------------------------------
// Catalog loading
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void cfail(const std::string& where, const std::string& message) {
  throw CatalogError(where, message);
}

double cat_number(const json& node, const std::string& where) {
  if (!node.is_number()) cfail(where, "expected a number");
  const double v = node.get<double>();
  if (!std::isfinite(v)) cfail(where, "value must be finite");
  return v;
}

ParamSchema parse_param_schema(const json& node, const std::string& where) {
  if (!node.is_object()) cfail(where, "parameter must be an object");
  ParamSchema schema;
  const auto name_it = node.find("name");
  if (name_it == node.end() || !name_it->is_string() ||
      name_it->get<std::string>().empty())
    cfail(where + "/name", "missing parameter name");
  schema.name = name_it->get<std::string>();

  std::string kind = "scalar";
  if (const auto it = node.find("kind"); it != node.end()) {
    if (!it->is_string()) cfail(where + "/kind", "kind must be a string");
    kind = it->get<std::string>();
  }
  if (kind == "scalar") {
    schema.kind = ParamKind::scalar;
    const auto min_it = node.find("min");
    const auto max_it = node.find("max");
    if (min_it == node.end() || max_it == node.end())
      cfail(where, "scalar parameter needs min and max");
    schema.min = cat_number(*min_it, where + "/min");
    schema.max = cat_number(*max_it, where + "/max");
    if (!(schema.min < schema.max))
      cfail(where, "min must be strictly less than max");
  } else if (kind == "enum") {
    schema.kind = ParamKind::enumeration;
    const auto it = node.find("allowed");
    if (it == node.end() || !it->is_array() || it->empty())
      cfail(where + "/allowed", "enum parameter needs allowed tokens");
    std::set<std::string> seen;
    for (const auto& t : *it) {
      if (!t.is_string()) cfail(where + "/allowed", "tokens must be strings");
      if (!seen.insert(t.get<std::string>()).second)
        cfail(where + "/allowed", "duplicate token '" + t.get<std::string>() + "'");
      schema.allowed.push_back(t.get<std::string>());
    }
  } else if (kind == "curve") {
    schema.kind = ParamKind::curve;
  } else {
    cfail(where + "/kind", "unknown parameter kind '" + kind + "'");
  }

  if (const auto it = node.find("script_key"); it != node.end()) {
    if (!it->is_string()) cfail(where + "/script_key", "must be a string");
    schema.script_key = it->get<std::string>();
  }
  return schema;
}

}  // namespace

ToolCatalog load_catalog(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    cfail("offset " + std::to_string(e.byte), e.what());
  }
  if (!root.is_object()) cfail("/", "catalog must be an object");

  ToolCatalog catalog;
  if (const auto it = root.find("defaults"); it != root.end()) {
    if (!it->is_object()) cfail("/defaults", "must be an object");
    const json& d = *it;
    if (d.contains("color_tolerance"))
      catalog.defaults.color_tolerance =
          cat_number(d["color_tolerance"], "/defaults/color_tolerance");
    if (d.contains("luminance_feather"))
      catalog.defaults.luminance_feather =
          cat_number(d["luminance_feather"], "/defaults/luminance_feather");
    if (d.contains("color_samples")) {
      if (!d["color_samples"].is_number_integer())
        cfail("/defaults/color_samples", "must be an integer");
      catalog.defaults.color_samples = d["color_samples"].get<int>();
    }
    if (d.contains("angle_min"))
      catalog.defaults.angle_min = cat_number(d["angle_min"], "/defaults/angle_min");
    if (d.contains("angle_max"))
      catalog.defaults.angle_max = cat_number(d["angle_max"], "/defaults/angle_max");
    if (!(catalog.defaults.color_tolerance > 0.0))
      cfail("/defaults/color_tolerance", "must be > 0");
    if (!(catalog.defaults.luminance_feather >= 0.0))
      cfail("/defaults/luminance_feather", "must be >= 0");
    if (catalog.defaults.color_samples < 1)
      cfail("/defaults/color_samples", "must be >= 1");
    if (!(catalog.defaults.angle_min < catalog.defaults.angle_max))
      cfail("/defaults", "angle_min must be < angle_max");
  }

  const auto tools_it = root.find("tools");
  if (tools_it == root.end() || !tools_it->is_array())
    cfail("/tools", "missing 'tools' array");

  for (std::size_t i = 0; i < tools_it->size(); ++i) {
    const std::string where = "/tools/" + std::to_string(i);
    const json& node = (*tools_it)[i];
    if (!node.is_object()) cfail(where, "tool must be an object");

    ToolSchema schema;
    const auto name_it = node.find("name");
    if (name_it == node.end() || !name_it->is_string() ||
        name_it->get<std::string>().empty())
      cfail(where + "/name", "missing tool name");
    schema.name = name_it->get<std::string>();

    if (const auto it = node.find("mask"); it != node.end() && !it->is_null()) {
      if (!it->is_string()) cfail(where + "/mask", "mask must be a string");
      const std::string token = it->get<std::string>();
      if (token != "none") {
        const auto kind = mask_kind_from(token);
        if (!kind) cfail(where + "/mask", "unknown mask kind '" + token + "'");
        schema.mask = *kind;
      }
    }

    if (const auto it = node.find("params"); it != node.end()) {
      if (!it->is_array()) cfail(where + "/params", "params must be an array");
      for (std::size_t j = 0; j < it->size(); ++j) {
        ParamSchema ps = parse_param_schema(
            (*it)[j], where + "/params/" + std::to_string(j));
        if (!schema.params.emplace(ps.name, ps).second)
          cfail(where + "/params/" + std::to_string(j),
                "duplicate parameter '" + ps.name + "'");
      }
    }

    if (!catalog.entries.emplace(schema.name, std::move(schema)).second)
      cfail(where + "/name", "duplicate tool '" + name_it->get<std::string>() + "'");
  }
  return catalog;
}

ToolCatalog load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) cfail(path, "cannot open catalog file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_catalog(buf.str());
}

}  // namespace retouch
