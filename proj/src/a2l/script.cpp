#include "retouch/a2l/script.hpp"

#include <variant>

namespace retouch::a2l {

ScriptError::ScriptError(const std::string& message)
    : std::runtime_error("UnmappedTool: " + message) {}

namespace {

std::string lua_number(double v) { return canonical_number(v); }

std::string lua_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string lua_value(const ParamValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return lua_number(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return lua_string(v);
        } else {
          // Curves flatten to { x1, y1, x2, y2, ... } like the SDK tables.
          std::string out = "{ ";
          for (const CurvePoint& p : v)
            out += lua_number(p.x) + ", " + lua_number(p.y) + ", ";
          out += "}";
          return out;
        }
      },
      value);
}

const ParamSchema& schema_for(const ToolCatalog& catalog,
                              const ToolInvocation& tool,
                              const std::string& key) {
  const ToolSchema* schema = catalog.find(tool.name);
  if (!schema) throw ScriptError("tool '" + tool.name + "' not in catalog");
  const auto it = schema->params.find(key);
  if (it == schema->params.end())
    throw ScriptError("parameter '" + key + "' of '" + tool.name +
                      "' not in catalog");
  if (it->second.script_key.empty())
    throw ScriptError("no script mapping for parameter '" + key + "' of '" +
                      tool.name + "'");
  return it->second;
}

void emit_geometry(std::string& out, const MaskSpec& spec) {
  out += "      geometry = { ";
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMask>) {
          out += "startX = " + lua_number(m.start.x) + ", startY = " +
                 lua_number(m.start.y) + ", endX = " + lua_number(m.end.x) +
                 ", endY = " + lua_number(m.end.y) + ", ";
        } else if constexpr (std::is_same_v<T, RadialMask>) {
          out += "centerX = " + lua_number(m.center.x) + ", centerY = " +
                 lua_number(m.center.y) + ", width = " + lua_number(m.width) +
                 ", height = " + lua_number(m.height) + ", angle = " +
                 lua_number(m.angle) + ", ";
        } else if constexpr (std::is_same_v<T, ObjectMask>) {
          out += "x1 = " + lua_number(m.x1) + ", y1 = " + lua_number(m.y1) +
                 ", x2 = " + lua_number(m.x2) + ", y2 = " + lua_number(m.y2) +
                 ", ";
        } else if constexpr (std::is_same_v<T, PortraitMask>) {
          out += "categoryId = " + std::to_string(m.category_id) + ", ";
        } else if constexpr (std::is_same_v<T, ColorRangeMask>) {
          out += "samples = { ";
          for (const Lab& s : m.samples)
            out += "{ " + lua_number(s.l) + ", " + lua_number(s.a) + ", " +
                   lua_number(s.b) + " }, ";
          out += "}, ";
        } else if constexpr (std::is_same_v<T, LuminanceRangeMask>) {
          out += "lumMin = " + lua_number(m.l_min) + ", lumMax = " +
                 lua_number(m.l_max) + ", ";
        }
      },
      spec);
  out += "},\n";
}

}  // namespace

std::string translate_roc_to_script(const RocDocument& doc,
                                    const ToolCatalog& catalog) {
  std::string settings;
  std::string masks;

  for (const ToolInvocation& tool : doc.tools) {
    if (!tool.mask) {
      for (const auto& [key, value] : tool.params) {
        const ParamSchema& ps = schema_for(catalog, tool, key);
        settings += "    " + ps.script_key + " = " + lua_value(value) + ",\n";
      }
    } else {
      masks += "    {\n";
      masks += "      name = " + lua_string(tool.name) + ",\n";
      masks += "      kind = " + lua_string(mask_kind_name(mask_kind(*tool.mask))) + ",\n";
      emit_geometry(masks, *tool.mask);
      masks += "      settings = {\n";
      for (const auto& [key, value] : tool.params) {
        const ParamSchema& ps = schema_for(catalog, tool, key);
        masks += "        " + ps.script_key + " = " + lua_value(value) + ",\n";
      }
      masks += "      },\n";
      masks += "    },\n";
    }
  }

  std::string out;
  out += "local develop = {\n";
  out += "  version = 1,\n";
  out += "  settings = {\n";
  out += settings;
  out += "  },\n";
  out += "  masks = {\n";
  out += masks;
  out += "  },\n";
  out += "}\n";
  out += "return develop\n";
  return out;
}

}  // namespace retouch::a2l
