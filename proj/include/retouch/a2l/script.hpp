#pragma once

#include <stdexcept>
#include <string>

#include "retouch/roc.hpp"

namespace retouch::a2l {

class ScriptError : public std::runtime_error {
 public:
  explicit ScriptError(const std::string& message);
};

/// Renders a document as a Lightroom-SDK-style Lua table: one
/// develop-settings table keyed by the catalog's script mapping, plus one
/// mask block per masked tool. Output is byte-stable across runs. A set
/// parameter whose schema carries no script mapping raises
/// ScriptError ("UnmappedTool").
std::string translate_roc_to_script(const RocDocument& doc,
                                    const ToolCatalog& catalog);

}  // namespace retouch::a2l
