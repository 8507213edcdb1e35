#include <doctest.h>

#include "oracles.hpp"
#include "retouch/a2l/script.hpp"

using namespace retouch;
using retouch::a2l::ScriptError;
using retouch::a2l::translate_roc_to_script;

TEST_CASE("empty document yields an empty settings table") {
  const auto catalog = oracles::shipped_catalog();
  const std::string script = translate_roc_to_script(RocDocument{}, catalog);
  CHECK(script.find("settings = {\n  }") != std::string::npos);
  CHECK(script.find("return develop") != std::string::npos);
}

TEST_CASE("global settings map through the catalog") {
  const auto catalog = oracles::shipped_catalog();
  const RocDocument doc = parse_roc(
      R"({"tools":[{"name":"Exposure","params":{"value":0.5}},
                   {"name":"Contrast","params":{"value":12}}]})", catalog);
  const std::string script = translate_roc_to_script(doc, catalog);
  CHECK(script.find("Exposure2012 = 0.5") != std::string::npos);
  CHECK(script.find("Contrast2012 = 12.0") != std::string::npos);

  // Byte-stable across runs.
  CHECK(translate_roc_to_script(doc, catalog) == script);
}

TEST_CASE("masked tools emit mask blocks") {
  const auto catalog = oracles::shipped_catalog();
  const RocDocument doc = parse_roc(R"({
    "tools": [
      {"name": "RadialGradient",
       "params": {"exposure": -0.5},
       "mask": {"kind": "radial", "center": [0.5, 0.4], "width": 0.6,
                "height": 0.4, "angle": 20.0}}
    ]})", catalog);
  const std::string script = translate_roc_to_script(doc, catalog);
  CHECK(script.find("kind = \"radial\"") != std::string::npos);
  CHECK(script.find("centerX = 0.5") != std::string::npos);
  CHECK(script.find("local_Exposure = -0.5") != std::string::npos);
}

TEST_CASE("tone curves flatten to SDK-style point lists") {
  const auto catalog = oracles::shipped_catalog();
  const RocDocument doc = parse_roc(
      R"({"tools":[{"name":"ToneCurve","params":{"points":[[0,0],[0.5,0.6],[1,1]]}}]})",
      catalog);
  const std::string script = translate_roc_to_script(doc, catalog);
  CHECK(script.find("ToneCurvePV2012 = { 0.0, 0.0, 0.5, 0.6, 1.0, 1.0, }") !=
        std::string::npos);
}

TEST_CASE("unmapped parameters are rejected") {
  ToolCatalog catalog = load_catalog(R"({
    "tools": [{"name": "Mystery", "params": [{"name": "value", "kind": "scalar",
               "min": 0.0, "max": 1.0}]}]
  })");
  ToolInvocation t;
  t.name = "Mystery";
  t.params["value"] = 0.5;
  CHECK_THROWS_AS(translate_roc_to_script(RocDocument{{t}}, catalog), ScriptError);
}
