#pragma once

#include <cstdint>
#include <vector>

#include "retouch/image.hpp"
#include "retouch/render.hpp"
#include "retouch/reward.hpp"
#include "retouch/roc.hpp"

namespace retouch {

/// Desk-scale GRPO loop: candidates are random perturbations of the best
/// document seen so far, scored by total_reward, with group-normalized
/// advantages. The perturbation scale anneals linearly toward sigma_floor,
/// so the group contracts onto the best candidate over the run.
struct GrpoSimConfig {
  int group_size = 4;
  int steps = 20;
  std::uint64_t seed = 0;
  double gamma = 0.4;
  double sigma0 = 0.5;        // initial perturbation scale
  double sigma_floor = 0.02;  // late-step scale
};

struct GrpoStep {
  int step = 0;
  double sigma = 0.0;
  double mean_reward = 0.0;
  double best_reward = 0.0;  // best candidate seen so far, non-decreasing
  std::vector<GroupSample> group;
};

std::vector<GrpoStep> run_grpo_sim(const Image& src, const RocDocument& tgt,
                                   const Image& tgt_img,
                                   const ToolCatalog& catalog,
                                   const GrpoSimConfig& config,
                                   const RenderOptions& options = {});

/// Wraps a document as a minimal well-formed agent response.
std::string wrap_agent_response(const RocDocument& doc);

}  // namespace retouch
