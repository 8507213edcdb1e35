#include "retouch/grpo_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace retouch {

std::string wrap_agent_response(const RocDocument& doc) {
  return "<think>candidate</think><answer>" + serialize_roc(doc) + "</answer>";
}

namespace {

using Rng = std::mt19937_64;

double clamp(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

double jitter(Rng& rng, double value, double sigma, double lo, double hi) {
  std::normal_distribution<double> noise(0.0, 1.0);
  return clamp(value + noise(rng) * sigma * 0.25 * (hi - lo), lo, hi);
}

MaskSpec perturb_mask(Rng& rng, const MaskSpec& mask, double sigma,
                      const CatalogDefaults& defaults) {
  return std::visit(
      [&](const auto& m) -> MaskSpec {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearMask>) {
          LinearMask out = m;
          out.start.x = jitter(rng, m.start.x, sigma, 0.0, 1.0);
          out.start.y = jitter(rng, m.start.y, sigma, 0.0, 1.0);
          out.end.x = jitter(rng, m.end.x, sigma, 0.0, 1.0);
          out.end.y = jitter(rng, m.end.y, sigma, 0.0, 1.0);
          return out;
        } else if constexpr (std::is_same_v<T, RadialMask>) {
          RadialMask out = m;
          out.center.x = jitter(rng, m.center.x, sigma, 0.0, 1.0);
          out.center.y = jitter(rng, m.center.y, sigma, 0.0, 1.0);
          out.width = jitter(rng, m.width, sigma, 0.05, 2.0);
          out.height = jitter(rng, m.height, sigma, 0.05, 2.0);
          out.angle = jitter(rng, m.angle, sigma, defaults.angle_min,
                             std::nextafter(defaults.angle_max, 0.0));
          return out;
        } else if constexpr (std::is_same_v<T, ObjectMask>) {
          ObjectMask out = m;
          out.x1 = jitter(rng, m.x1, sigma, 0.0, 1.0);
          out.y1 = jitter(rng, m.y1, sigma, 0.0, 1.0);
          out.x2 = jitter(rng, m.x2, sigma, 0.0, 1.0);
          out.y2 = jitter(rng, m.y2, sigma, 0.0, 1.0);
          if (out.x1 > out.x2) std::swap(out.x1, out.x2);
          if (out.y1 > out.y2) std::swap(out.y1, out.y2);
          if (out.x2 - out.x1 < 1e-3) out.x2 = clamp(out.x1 + 1e-3, 0.0, 1.0), out.x1 = out.x2 - 1e-3;
          if (out.y2 - out.y1 < 1e-3) out.y2 = clamp(out.y1 + 1e-3, 0.0, 1.0), out.y1 = out.y2 - 1e-3;
          return out;
        } else if constexpr (std::is_same_v<T, PortraitMask>) {
          PortraitMask out = m;
          std::uniform_real_distribution<double> coin(0.0, 1.0);
          if (coin(rng) < sigma * 0.5) {
            std::uniform_int_distribution<int> id(0, 7);
            out.category_id = id(rng);
          }
          return out;
        } else if constexpr (std::is_same_v<T, ColorRangeMask>) {
          ColorRangeMask out = m;
          for (Lab& s : out.samples) {
            s.l = jitter(rng, s.l, sigma, 0.0, 100.0);
            s.a = jitter(rng, s.a, sigma, -100.0, 100.0);
            s.b = jitter(rng, s.b, sigma, -100.0, 100.0);
          }
          return out;
        } else {
          LuminanceRangeMask out = m;
          out.l_min = jitter(rng, m.l_min, sigma, 0.0, 1.0);
          out.l_max = jitter(rng, m.l_max, sigma, 0.0, 1.0);
          if (out.l_min > out.l_max) std::swap(out.l_min, out.l_max);
          if (out.l_max - out.l_min < 1e-3)
            out.l_max = clamp(out.l_min + 1e-3, 0.0, 1.0), out.l_min = out.l_max - 1e-3;
          return out;
        }
      },
      mask);
}

RocDocument perturb(Rng& rng, const RocDocument& doc, double sigma,
                    const ToolCatalog& catalog) {
  RocDocument out = doc;
  for (ToolInvocation& tool : out.tools) {
    const ToolSchema* schema = catalog.find(tool.name);
    for (auto& [key, value] : tool.params) {
      const ParamSchema* ps = nullptr;
      if (schema) {
        const auto it = schema->params.find(key);
        if (it != schema->params.end()) ps = &it->second;
      }
      if (auto* v = std::get_if<double>(&value)) {
        const double lo = ps ? ps->min : *v - 1.0;
        const double hi = ps ? ps->max : *v + 1.0;
        value = jitter(rng, *v, sigma, lo, hi);
      } else if (auto* token = std::get_if<std::string>(&value)) {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (ps && !ps->allowed.empty() && coin(rng) < sigma * 0.5) {
          std::uniform_int_distribution<std::size_t> pick(0, ps->allowed.size() - 1);
          *token = ps->allowed[pick(rng)];
        }
      } else if (auto* curve = std::get_if<Curve>(&value)) {
        for (CurvePoint& p : *curve) p.y = jitter(rng, p.y, sigma, 0.0, 1.0);
      }
    }
    if (tool.mask)
      tool.mask = perturb_mask(rng, *tool.mask, sigma, catalog.defaults);
  }
  return out;
}

}  // namespace

std::vector<GrpoStep> run_grpo_sim(const Image& src, const RocDocument& tgt,
                                   const Image& tgt_img,
                                   const ToolCatalog& catalog,
                                   const GrpoSimConfig& config,
                                   const RenderOptions& options) {
  Rng rng(config.seed);
  RocDocument best = perturb(rng, tgt, config.sigma0 * 2.0, catalog);
  double best_reward = total_reward(wrap_agent_response(best), tgt, src,
                                    tgt_img, catalog, options, config.gamma)
                           .total;

  std::vector<GrpoStep> trace;
  for (int step = 0; step < config.steps; ++step) {
    const double frac = config.steps > 1
                            ? static_cast<double>(step) / (config.steps - 1)
                            : 1.0;
    const double sigma =
        std::max(config.sigma_floor, config.sigma0 * (1.0 - frac));

    std::vector<RocDocument> group;
    group.push_back(best);  // elite
    for (int i = 1; i < config.group_size; ++i)
      group.push_back(perturb(rng, best, sigma, catalog));

    std::vector<double> rewards;
    rewards.reserve(group.size());
    for (const RocDocument& candidate : group)
      rewards.push_back(total_reward(wrap_agent_response(candidate), tgt, src,
                                     tgt_img, catalog, options, config.gamma)
                            .total);

    GrpoStep entry;
    entry.step = step;
    entry.sigma = sigma;
    entry.group = group_advantages(rewards);
    double sum = 0.0;
    for (double r : rewards) sum += r;
    entry.mean_reward = sum / static_cast<double>(rewards.size());

    const auto max_it = std::max_element(rewards.begin(), rewards.end());
    const std::size_t max_i = static_cast<std::size_t>(max_it - rewards.begin());
    if (*max_it > best_reward) {
      best_reward = *max_it;
      best = group[max_i];
    }
    entry.best_reward = best_reward;
    trace.push_back(std::move(entry));
  }
  return trace;
}

}  // namespace retouch
