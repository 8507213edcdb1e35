// Command-line surface for the retouching toolkit: ROC validation, reward
// evaluation, deterministic rendering, image metrics, ROC-to-Lua
// translation, the A2L protocol server, and a desk-scale GRPO loop.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 protocol
// failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "retouch/a2l/script.hpp"
#include "retouch/a2l/server.hpp"
#include "retouch/a2l/transport.hpp"
#include "retouch/grpo_sim.hpp"
#include "retouch/metrics.hpp"
#include "retouch/png_io.hpp"
#include "retouch/render.hpp"
#include "retouch/reward.hpp"
#include "retouch/roc.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kIoFailure = 2;
constexpr int kProtocolFailure = 3;

struct Options {
  std::string catalog_path = "data/catalog.json";
  double gamma = 0.4;
  double alpha = 0.5;
  std::uint64_t seed = 0;
  std::string bind = "127.0.0.1:8875";
  std::size_t workers = 0;
  double timeout_seconds = 30.0;
  double tau_color = -1.0;  // <0: use catalog default
  double tau_lum = -1.0;
  int color_samples = -1;
};

std::string slurp(const std::string& path) {
  const auto bytes = retouch::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

retouch::ToolCatalog load_catalog_checked(const Options& opt) {
  return retouch::load_catalog_file(opt.catalog_path);
}

retouch::RenderOptions render_options(const Options& opt,
                                      const retouch::ToolCatalog& catalog) {
  retouch::RenderOptions render;
  render.color_tolerance =
      opt.tau_color > 0 ? opt.tau_color : catalog.defaults.color_tolerance;
  render.luminance_feather =
      opt.tau_lum >= 0 ? opt.tau_lum : catalog.defaults.luminance_feather;
  return render;
}

void print_kv(const std::string& key, double value) {
  std::cout << key << "=" << retouch::canonical_number(value) << "\n";
}

int cmd_validate(const Options& opt, const std::string& roc_path) {
  const auto catalog = load_catalog_checked(opt);
  try {
    retouch::parse_roc(slurp(roc_path), catalog);
  } catch (const retouch::RocError& e) {
    std::cout << "status=invalid\n";
    std::cout << "error=" << retouch::roc_errc_name(e.code()) << "\n";
    std::cout << "where=" << e.where() << "\n";
    std::cout << "detail=" << e.what() << "\n";
    return kValidationFailure;
  }
  std::cout << "status=ok\n";
  return kOk;
}

int cmd_reward(const Options& opt, const std::string& pred_path,
               const std::string& tgt_path, const std::string& src_image,
               const std::string& tgt_image, const std::string& seg_path) {
  const auto catalog = load_catalog_checked(opt);
  const std::string tgt_text = slurp(tgt_path);
  const retouch::RocDocument tgt = retouch::parse_roc(tgt_text, catalog);
  const retouch::Image src = retouch::read_png(src_image);
  const retouch::Image tgt_img = retouch::read_png(tgt_image);

  retouch::Segmentation seg;
  retouch::RenderOptions render = render_options(opt, catalog);
  if (!seg_path.empty()) {
    seg = retouch::read_segmentation(seg_path);
    render.segmentation = &seg;
  }

  // The prediction file may hold raw agent text or a bare ROC document;
  // a bare document is graded as a well-formed response.
  std::string raw = slurp(pred_path);
  const auto first = raw.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && raw[first] == '{')
    raw = "<think>(file)</think><answer>" + raw + "</answer>";

  const retouch::RewardBreakdown r = retouch::total_reward(
      raw, tgt, src, tgt_img, catalog, render, opt.gamma);
  print_kv("r_format", r.r_format);
  print_kv("r_name", r.r_name);
  print_kv("r_param_raw", r.r_param_raw);
  print_kv("r_value_raw", r.r_value_raw);
  print_kv("r_roa", r.r_roa);
  print_kv("cd", r.cd);
  print_kv("l", r.l);
  print_kv("r_pq", r.r_pq);
  print_kv("total", r.total);
  return kOk;
}

int cmd_render(const Options& opt, const std::string& roc_path,
               const std::string& image_in, const std::string& image_out,
               const std::string& seg_path) {
  const auto catalog = load_catalog_checked(opt);
  const retouch::RocDocument doc = retouch::parse_roc(slurp(roc_path), catalog);
  const retouch::Image src = retouch::read_png(image_in);

  retouch::Segmentation seg;
  retouch::RenderOptions render = render_options(opt, catalog);
  if (!seg_path.empty()) {
    seg = retouch::read_segmentation(seg_path);
    render.segmentation = &seg;
  }
  const retouch::Image out = retouch::apply_roc(src, doc, render);
  retouch::write_png(out, image_out);
  return kOk;
}

int cmd_metrics(const Options& opt, const std::string& image_a,
                const std::string& image_b, const std::string& region_path) {
  const retouch::Image a = retouch::read_png(image_a);
  const retouch::Image b = retouch::read_png(image_b);
  const double l1 = retouch::l1_distance(a, b);
  const double l2 = retouch::l2_distance(a, b);
  print_kv("l1", l1);
  print_kv("l1_x100", l1 * 100.0);
  print_kv("l2", l2);
  print_kv("l2_x1000", l2 * 1000.0);
  print_kv("cd", retouch::color_distribution_similarity(a, b));
  if (!region_path.empty()) {
    const retouch::MaskBuffer region = retouch::read_mask_png(region_path);
    const double wl1 = retouch::region_weighted_l1(a, b, region, opt.alpha);
    const double wl2 = retouch::region_weighted_l2(a, b, region, opt.alpha);
    print_kv("wl1", wl1);
    print_kv("wl1_x100", wl1 * 100.0);
    print_kv("wl2", wl2);
    print_kv("wl2_x1000", wl2 * 1000.0);
  }
  return kOk;
}

int cmd_translate(const Options& opt, const std::string& roc_path) {
  const auto catalog = load_catalog_checked(opt);
  const retouch::RocDocument doc = retouch::parse_roc(slurp(roc_path), catalog);
  std::cout << retouch::a2l::translate_roc_to_script(doc, catalog);
  return kOk;
}

int cmd_serve(const Options& opt, std::size_t max_sessions) {
  const auto catalog = load_catalog_checked(opt);

  const auto colon = opt.bind.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "bind address must be host:port\n";
    return kProtocolFailure;
  }
  const std::string host = opt.bind.substr(0, colon);
  const int port = std::stoi(opt.bind.substr(colon + 1));

  retouch::a2l::ServerConfig config;
  config.catalog = catalog;
  config.render = render_options(opt, catalog);
  config.workers = opt.workers;
  config.job_timeout = std::chrono::milliseconds(
      static_cast<long>(opt.timeout_seconds * 1000.0));

  retouch::a2l::Server server(std::move(config));
  retouch::a2l::TcpListener listener(host, static_cast<std::uint16_t>(port));
  std::cout << "listening=" << host << ":" << listener.port() << "\n";
  std::cout.flush();
  retouch::a2l::serve_tcp(server, listener, max_sessions);
  server.wait_idle();
  return kOk;
}

int cmd_grpo_sim(const Options& opt, const std::string& src_image,
                 const std::string& tgt_roc, const std::string& tgt_image,
                 int group_size, int steps, double sigma,
                 const std::string& seg_path) {
  const auto catalog = load_catalog_checked(opt);
  const retouch::RocDocument tgt = retouch::parse_roc(slurp(tgt_roc), catalog);
  const retouch::Image src = retouch::read_png(src_image);
  const retouch::Image tgt_img = retouch::read_png(tgt_image);

  retouch::Segmentation seg;
  retouch::RenderOptions render = render_options(opt, catalog);
  if (!seg_path.empty()) {
    seg = retouch::read_segmentation(seg_path);
    render.segmentation = &seg;
  }

  retouch::GrpoSimConfig config;
  config.group_size = group_size;
  config.steps = steps;
  config.seed = opt.seed;
  config.gamma = opt.gamma;
  if (sigma >= 0.0) config.sigma0 = sigma;

  const auto trace =
      retouch::run_grpo_sim(src, tgt, tgt_img, catalog, config, render);
  for (const retouch::GrpoStep& step : trace) {
    std::cout << "step=" << step.step
              << " sigma=" << retouch::canonical_number(step.sigma)
              << " mean_reward=" << retouch::canonical_number(step.mean_reward)
              << " best_reward=" << retouch::canonical_number(step.best_reward)
              << "\n";
    for (std::size_t i = 0; i < step.group.size(); ++i) {
      std::cout << "  candidate=" << i
                << " reward=" << retouch::canonical_number(step.group[i].reward)
                << " advantage="
                << retouch::canonical_number(step.group[i].advantage) << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-to-Lightroom retouching toolkit"};
  app.set_config("--config");

  Options opt;
  app.add_option("--catalog", opt.catalog_path, "Tool catalog JSON")
      ->envname("A2L_CATALOG");
  app.add_option("--gamma", opt.gamma, "PQ blend weight")->envname("A2L_GAMMA");
  app.add_option("--alpha", opt.alpha, "Region background weight")
      ->envname("A2L_ALPHA");
  app.add_option("--seed", opt.seed, "RNG seed")->envname("A2L_SEED");
  app.add_option("--bind", opt.bind, "Server bind address")->envname("A2L_BIND");
  app.add_option("--workers", opt.workers, "Worker threads (0 = auto)")
      ->envname("A2L_WORKERS");
  app.add_option("--timeout", opt.timeout_seconds, "Job timeout in seconds")
      ->envname("A2L_TIMEOUT");
  app.add_option("--tau-color", opt.tau_color, "Color-mask deltaE tolerance");
  app.add_option("--tau-lum", opt.tau_lum, "Luminance-mask feather");
  app.add_option("--color-samples", opt.color_samples,
                 "Color-range sample count");

  std::string roc_path, pred_path, tgt_path, src_image, tgt_image;
  std::string image_in, image_out, image_a, image_b;
  std::string seg_path, region_path;
  int group_size = 4, steps = 20;
  double sigma = -1.0;
  std::size_t max_sessions = 0;

  auto* validate = app.add_subcommand("validate", "Validate a ROC file");
  validate->add_option("roc", roc_path)->required();

  auto* reward = app.add_subcommand("reward", "Score a prediction");
  reward->add_option("pred", pred_path)->required();
  reward->add_option("tgt", tgt_path)->required();
  reward->add_option("src_image", src_image)->required();
  reward->add_option("tgt_image", tgt_image)->required();
  reward->add_option("--seg", seg_path, "Portrait segmentation PNG");

  auto* render = app.add_subcommand("render", "Apply a ROC to an image");
  render->add_option("roc", roc_path)->required();
  render->add_option("image_in", image_in)->required();
  render->add_option("image_out", image_out)->required();
  render->add_option("--seg", seg_path, "Portrait segmentation PNG");

  auto* metrics = app.add_subcommand("metrics", "Image fidelity metrics");
  metrics->add_option("image_a", image_a)->required();
  metrics->add_option("image_b", image_b)->required();
  metrics->add_option("--region", region_path, "Region mask PNG");

  auto* translate = app.add_subcommand("translate", "Emit the Lua script");
  translate->add_option("roc", roc_path)->required();

  auto* serve = app.add_subcommand("serve", "Run the A2L protocol server");
  serve->add_option("--max-sessions", max_sessions,
                    "Exit after N sessions (0 = unlimited)");

  auto* grpo = app.add_subcommand("grpo-sim", "Desk-scale GRPO reward loop");
  grpo->add_option("src_image", src_image)->required();
  grpo->add_option("tgt_roc", tgt_path)->required();
  grpo->add_option("tgt_image", tgt_image)->required();
  grpo->add_option("--group-size", group_size, "Candidates per step");
  grpo->add_option("--steps", steps, "Number of steps");
  grpo->add_option("--sigma", sigma, "Initial perturbation scale");
  grpo->add_option("--seg", seg_path, "Portrait segmentation PNG");

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (validate->parsed()) return cmd_validate(opt, roc_path);
    if (reward->parsed())
      return cmd_reward(opt, pred_path, tgt_path, src_image, tgt_image, seg_path);
    if (render->parsed())
      return cmd_render(opt, roc_path, image_in, image_out, seg_path);
    if (metrics->parsed()) return cmd_metrics(opt, image_a, image_b, region_path);
    if (translate->parsed()) return cmd_translate(opt, roc_path);
    if (serve->parsed()) return cmd_serve(opt, max_sessions);
    if (grpo->parsed())
      return cmd_grpo_sim(opt, src_image, tgt_path, tgt_image, group_size,
                          steps, sigma, seg_path);
  } catch (const retouch::IoError& e) {
    std::cerr << e.what() << "\n";
    return kIoFailure;
  } catch (const retouch::RocError& e) {
    std::cerr << e.what() << "\n";
    return kValidationFailure;
  } catch (const retouch::CatalogError& e) {
    std::cerr << e.what() << "\n";
    return kValidationFailure;
  } catch (const retouch::a2l::ScriptError& e) {
    std::cerr << e.what() << "\n";
    return kValidationFailure;
  } catch (const retouch::RenderError& e) {
    std::cerr << e.what() << "\n";
    return kValidationFailure;
  } catch (const retouch::RewardError& e) {
    std::cerr << e.what() << "\n";
    return kValidationFailure;
  } catch (const retouch::MetricError& e) {
    std::cerr << e.what() << "\n";
    return kValidationFailure;
  } catch (const retouch::a2l::TransportError& e) {
    std::cerr << e.what() << "\n";
    return kProtocolFailure;
  } catch (const retouch::a2l::FrameError& e) {
    std::cerr << e.what() << "\n";
    return kProtocolFailure;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kIoFailure;
  }
  return kOk;
}
