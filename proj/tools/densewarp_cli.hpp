#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data or
// format error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "densewarp/densewarp.hpp"
#include "densewarp/synth_json.hpp"

namespace densewarp::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Argument combinations CLI11 cannot express declaratively.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LogLevel { Quiet, Info, Debug };

class Log {
 public:
  Log(std::ostream& sink, LogLevel level) : sink_(sink), level_(level) {}
  void info(const std::string& msg) const {
    if (level_ != LogLevel::Quiet) sink_ << "[info] " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ == LogLevel::Debug) sink_ << "[debug] " << msg << '\n';
  }
  void warn(const std::string& msg) const {
    if (level_ != LogLevel::Quiet) sink_ << "[warn] " << msg << '\n';
  }

 private:
  std::ostream& sink_;
  LogLevel level_;
};

namespace detail {

namespace fs = std::filesystem;
using nlohmann::json;

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Plane document: {"width": W, "height": H, "data": [row-major values]}.
inline RealPlane read_plane(const fs::path& path) {
  const json j = read_json(path);
  try {
    const int w = j.at("width").get<int>();
    const int h = j.at("height").get<int>();
    const auto data = j.at("data").get<std::vector<double>>();
    RealPlane plane(w, h);
    if (data.size() != plane.size()) {
      throw FormatError("'" + path.string() + "': data holds " + std::to_string(data.size()) +
                        " values, expected " + std::to_string(plane.size()));
    }
    for (std::size_t k = 0; k < data.size(); ++k) plane.pixels()[k] = static_cast<float>(data[k]);
    return plane;
  } catch (const json::exception& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

inline LabelPlane read_labels(const fs::path& path) {
  const RealPlane plane = read_plane(path);
  LabelPlane labels(plane.width(), plane.height());
  for (std::size_t k = 0; k < plane.size(); ++k) {
    const float v = plane.pixels()[k];
    if (v != std::floor(v) || v < 0.0F || v > static_cast<float>(kPartCount)) {
      throw FormatError("'" + path.string() + "': label " + std::to_string(v) +
                        " is not an integer in [0,24]");
    }
    labels.pixels()[k] = static_cast<std::uint8_t>(v);
  }
  return labels;
}

/// Logit document: {"classes": 25, "width": W, "height": H, "data": [...]},
/// class-major.
inline LogitStack read_logits(const fs::path& path) {
  const json j = read_json(path);
  try {
    const int classes = j.value("classes", LogitStack::kClasses);
    if (classes != LogitStack::kClasses) {
      throw FormatError("'" + path.string() + "': classes must be 25, got " + std::to_string(classes));
    }
    LogitStack logits(j.at("width").get<int>(), j.at("height").get<int>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != logits.values().size()) {
      throw FormatError("'" + path.string() + "': logit count does not match 25 x width x height");
    }
    for (double v : data) {
      if (!std::isfinite(v)) throw FormatError("'" + path.string() + "': non-finite logit");
    }
    logits.values() = data;
    return logits;
  } catch (const json::exception& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

inline std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Color-codes one atlas part: valid texels show their payload as
/// (x / (W-1), y / (H-1), 0), invalid texels are magenta.
inline RgbImage render_atlas_part(const UvAtlas& atlas, int part) {
  const int r = atlas.resolution();
  RgbImage out(r, r, Rgb{1.0F, 0.0F, 1.0F});
  const double sx = std::max(1, atlas.source_width() - 1);
  const double sy = std::max(1, atlas.source_height() - 1);
  for (int b = 0; b < r; ++b) {
    for (int a = 0; a < r; ++a) {
      const auto& t = atlas.at(part, a, b);
      if (t) out(a, b) = Rgb{static_cast<float>(t->x / sx), static_cast<float>(t->y / sy), 0.0F};
    }
  }
  return out;
}

}  // namespace detail

/// Parses `args` (without the program name) and runs the chosen subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  using nlohmann::json;

  CLI::App app{"Garment warping through DensePose UV correspondence", "densewarp"};
  app.set_version_flag("--version", std::string("densewarp ") + kVersion);
  app.require_subcommand(1);

  int threads = 1;
  std::string log_level = "info";
  app.add_option("--threads", threads, "Worker threads for per-pixel kernels")
      ->check(CLI::Range(1, 256));
  app.add_option("--log-level", log_level, "quiet, info or debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));

  // warp
  struct {
    std::string garment, garment_iuv, garment_mask, person_iuv, query_mask, out, out_validity;
    int resolution = kDefaultResolution;
    bool no_inpaint = false, no_grid = false;
  } warp;
  auto* warp_cmd = app.add_subcommand("warp", "Warp a garment onto a person's DensePose");
  warp_cmd->add_option("--garment", warp.garment, "Garment RGB PNG")->required();
  warp_cmd->add_option("--garment-iuv", warp.garment_iuv, "Garment DensePose (.iuv or PNG)")->required();
  warp_cmd->add_option("--garment-mask", warp.garment_mask, "Garment foreground mask PNG")->required();
  warp_cmd->add_option("--person-iuv", warp.person_iuv, "Person DensePose (.iuv or PNG)")->required();
  warp_cmd->add_option("--query-mask", warp.query_mask, "Refined query mask PNG")->required();
  warp_cmd->add_option("--resolution", warp.resolution, "UV atlas texels per side")->check(CLI::Range(1, 4096));
  warp_cmd->add_flag("--no-inpaint", warp.no_inpaint, "Disable query-guided nearest-neighbor fill");
  warp_cmd->add_flag("--no-grid-warp", warp.no_grid, "Scatter colors instead of coordinates");
  warp_cmd->add_option("--out", warp.out, "Warped garment PNG")->required();
  warp_cmd->add_option("--out-validity", warp.out_validity, "Validity mask PNG");

  // mask
  auto* mask_cmd = app.add_subcommand("mask", "Mask utilities");
  mask_cmd->require_subcommand(1);

  struct {
    std::string in, out;
    RefineParams params;
  } refine;
  auto* refine_cmd = mask_cmd->add_subcommand("refine", "Fill holes and smooth a coarse mask");
  refine_cmd->add_option("--in", refine.in, "Coarse mask PNG")->required();
  refine_cmd->add_option("--out", refine.out, "Refined mask PNG")->required();
  refine_cmd->add_option("--close", refine.params.close_radius, "Closing disk radius")->check(CLI::NonNegativeNumber);
  refine_cmd->add_option("--min-hole", refine.params.min_hole_area, "Fill holes smaller than this area");
  refine_cmd->add_option("--smooth", refine.params.smooth_radius, "Smoothing radius")->check(CLI::NonNegativeNumber);

  struct {
    int w = 192, h = 256;
    std::uint64_t seed = 0;
    std::string out;
  } freeform;
  auto* freeform_cmd = mask_cmd->add_subcommand("freeform", "Random brush-stroke mask");
  freeform_cmd->set_help_flag("--help", "Print this help message and exit");
  freeform_cmd->add_option("--w", freeform.w, "Width")->check(CLI::PositiveNumber);
  freeform_cmd->add_option("--h", freeform.h, "Height")->check(CLI::PositiveNumber);
  freeform_cmd->add_option("--seed", freeform.seed, "Random seed");
  freeform_cmd->add_option("--out", freeform.out, "Output PNG")->required();

  struct {
    std::string garment_mask, garment_iuv, person_iuv, out;
    int resolution = 32;
  } coarse;
  auto* coarse_cmd = mask_cmd->add_subcommand("coarse", "Naive DensePose transfer of the garment mask");
  coarse_cmd->add_option("--garment-mask", coarse.garment_mask, "Garment mask PNG")->required();
  coarse_cmd->add_option("--garment-iuv", coarse.garment_iuv, "Garment DensePose")->required();
  coarse_cmd->add_option("--person-iuv", coarse.person_iuv, "Person DensePose")->required();
  coarse_cmd->add_option("--resolution", coarse.resolution, "UV texels per side")->check(CLI::Range(1, 4096));
  coarse_cmd->add_option("--out", coarse.out, "Coarse mask PNG")->required();

  struct {
    std::string person_iuv, validity, out;
  } arm;
  auto* arm_cmd = mask_cmd->add_subcommand("arm", "Arm/hand pixels not covered by the warped garment");
  arm_cmd->add_option("--person-iuv", arm.person_iuv, "Person DensePose")->required();
  arm_cmd->add_option("--validity", arm.validity, "Warp validity mask PNG")->required();
  arm_cmd->add_option("--out", arm.out, "Arm mask PNG")->required();

  // metrics
  struct {
    std::string pred_dir, gt_dir, warped_mask_dir, gt_mask_dir, json_path;
  } metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "SSIM, NM-SSIM and mIoU over paired PNG folders");
  metrics_cmd->add_option("--pred-dir", metrics.pred_dir, "Predicted images")->required();
  metrics_cmd->add_option("--gt-dir", metrics.gt_dir, "Ground-truth images")->required();
  auto* wm = metrics_cmd->add_option("--warped-mask-dir", metrics.warped_mask_dir, "Warped garment masks");
  auto* gm = metrics_cmd->add_option("--gt-mask-dir", metrics.gt_mask_dir, "Ground-truth garment masks");
  wm->needs(gm);
  gm->needs(wm);
  metrics_cmd->add_option("--json", metrics.json_path, "Report path");

  // loss-eval
  struct {
    std::string kind;
    std::vector<std::string> inputs;
    bool json_out = false;
    bool ignore_background = false;
    std::vector<double> weights;
  } loss;
  auto* loss_cmd = app.add_subcommand("loss-eval", "Evaluate one training objective");
  loss_cmd->add_option("--kind", loss.kind, "ce, l1, tv, bce, l2reg or liuv")
      ->required()
      ->check(CLI::IsMember({"ce", "l1", "tv", "bce", "l2reg", "liuv"}));
  loss_cmd->add_option("--inputs", loss.inputs, "Input files, in the order listed in the README")
      ->required();
  loss_cmd->add_flag("--json", loss.json_out, "Print {\"loss\": value}");
  loss_cmd->add_flag("--ignore-background", loss.ignore_background, "ce: skip label-0 pixels");
  loss_cmd->add_option("--weights", loss.weights, "liuv: ce l1_u l1_v tv_u tv_v")->expected(5);

  // synth
  struct {
    std::string spec, out_dir;
  } synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic garment/person fixture");
  synth_cmd->add_option("--spec", synth.spec, "Fixture spec JSON")->required();
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();

  // uv-dump
  struct {
    std::string garment_iuv, garment_mask, person_iuv, query_mask, out;
    int resolution = kDefaultResolution;
    int part = 1;
  } dump;
  auto* dump_cmd = app.add_subcommand("uv-dump", "Render one atlas part as PNG");
  dump_cmd->add_option("--garment-iuv", dump.garment_iuv, "Garment DensePose")->required();
  dump_cmd->add_option("--garment-mask", dump.garment_mask, "Garment mask PNG")->required();
  dump_cmd->add_option("--part", dump.part, "Part index 1..24")->check(CLI::Range(1, kPartCount));
  dump_cmd->add_option("--resolution", dump.resolution, "UV texels per side")->check(CLI::Range(1, 4096));
  auto* dp = dump_cmd->add_option("--person-iuv", dump.person_iuv, "Person DensePose (enables fill)");
  auto* dq = dump_cmd->add_option("--query-mask", dump.query_mask, "Query mask PNG (enables fill)");
  dp->needs(dq);
  dq->needs(dp);
  dump_cmd->add_option("--out", dump.out, "Output PNG")->required();

  for (auto* sub : {warp_cmd, mask_cmd, metrics_cmd, loss_cmd, synth_cmd, dump_cmd}) sub->fallthrough();
  for (auto* sub : {refine_cmd, freeform_cmd, coarse_cmd, arm_cmd}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const Log log(err, log_level == "quiet" ? LogLevel::Quiet
                     : log_level == "debug" ? LogLevel::Debug
                                            : LogLevel::Info);
  const Exec exec{threads};

  try {
    if (*warp_cmd) {
      const RgbImage g = load_rgb(warp.garment);
      const DensePoseMap g_dp = load_iuv(warp.garment_iuv);
      const BinaryMask g_mask = load_mask(warp.garment_mask);
      const DensePoseMap p_dp = load_iuv(warp.person_iuv);
      const BinaryMask m_q = load_mask(warp.query_mask);
      WarpOptions options;
      options.resolution = warp.resolution;
      options.use_inpaint = !warp.no_inpaint;
      options.use_grid = !warp.no_grid;
      options.exec = exec;
      const WarpResult result = warp_garment(g, g_dp, g_mask, p_dp, m_q, options);
      if (!result.starved_parts.empty()) {
        std::string parts;
        for (int p : result.starved_parts) parts += " " + std::to_string(p);
        log.warn("query parts without garment source, left invalid:" + parts);
      }
      save_rgb(result.image, warp.out);
      if (!warp.out_validity.empty()) save_mask(result.validity, warp.out_validity);
      out << json{{"valid_pixels", result.validity.count()},
                  {"query_pixels", m_q.count()},
                  {"starved_parts", result.starved_parts}}
                 .dump()
          << '\n';
      return 0;
    }

    if (*refine_cmd) {
      save_mask(refine_mask(load_mask(refine.in), refine.params), refine.out);
      return 0;
    }
    if (*freeform_cmd) {
      BrushSpec spec;
      spec.seed = freeform.seed;
      save_mask(free_form_mask(freeform.w, freeform.h, spec), freeform.out);
      return 0;
    }
    if (*coarse_cmd) {
      const BinaryMask m = warp_coarse_mask(load_mask(coarse.garment_mask), load_iuv(coarse.garment_iuv),
                                            load_iuv(coarse.person_iuv), coarse.resolution, exec);
      save_mask(m, coarse.out);
      log.info("coarse mask pixels: " + std::to_string(m.count()));
      return 0;
    }
    if (*arm_cmd) {
      save_mask(derive_arm_mask(load_iuv(arm.person_iuv), load_mask(arm.validity)), arm.out);
      return 0;
    }

    if (*metrics_cmd) {
      const bool masked = !metrics.warped_mask_dir.empty();
      MetricAggregate agg;
      for (const auto& pred_path : detail::list_pngs(metrics.pred_dir)) {
        const auto name = pred_path.filename();
        const fs::path gt_path = fs::path(metrics.gt_dir) / name;
        if (!fs::exists(gt_path)) throw IoError("no ground truth for '" + name.string() + "' in " + metrics.gt_dir);
        const RgbImage pred = load_rgb(pred_path);
        const RgbImage gt = load_rgb(gt_path);
        MetricReport report;
        if (masked) {
          const BinaryMask wmask = load_mask(fs::path(metrics.warped_mask_dir) / name);
          const BinaryMask gmask = load_mask(fs::path(metrics.gt_mask_dir) / name);
          report = evaluate_pair(pred, gt, &wmask, &gmask, exec);
        } else {
          report = evaluate_pair(pred, gt, nullptr, nullptr, exec);
        }
        log.debug(name.string() + ": ssim " + detail::number(report.ssim));
        agg.add(report);
      }
      json report{{"pairs", agg.pairs()},
                  {"ssim", agg.ssim()},
                  {"nm_ssim", nullptr},
                  {"miou", nullptr},
                  {"nm_ssim_definition",
                   "sum of the per-pixel SSIM map over (warped mask OR gt garment mask) "
                   "divided by the total pixel count"}};
      if (auto v = agg.nm_ssim()) report["nm_ssim"] = *v;
      if (auto v = agg.miou()) report["miou"] = *v;
      const std::string text = report.dump(2);
      if (!metrics.json_path.empty()) detail::write_text(metrics.json_path, text + "\n");
      out << text << '\n';
      return 0;
    }

    if (*loss_cmd) {
      const auto& in = loss.inputs;
      const auto need = [&](std::size_t lo, std::size_t hi) {
        if (in.size() < lo || in.size() > hi) {
          throw UsageError("--kind " + loss.kind + " takes " + std::to_string(lo) +
                                (lo == hi ? "" : "-" + std::to_string(hi)) + " input files, got " +
                                std::to_string(in.size()));
        }
      };
      double value = 0.0;
      if (loss.kind == "ce") {
        need(2, 2);
        value = cross_entropy(detail::read_logits(in[0]), detail::read_labels(in[1]), loss.ignore_background);
      } else if (loss.kind == "l1") {
        need(2, 3);
        const auto pred = detail::read_plane(in[0]);
        const auto target = detail::read_plane(in[1]);
        value = in.size() == 3 ? l1(pred, target, load_mask(in[2])) : l1(pred, target);
      } else if (loss.kind == "tv") {
        need(1, 1);
        value = total_variation(detail::read_plane(in[0]));
      } else if (loss.kind == "bce") {
        need(2, 2);
        value = bce(detail::read_plane(in[0]), load_mask(in[1]));
      } else if (loss.kind == "l2reg") {
        need(1, 1);
        value = l2_mask_reg(detail::read_plane(in[0]));
      } else {
        need(6, 8);
        IuvLossWeights w;
        if (!loss.weights.empty()) w = {loss.weights[0], loss.weights[1], loss.weights[2], loss.weights[3], loss.weights[4]};
        const auto logits = detail::read_logits(in[0]);
        const auto u = detail::read_plane(in[1]);
        const auto v = detail::read_plane(in[2]);
        const auto it = detail::read_labels(in[3]);
        const auto ut = detail::read_plane(in[4]);
        const auto vt = detail::read_plane(in[5]);
        if (in.size() == 8) {
          value = l_iuv(logits, u, v, detail::read_plane(in[6]), detail::read_plane(in[7]), it, ut, vt, w).total;
        } else if (in.size() == 6) {
          value = l_iuv(logits, u, v, it, ut, vt, w).total;
        } else {
          throw UsageError("--kind liuv takes 6 or 8 input files");
        }
      }
      if (loss.json_out) {
        out << json{{"loss", value}}.dump() << '\n';
      } else {
        out << detail::number(value) << '\n';
      }
      return 0;
    }

    if (*synth_cmd) {
      const SynthSpec spec = synth_spec_from_json(detail::read_json(synth.spec));
      const SynthPair pair = generate(spec);
      const fs::path dir = synth.out_dir;
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
      save_rgb(pair.garment, dir / "garment.png");
      save_iuv(pair.garment_dp, dir / "garment.iuv");
      save_mask(pair.garment_mask, dir / "garment_mask.png");
      save_iuv(pair.person_dp, dir / "person.iuv");
      save_rgb(pair.gt_warp, dir / "gt_warp.png");
      save_mask(pair.gt_mask, dir / "gt_mask.png");
      log.info("wrote fixture to " + dir.string());
      return 0;
    }

    if (*dump_cmd) {
      const DensePoseMap g_dp = load_iuv(dump.garment_iuv);
      UvAtlas atlas = scatter_coords(g_dp, load_mask(dump.garment_mask), dump.resolution);
      if (!dump.person_iuv.empty()) {
        const auto query = project_mask_to_uv(load_iuv(dump.person_iuv), load_mask(dump.query_mask), dump.resolution);
        atlas = inpaint_nn(atlas, query, exec).atlas;
      }
      save_rgb(detail::render_atlas_part(atlas, dump.part), dump.out);
      log.info("part " + std::to_string(dump.part) + ": " + std::to_string(atlas.valid_count(dump.part)) +
               " valid texels");
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace densewarp::cli
