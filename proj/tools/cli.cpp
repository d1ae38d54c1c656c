#include "cli.hpp"

#include <irisloc/analysis.hpp>
#include <irisloc/ingestion.hpp>
#include <irisloc/metrics.hpp>
#include <irisloc/synth.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace irisloc::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSynthMarker = ".irisloc-synth";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T number(std::string_view s, const std::string& key) {
  s = trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw InvalidArgument("config: invalid value '" + std::string(s) + "' for " + key);
  }
  return v;
}

RadiusRange range_value(std::string_view s, const std::string& key) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) throw InvalidArgument("config: " + key + " needs min,max");
  return {number<int>(s.substr(0, comma), key), number<int>(s.substr(comma + 1), key)};
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) throw CLI::ValidationError("--size", "expected WxH, got " + s);
  int w = 0;
  int h = 0;
  const auto r1 = std::from_chars(s.data(), s.data() + x, w);
  const auto r2 = std::from_chars(s.data() + x + 1, s.data() + s.size(), h);
  if (r1.ec != std::errc() || r2.ec != std::errc() || r1.ptr != s.data() + x ||
      r2.ptr != s.data() + s.size() || w <= 0 || h <= 0) {
    throw CLI::ValidationError("--size", "expected WxH with positive integers, got " + s);
  }
  return {w, h};
}

struct ConfigFlags {
  std::string config_path;
  std::vector<int> pupil_range;
  std::vector<int> iris_range;
  std::optional<double> openness_threshold;
  std::optional<int> hough_stride;
  std::optional<double> horiz_ratio;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "key=value localization config")->check(CLI::ExistingFile);
    app.add_option("--pupil-range", pupil_range, "pupil radius search range MIN MAX")->expected(2);
    app.add_option("--iris-range", iris_range, "iris radius search range MIN MAX")->expected(2);
    app.add_option("--openness-threshold", openness_threshold, "Hough refit below this openness");
    app.add_option("--hough-stride", hough_stride, "Hough center stride in pixels");
    app.add_option("--horiz-ratio", horiz_ratio, "|Gy| > ratio*|Gx| marks a horizontal edge");
  }

  LocalizationConfig resolve() const {
    LocalizationConfig cfg;
    if (!config_path.empty()) cfg = parse_config(read_text_file(config_path), cfg);
    if (!pupil_range.empty()) cfg.pupil_radius_range = {pupil_range[0], pupil_range[1]};
    if (!iris_range.empty()) cfg.iris_radius_range = {iris_range[0], iris_range[1]};
    if (openness_threshold) cfg.openness_threshold = *openness_threshold;
    if (hough_stride) cfg.hough_center_stride = *hough_stride;
    if (horiz_ratio) cfg.horiz_ratio = *horiz_ratio;
    cfg.validate();
    return cfg;
  }
};

// Session sources under `dir`: the directory itself when it has a manifest,
// otherwise every child directory with a manifest and every *.csv file, sorted.
std::vector<SessionRecord> collect_sessions(const fs::path& dir, const LocalizationConfig& cfg) {
  if (!fs::is_directory(dir)) throw IngestError("sessions directory not found: " + dir.string());
  if (fs::exists(dir / kManifestName)) return {load_session(dir, cfg)};

  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());

  std::vector<SessionRecord> out;
  for (const auto& p : entries) {
    if (fs::is_directory(p) && fs::exists(p / kManifestName)) {
      out.push_back(load_session(p, cfg));
    } else if (fs::is_regular_file(p) && p.extension() == ".csv") {
      try {
        for (auto& r : parse_measurements_csv(read_text_file(p))) out.push_back(std::move(r));
      } catch (const IngestError& e) {
        throw IngestError(p.string() + ": " + e.what());
      }
    }
  }
  if (out.empty()) throw IngestError("no sessions found under " + dir.string());
  return out;
}

int cmd_synth(const fs::path& out_dir, const CohortSpec& base, const std::string& cohort) {
  std::vector<CohortSpec> specs;
  if (cohort == "alcohol" || cohort == "both") {
    specs.push_back(base);
    specs.back().cohort = Cohort::Alcohol;
  }
  if (cohort == "no_alcohol" || cohort == "both") {
    specs.push_back(base);
    specs.back().cohort = Cohort::NoAlcohol;
  }
  std::vector<SessionPlan> plans;
  for (const auto& s : specs) {
    for (auto& p : gen_cohort(s)) plans.push_back(std::move(p));
  }
  for (const auto& p : plans) {
    for (const auto& f : p.frames) f.validate();
  }

  if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !fs::exists(out_dir / kSynthMarker)) {
    throw IngestError("refusing to overwrite non-synthetic directory " + out_dir.string());
  }
  fs::path staging = out_dir;
  staging += ".partial";
  fs::remove_all(staging);
  try {
    fs::create_directories(staging);
    for (const auto& p : plans) write_session_dir(staging / session_dir_name(p.meta), p);
    write_text_file_atomic(staging / kSynthMarker, "");
  } catch (...) {
    fs::remove_all(staging);
    throw;
  }
  fs::remove_all(out_dir);
  fs::rename(staging, out_dir);
  return kExitOk;
}

int cmd_rasterize(const fs::path& json_path, const std::string& size, const fs::path& out_dir,
                  const std::string& eye) {
  const auto [w, h] = parse_size(size);
  const std::optional<Eye> eye_filter =
      eye.empty() ? std::nullopt : std::optional<Eye>(eye_from_string(eye));
  const auto anns = parse_annotations(read_text_file(json_path));

  std::vector<std::pair<fs::path, std::vector<std::uint8_t>>> files;
  for (const auto& a : anns) {
    const fs::path name = fs::path(a.image_id).filename().replace_extension(".pgm");
    files.emplace_back(out_dir / name, encode_mask(rasterize(a, w, h, eye_filter)));
  }
  fs::create_directories(out_dir);
  for (const auto& [path, bytes] : files) {
    write_text_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  return kExitOk;
}

int cmd_fit(const fs::path& masks, const LocalizationConfig& cfg, const fs::path& out,
            std::ostream& err) {
  const auto rec = load_session(masks, cfg);
  for (const auto& w : rec.warnings) err << "warning: " << masks.string() << ": " << w << "\n";
  write_text_file_atomic(out, write_measurements_csv(rec));
  return kExitOk;
}

int cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& out,
             const LocalizationConfig& cfg, double c) {
  if (!fs::is_directory(pred_dir)) throw IngestError("pred directory not found: " + pred_dir.string());
  if (!fs::is_directory(gt_dir)) throw IngestError("gt directory not found: " + gt_dir.string());

  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(gt_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") {
      rel.push_back(fs::relative(e.path(), gt_dir));
    }
  }
  std::sort(rel.begin(), rel.end());
  if (rel.empty()) throw IngestError("no .pgm masks under " + gt_dir.string());

  std::map<fs::path, std::map<std::int64_t, FrameMeasurement>> truth_cache;
  auto truth_for = [&](const fs::path& gt_file) -> std::optional<FrameMeasurement> {
    const fs::path parent = gt_file.parent_path();
    auto it = truth_cache.find(parent);
    if (it == truth_cache.end()) {
      std::map<std::int64_t, FrameMeasurement> frames;
      if (fs::exists(parent / kTruthName)) {
        for (const auto& r : parse_measurements_csv(read_text_file(parent / kTruthName))) {
          for (const auto& f : r.frames) frames[f.frame_idx] = f;
        }
      }
      it = truth_cache.emplace(parent, std::move(frames)).first;
    }
    std::int64_t idx = 0;
    const std::string stem = gt_file.stem().string();
    const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), idx);
    if (ec != std::errc() || ptr != stem.data() + stem.size()) return std::nullopt;
    const auto f = it->second.find(idx);
    if (f == it->second.end()) return std::nullopt;
    return f->second;
  };

  std::vector<PairIoU> ious;
  std::vector<FrameError> errors;
  for (const auto& r : rel) {
    const fs::path pred_path = pred_dir / r;
    if (!fs::exists(pred_path)) throw IngestError("missing prediction " + pred_path.string());
    const auto pred = read_mask_file(pred_path.string());
    const auto gt = read_mask_file((gt_dir / r).string());
    try {
      ious.push_back(pair_iou(pred, gt, c));
    } catch (const DimensionMismatch&) {
      throw DimensionMismatch(pred_path.string() + ": dimensions differ from ground truth");
    }
    try {
      const auto fit = mixed_fit(pred, cfg);
      const auto reference = truth_for(gt_dir / r);
      errors.push_back(frame_error(fit, reference ? *reference : mixed_fit(gt, cfg)));
    } catch (const EmptyEye&) {
    } catch (const NoCircle&) {
    }
  }
  const auto iou = summarize_iou(ious);
  std::optional<ErrorReport> err_report;
  if (!errors.empty()) err_report = aggregate(errors);
  write_text_file_atomic(out, write_report_csv(&iou, err_report ? &*err_report : nullptr));
  return kExitOk;
}

}  // namespace

LocalizationConfig parse_config(std::string_view text, LocalizationConfig cfg) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(trim(body.substr(0, eq)));
    const auto value = trim(body.substr(eq + 1));
    if (key == "pupil_radius_range") {
      cfg.pupil_radius_range = range_value(value, key);
    } else if (key == "iris_radius_range") {
      cfg.iris_radius_range = range_value(value, key);
    } else if (key == "openness_threshold") {
      cfg.openness_threshold = number<double>(value, key);
    } else if (key == "hough_center_stride") {
      cfg.hough_center_stride = number<int>(value, key);
    } else if (key == "horiz_ratio") {
      cfg.horiz_ratio = number<double>(value, key);
    } else {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": unknown key " + key);
    }
  }
  cfg.validate();
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pupil and iris localization from eye segmentation masks"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic session directories");
  std::string synth_out = "synth";
  std::string cohort = "both";
  std::string synth_size = "320x320";
  std::string synth_eye = "left";
  CohortSpec cspec;
  cspec.dynamics.dilation_offset = 2.0;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--subjects", cspec.n_subjects, "subjects per cohort")->check(CLI::PositiveNumber);
  synth->add_option("--cohort", cohort)->check(CLI::IsMember({"alcohol", "no_alcohol", "both"}));
  synth->add_option("--seed", cspec.seed);
  synth->add_option("--dilation", cspec.dynamics.dilation_offset, "alcohol pupil offset, px");
  synth->add_option("--base-radius", cspec.dynamics.base_radius, "resting pupil radius, px");
  synth->add_option("--constriction-rate", cspec.dynamics.constriction_rate, "1/s");
  synth->add_option("--initial-excess", cspec.dynamics.initial_excess, "px above base at t=0");
  synth->add_option("--iris-radius", cspec.iris_radius, "px");
  synth->add_option("--frames", cspec.frames)->check(CLI::PositiveNumber);
  synth->add_option("--fps", cspec.frame_rate)->check(CLI::PositiveNumber);
  synth->add_option("--session", cspec.session)->check(CLI::Range(0, kMaxSession));
  synth->add_option("--eye", synth_eye)->check(CLI::IsMember({"left", "right"}));
  synth->add_option("--jitter", cspec.boundary_jitter, "radial boundary jitter, px");
  synth->add_option("--size", synth_size, "canvas WxH");

  // rasterize
  auto* rast = app.add_subcommand("rasterize", "rasterize VIA polygon annotations to PGM masks");
  std::string ann_path;
  std::string rast_size;
  std::string rast_out;
  std::string rast_eye;
  rast->add_option("--annotations", ann_path)->required()->check(CLI::ExistingFile);
  rast->add_option("--size", rast_size, "WxH")->required();
  rast->add_option("--out", rast_out)->required();
  rast->add_option("--eye", rast_eye, "only regions of this eye")->check(CLI::IsMember({"left", "right"}));

  // fit
  auto* fit = app.add_subcommand("fit", "localize every frame of a session directory");
  std::string fit_masks;
  std::string fit_out = "measurements.csv";
  ConfigFlags fit_cfg;
  fit->add_option("--masks", fit_masks)->required();
  fit->add_option("--out", fit_out);
  fit_cfg.add_to(*fit);

  // eval
  auto* ev = app.add_subcommand("eval", "segmentation IoU and localization error report");
  std::string pred_dir;
  std::string gt_dir;
  std::string eval_out = "report.csv";
  double iou_c = kDefaultIouConstant;
  ConfigFlags eval_cfg;
  ev->add_option("--pred", pred_dir)->required();
  ev->add_option("--gt", gt_dir)->required();
  ev->add_option("--out", eval_out);
  ev->add_option("--iou-constant", iou_c)->check(CLI::PositiveNumber);
  eval_cfg.add_to(*ev);

  // grandmean
  auto* gm = app.add_subcommand("grandmean", "cohort grand-mean pupil curves");
  std::string gm_sessions;
  std::string gm_out = "curves.csv";
  std::string quantity = "radius";
  std::string pooling = "eye";
  ConfigFlags gm_cfg;
  gm->add_option("--sessions", gm_sessions)->required();
  gm->add_option("--out", gm_out);
  gm->add_option("--quantity", quantity)->check(CLI::IsMember({"radius", "ratio"}));
  gm->add_option("--pool", pooling)->check(CLI::IsMember({"eye", "subject"}));
  gm_cfg.add_to(*gm);

  // boxstats
  auto* bs = app.add_subcommand("boxstats", "five-number summary of per-frame pupil/iris ratios");
  std::string bs_sessions;
  std::string bs_out;
  int bs_session = 0;
  ConfigFlags bs_cfg;
  bs->add_option("--sessions", bs_sessions)->required();
  bs->add_option("--session", bs_session)->required()->check(CLI::Range(0, kMaxSession));
  bs->add_option("--out", bs_out, "also write the CSV here");
  bs_cfg.add_to(*bs);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*synth) {
      const auto [w, h] = parse_size(synth_size);
      cspec.width = w;
      cspec.height = h;
      cspec.eye = eye_from_string(synth_eye);
      return cmd_synth(synth_out, cspec, cohort);
    }
    if (*rast) return cmd_rasterize(ann_path, rast_size, rast_out, rast_eye);
    if (*fit) return cmd_fit(fit_masks, fit_cfg.resolve(), fit_out, err);
    if (*ev) return cmd_eval(pred_dir, gt_dir, eval_out, eval_cfg.resolve(), iou_c);
    if (*gm) {
      const auto records = collect_sessions(gm_sessions, gm_cfg.resolve());
      const auto curves =
          cohort_curves(records, quantity_from_string(quantity), pooling_from_string(pooling));
      write_text_file_atomic(gm_out, write_curves_csv(curves));
      return kExitOk;
    }
    if (*bs) {
      const auto records = collect_sessions(bs_sessions, bs_cfg.resolve());
      const auto csv = write_boxstats_csv(bs_session, session_boxstats(records, bs_session));
      if (!bs_out.empty()) write_text_file_atomic(bs_out, csv);
      out << csv;
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace irisloc::cli
