#include <irisloc/ingestion.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace irisloc {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view s, const std::string& what) {
  s = trim(s);
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw IngestError("invalid " + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string fixed4(double v) {
  if (std::abs(v) < 0.00005) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string_view to_string(Eye e) { return e == Eye::Left ? "left" : "right"; }
std::string_view to_string(Cohort c) { return c == Cohort::Alcohol ? "alcohol" : "no_alcohol"; }
std::string_view to_string(RegionClass c) {
  switch (c) {
    case RegionClass::Sclera: return "sclera";
    case RegionClass::Iris: return "iris";
    case RegionClass::Pupil: return "pupil";
  }
  return "pupil";
}

Eye eye_from_string(std::string_view s) {
  const auto l = lower(trim(s));
  if (l == "left") return Eye::Left;
  if (l == "right") return Eye::Right;
  throw IngestError("unknown eye '" + std::string(s) + "'");
}

Cohort cohort_from_string(std::string_view s) {
  const auto l = lower(trim(s));
  if (l == "alcohol") return Cohort::Alcohol;
  if (l == "no_alcohol") return Cohort::NoAlcohol;
  throw IngestError("unknown cohort '" + std::string(s) + "'");
}

RegionClass region_class_from_string(std::string_view s) {
  const auto l = lower(trim(s));
  if (l == "sclera") return RegionClass::Sclera;
  if (l == "iris") return RegionClass::Iris;
  if (l == "pupil") return RegionClass::Pupil;
  throw IngestError("unknown class '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Annotations

std::vector<Annotation> parse_annotations(std::string_view json) {
  ojson doc;
  try {
    doc = ojson::parse(json.begin(), json.end());
  } catch (const ojson::parse_error& e) {
    throw IngestError(std::string("malformed annotation JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("_via_img_metadata")) doc = doc["_via_img_metadata"];
  if (!doc.is_object()) throw IngestError("annotation JSON must be an object of image entries");

  std::vector<Annotation> out;
  for (const auto& [key, entry] : doc.items()) {
    if (!entry.is_object()) throw IngestError("image '" + key + "': entry is not an object");
    Annotation ann;
    ann.image_id = entry.contains("filename") && entry["filename"].is_string()
                       ? entry["filename"].get<std::string>()
                       : key;
    const auto fail = [&](std::size_t idx, const std::string& why) {
      return IngestError("image '" + ann.image_id + "' region " + std::to_string(idx) + ": " + why);
    };

    std::vector<ojson> regions;
    if (entry.contains("regions")) {
      const auto& r = entry["regions"];
      if (r.is_array()) {
        regions.assign(r.begin(), r.end());
      } else if (r.is_object()) {
        for (const auto& [k, v] : r.items()) regions.push_back(v);
      } else {
        throw IngestError("image '" + ann.image_id + "': regions must be an array");
      }
    }

    for (std::size_t i = 0; i < regions.size(); ++i) {
      const auto& reg = regions[i];
      if (!reg.is_object() || !reg.contains("shape_attributes")) {
        throw fail(i, "missing shape_attributes");
      }
      const auto& shape = reg["shape_attributes"];
      if (!shape.contains("name") || shape["name"] != "polygon") {
        throw fail(i, "shape is not a polygon");
      }
      if (!shape.contains("all_points_x") || !shape.contains("all_points_y") ||
          !shape["all_points_x"].is_array() || !shape["all_points_y"].is_array()) {
        throw fail(i, "missing all_points_x/all_points_y");
      }
      const auto& xs = shape["all_points_x"];
      const auto& ys = shape["all_points_y"];
      if (xs.size() != ys.size()) throw fail(i, "all_points_x and all_points_y lengths differ");
      if (xs.size() < 3) {
        throw fail(i, "polygon has " + std::to_string(xs.size()) + " vertices, need at least 3");
      }

      const ojson attrs = reg.contains("region_attributes") ? reg["region_attributes"] : ojson::object();
      if (!attrs.contains("class") || !attrs["class"].is_string()) {
        throw fail(i, "missing \"class\" attribute");
      }
      if (!attrs.contains("eye") || !attrs["eye"].is_string()) {
        throw fail(i, "missing \"eye\" attribute");
      }

      Region region;
      try {
        region.cls = region_class_from_string(attrs["class"].get<std::string>());
        region.eye = eye_from_string(attrs["eye"].get<std::string>());
        for (std::size_t k = 0; k < xs.size(); ++k) {
          region.polygon.emplace_back(xs[k].get<double>(), ys[k].get<double>());
        }
      } catch (const IngestError& e) {
        throw fail(i, e.what());
      } catch (const ojson::exception& e) {
        throw fail(i, std::string("non-numeric vertex: ") + e.what());
      }
      ann.regions.push_back(std::move(region));
    }
    out.push_back(std::move(ann));
  }
  return out;
}

void fill_polygon(BitGrid& bits, const std::vector<Eigen::Vector2d>& polygon) {
  const Eigen::Index h = bits.rows();
  const Eigen::Index w = bits.cols();
  const std::size_t n = polygon.size();
  if (n == 0) return;
  constexpr double kEps = 1e-9;

  double ymin = polygon[0].y();
  double ymax = ymin;
  for (const auto& p : polygon) {
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const auto row_lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(ymin - kEps)));
  const auto row_hi = std::min<Eigen::Index>(h - 1, static_cast<Eigen::Index>(std::floor(ymax + kEps)));

  auto paint = [&](Eigen::Index y, double xa, double xb) {
    const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(xa - kEps)));
    const auto hi = std::min<Eigen::Index>(w - 1, static_cast<Eigen::Index>(std::floor(xb + kEps)));
    for (Eigen::Index x = lo; x <= hi; ++x) bits(y, x) = true;
  };

  std::vector<double> xs;
  for (Eigen::Index y = row_lo; y <= row_hi; ++y) {
    const double yc = static_cast<double>(y);
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = polygon[i];
      const auto& b = polygon[(i + 1) % n];
      if (a.y() == b.y()) {
        if (std::abs(a.y() - yc) < kEps) paint(y, std::min(a.x(), b.x()), std::max(a.x(), b.x()));
        continue;
      }
      const double lo = std::min(a.y(), b.y());
      const double hi = std::max(a.y(), b.y());
      if (yc < lo - kEps || yc > hi + kEps) continue;
      const double x = a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      // Boundary points that land on a pixel center are inside.
      if (std::abs(x - std::round(x)) < kEps) paint(y, std::round(x), std::round(x));
      // Half-open crossing rule keeps the even-odd parity right at vertices.
      if (yc >= lo && yc < hi) xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) paint(y, xs[k], xs[k + 1]);
  }
}

LabelMask rasterize(const Annotation& ann, int width, int height, std::optional<Eye> eye) {
  LabelMask out(width, height);
  LabelGrid grid = out.grid();
  for (const RegionClass cls : {RegionClass::Sclera, RegionClass::Iris, RegionClass::Pupil}) {
    const Label label = cls == RegionClass::Sclera ? Label::Sclera
                        : cls == RegionClass::Iris ? Label::Iris
                                                   : Label::Pupil;
    for (const auto& region : ann.regions) {
      if (region.cls != cls) continue;
      if (eye && region.eye != *eye) continue;
      BitGrid bits = BitGrid::Constant(height, width, false);
      fill_polygon(bits, region.polygon);
      grid = bits.select(LabelGrid::Constant(height, width, static_cast<std::uint8_t>(label)), grid);
    }
  }
  return LabelMask(std::move(grid));
}

// ---------------------------------------------------------------------------
// Sessions

void SessionMeta::validate() const {
  if (subject_id.empty()) throw IngestError("manifest: empty subject_id");
  if (subject_id.find_first_of(",\n\r") != std::string::npos) {
    throw IngestError("manifest: subject_id must not contain commas or newlines");
  }
  if (session < 0 || session > kMaxSession) {
    throw IngestError("manifest: session " + std::to_string(session) +
                      " outside protocol range 0-" + std::to_string(kMaxSession));
  }
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw IngestError("manifest: frame_rate must be positive");
  }
}

SessionMeta parse_manifest(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw IngestError("manifest line " + std::to_string(line_no) + ": expected key=value");
    }
    kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  auto require = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IngestError(std::string("manifest: missing key ") + key);
    return it->second;
  };

  SessionMeta meta;
  meta.subject_id = require("subject_id");
  meta.session = parse_number<int>(require("session"), "session");
  meta.eye = eye_from_string(require("eye"));
  meta.cohort = cohort_from_string(require("cohort"));
  if (const auto it = kv.find("frame_rate"); it != kv.end()) {
    meta.frame_rate = parse_number<double>(it->second, "frame_rate");
  }
  meta.validate();
  return meta;
}

std::string write_manifest(const SessionMeta& meta) {
  std::ostringstream out;
  out << "subject_id=" << meta.subject_id << "\n"
      << "session=" << meta.session << "\n"
      << "eye=" << to_string(meta.eye) << "\n"
      << "cohort=" << to_string(meta.cohort) << "\n"
      << "frame_rate=" << fixed4(meta.frame_rate) << "\n";
  return out.str();
}

std::vector<std::pair<std::int64_t, fs::path>> list_frame_files(const fs::path& dir) {
  std::vector<std::pair<std::int64_t, fs::path>> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(),
                                     [](unsigned char c) { return std::isdigit(c); })) {
      continue;
    }
    std::int64_t idx = 0;
    const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), idx);
    if (ec != std::errc()) continue;
    out.emplace_back(idx, entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

SessionRecord load_session(const fs::path& dir, const LocalizationConfig& cfg) {
  cfg.validate();
  if (!fs::is_directory(dir)) throw IngestError("session directory not found: " + dir.string());
  const fs::path manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) throw IngestError("missing manifest: " + manifest_path.string());

  SessionRecord rec;
  try {
    rec.meta = parse_manifest(read_text_file(manifest_path));
  } catch (const IngestError& e) {
    throw IngestError(manifest_path.string() + ": " + e.what());
  }

  const auto files = list_frame_files(dir);
  std::vector<LabelMask> masks;
  masks.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (i > 0) {
      for (auto missing = files[i - 1].first + 1; missing < files[i].first; ++missing) {
        rec.gaps.push_back(missing);
        rec.warnings.push_back("gap in frame indices at " + std::to_string(missing));
      }
    }
    masks.push_back(read_mask_file(files[i].second.string()));
  }

  // Frames are independent; fit them on a small worker pool.
  std::vector<std::optional<FrameMeasurement>> fits(masks.size());
  std::vector<std::string> failures(masks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < masks.size(); i = next++) {
      try {
        fits[i] = mixed_fit(masks[i], cfg);
      } catch (const EmptyEye& e) {
        failures[i] = e.what();
      } catch (const NoCircle& e) {
        failures[i] = e.what();
      } catch (const DegenerateFit& e) {
        failures[i] = e.what();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(masks.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto idx = files[i].first;
    if (!fits[i]) {
      rec.gaps.push_back(idx);
      rec.warnings.push_back("frame " + std::to_string(idx) + " not localized: " + failures[i]);
      continue;
    }
    FrameMeasurement m = *fits[i];
    m.frame_idx = idx;
    m.t = static_cast<double>(idx) / rec.meta.frame_rate;
    if (m.inverted_geometry) {
      rec.warnings.push_back("frame " + std::to_string(idx) + ": pupil larger than iris");
    }
    rec.frames.push_back(m);
  }
  std::sort(rec.gaps.begin(), rec.gaps.end());
  return rec;
}

std::string write_measurements_csv(const SessionRecord& rec) {
  std::ostringstream out;
  out << kMeasurementsHeader << "\n";
  for (const auto& f : rec.frames) {
    out << rec.meta.subject_id << ',' << rec.meta.session << ',' << to_string(rec.meta.eye) << ','
        << to_string(rec.meta.cohort) << ',' << f.frame_idx << ',' << fixed4(f.t) << ','
        << fixed4(f.pupil.cx) << ',' << fixed4(f.pupil.cy) << ',' << fixed4(f.pupil.rx) << ','
        << fixed4(f.pupil.ry) << ',' << fixed4(f.iris.cx) << ',' << fixed4(f.iris.cy) << ','
        << fixed4(f.iris.rx) << ',' << fixed4(f.iris.ry) << ',' << fixed4(f.ratio) << ','
        << fixed4(f.openness) << ',' << to_string(f.method) << "\n";
  }
  return out.str();
}

std::vector<SessionRecord> parse_measurements_csv(std::string_view csv) {
  auto lines = split(csv, '\n');
  if (lines.empty() || trim(lines[0]) != kMeasurementsHeader) {
    throw IngestError("measurements CSV: unexpected header");
  }
  std::vector<SessionRecord> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::string where = "measurements CSV line " + std::to_string(ln + 1);
    if (f.size() != 17) throw IngestError(where + ": expected 17 fields");
    try {
      SessionMeta meta;
      meta.subject_id = std::string(f[0]);
      meta.session = parse_number<int>(f[1], "session");
      meta.eye = eye_from_string(f[2]);
      meta.cohort = cohort_from_string(f[3]);
      meta.validate();

      FrameMeasurement m;
      m.frame_idx = parse_number<std::int64_t>(f[4], "frame_idx");
      m.t = parse_number<double>(f[5], "t");
      m.pupil = {parse_number<double>(f[6], "pupil_cx"), parse_number<double>(f[7], "pupil_cy"),
                 parse_number<double>(f[8], "pupil_rx"), parse_number<double>(f[9], "pupil_ry")};
      m.iris = {parse_number<double>(f[10], "iris_cx"), parse_number<double>(f[11], "iris_cy"),
                parse_number<double>(f[12], "iris_rx"), parse_number<double>(f[13], "iris_ry")};
      m.ratio = parse_number<double>(f[14], "ratio");
      m.openness = parse_number<double>(f[15], "openness");
      m.method = method_from_string(trim(f[16]));
      m.inverted_geometry = m.pupil.mean_radius() > m.iris.mean_radius();

      auto it = std::find_if(out.begin(), out.end(), [&](const SessionRecord& r) {
        return r.meta.subject_id == meta.subject_id && r.meta.session == meta.session &&
               r.meta.eye == meta.eye && r.meta.cohort == meta.cohort;
      });
      if (it == out.end()) {
        out.push_back(SessionRecord{meta, {}, {}, {}});
        it = std::prev(out.end());
      }
      if (!it->frames.empty() && m.frame_idx <= it->frames.back().frame_idx) {
        throw IngestError("frame indices not strictly increasing");
      }
      it->frames.push_back(m);
    } catch (const Error& e) {
      throw IngestError(where + ": " + e.what());
    }
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IngestError("failed writing " + path.string());
  }
  fs::rename(tmp, path);
}

}  // namespace irisloc
