#include <irisloc/analysis.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

namespace irisloc {

namespace {

constexpr double kGridTolerance = 1e-9;

RadiusSeries frame_series(const SessionRecord& rec, bool ratio) {
  if (rec.frames.empty()) {
    throw AnalysisError("session " + rec.meta.subject_id + ": no localized frames");
  }
  RadiusSeries s;
  for (const auto& f : rec.frames) {
    s.grid.push_back(f.t);
    s.values.push_back(ratio ? pupil_iris_ratio(f.pupil, f.iris) : f.pupil.mean_radius());
  }
  return s;
}

std::optional<Eigen::ArrayXd> try_resample(const SessionRecord& rec, std::span<const double> grid,
                                           Quantity q) {
  try {
    const auto r = resample(frame_series(rec, q == Quantity::Ratio), grid);
    return Eigen::Map<const Eigen::ArrayXd>(r.values.data(), static_cast<Eigen::Index>(r.size()));
  } catch (const AnalysisError&) {
    return std::nullopt;
  }
}

}  // namespace

void RadiusSeries::validate() const {
  if (grid.size() != values.size()) throw AnalysisError("series grid and values differ in length");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(grid[i])) {
      throw AnalysisError("series holds non-finite values");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) throw AnalysisError("series grid not strictly increasing");
  }
}

Quantity quantity_from_string(std::string_view s) {
  if (s == "radius") return Quantity::Radius;
  if (s == "ratio") return Quantity::Ratio;
  throw InvalidArgument("unknown quantity '" + std::string(s) + "' (radius|ratio)");
}

Pooling pooling_from_string(std::string_view s) {
  if (s == "eye") return Pooling::PerEye;
  if (s == "subject") return Pooling::PerSubject;
  throw InvalidArgument("unknown pooling '" + std::string(s) + "' (eye|subject)");
}

RadiusSeries ratio_series(const SessionRecord& rec) { return frame_series(rec, true); }

RadiusSeries radius_series(const SessionRecord& rec) { return frame_series(rec, false); }

RadiusSeries resample(const RadiusSeries& series, std::span<const double> grid) {
  series.validate();
  if (series.size() < 2) throw AnalysisError("resample: need at least 2 samples");
  const double first = series.grid.front();
  const double last = series.grid.back();
  RadiusSeries out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  for (const double t : grid) {
    if (t < first - kGridTolerance || t > last + kGridTolerance) {
      throw AnalysisError("resample: t=" + std::to_string(t) + " outside [" +
                          std::to_string(first) + ", " + std::to_string(last) + "]");
    }
    const auto hi = std::lower_bound(series.grid.begin(), series.grid.end(), t);
    const auto j = static_cast<std::size_t>(hi - series.grid.begin());
    if (j < series.size() && std::abs(series.grid[j] - t) <= kGridTolerance) {
      out.values.push_back(series.values[j]);
    } else if (j == 0) {
      out.values.push_back(series.values.front());
    } else if (j == series.size()) {
      out.values.push_back(series.values.back());
    } else {
      const double t0 = series.grid[j - 1];
      const double t1 = series.grid[j];
      const double w = (t - t0) / (t1 - t0);
      out.values.push_back(series.values[j - 1] + w * (series.values[j] - series.values[j - 1]));
    }
  }
  return out;
}

GrandMean grand_mean(std::span<const SessionRecord> records, std::span<const double> grid,
                     Quantity quantity, Pooling pooling) {
  const auto n_grid = static_cast<Eigen::Index>(grid.size());
  std::vector<Eigen::ArrayXd> observations;

  if (pooling == Pooling::PerEye) {
    for (const auto& rec : records) {
      if (auto v = try_resample(rec, grid, quantity)) observations.push_back(std::move(*v));
    }
  } else {
    // subject id -> (sum over eyes, eye count), in first-seen order
    std::vector<std::string> order;
    std::map<std::string, std::pair<Eigen::ArrayXd, int>> by_subject;
    for (const auto& rec : records) {
      auto v = try_resample(rec, grid, quantity);
      if (!v) continue;
      auto [it, inserted] =
          by_subject.try_emplace(rec.meta.subject_id, Eigen::ArrayXd::Zero(n_grid), 0);
      if (inserted) order.push_back(rec.meta.subject_id);
      it->second.first += *v;
      it->second.second += 1;
    }
    for (const auto& id : order) {
      const auto& [sum, count] = by_subject.at(id);
      observations.push_back(sum / count);
    }
  }

  if (observations.empty()) throw AnalysisError("grand_mean: no resamplable records");
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(n_grid);
  for (const auto& o : observations) total += o;
  total /= static_cast<double>(observations.size());

  GrandMean gm;
  gm.n = observations.size();
  gm.series.grid.assign(grid.begin(), grid.end());
  gm.series.values.assign(total.data(), total.data() + total.size());
  return gm;
}

std::vector<double> uniform_grid(int n, double span) {
  if (n < 1 || !(span > 0.0)) throw InvalidArgument("uniform_grid: need n >= 1 and span > 0");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = span * k / n;
  return g;
}

CohortCurves cohort_curves(std::span<const SessionRecord> records, Quantity quantity,
                           Pooling pooling) {
  std::vector<SessionRecord> alcohol;
  std::vector<SessionRecord> sober;
  for (const auto& r : records) {
    (r.meta.cohort == Cohort::Alcohol ? alcohol : sober).push_back(r);
  }
  if (alcohol.empty()) throw AnalysisError("cohort_curves: no alcohol records");
  if (sober.empty()) throw AnalysisError("cohort_curves: no no_alcohol records");
  const auto grid = uniform_grid();
  const auto a = grand_mean(alcohol, grid, quantity, pooling);
  const auto s = grand_mean(sober, grid, quantity, pooling);
  return {a.series, s.series, a.n, s.n};
}

FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) throw AnalysisError("five_number_summary: no values");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back(),
          values.size()};
}

FiveNumber session_boxstats(std::span<const SessionRecord> records, int session) {
  std::vector<double> ratios;
  bool any = false;
  for (const auto& r : records) {
    if (r.meta.session != session) continue;
    any = true;
    for (const auto& f : r.frames) ratios.push_back(pupil_iris_ratio(f.pupil, f.iris));
  }
  if (!any || ratios.empty()) {
    throw AnalysisError("session_boxstats: no records for session " + std::to_string(session));
  }
  return five_number_summary(std::move(ratios));
}

std::string write_curves_csv(const CohortCurves& curves) {
  std::ostringstream out;
  out << "t,alcohol,no_alcohol,n_alcohol,n_no_alcohol\n";
  char buf[160];
  for (std::size_t i = 0; i < curves.alcohol.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%zu,%zu\n", curves.alcohol.grid[i],
                  curves.alcohol.values[i], curves.no_alcohol.values[i], curves.n_alcohol,
                  curves.n_no_alcohol);
    out << buf;
  }
  return out.str();
}

std::string write_boxstats_csv(int session, const FiveNumber& s) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "session,n,min,q1,median,q3,max\n%d,%zu,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                session, s.n, s.min, s.q1, s.median, s.q3, s.max);
  return buf;
}

}  // namespace irisloc
