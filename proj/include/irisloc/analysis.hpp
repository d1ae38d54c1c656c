#pragma once

#include <irisloc/ingestion.hpp>

#include <span>
#include <string>
#include <vector>

namespace irisloc {

/// Values sampled on a strictly increasing time grid (seconds).
struct RadiusSeries {
  std::vector<double> grid;
  std::vector<double> values;

  std::size_t size() const { return grid.size(); }
  void validate() const;
};

enum class Quantity { Radius, Ratio };
/// Per-eye treats every session record as one observation; per-subject first
/// averages the eyes of a subject.
enum class Pooling { PerEye, PerSubject };

Quantity quantity_from_string(std::string_view s);
Pooling pooling_from_string(std::string_view s);

/// Pupil-iris ratio per localized frame (mean radii). Throws on an empty record.
RadiusSeries ratio_series(const SessionRecord& rec);
/// Pupil mean radius per localized frame.
RadiusSeries radius_series(const SessionRecord& rec);

/// Linear interpolation onto `grid`, which must lie inside the source span.
RadiusSeries resample(const RadiusSeries& series, std::span<const double> grid);

struct GrandMean {
  RadiusSeries series;
  std::size_t n{0};
};

/// Pointwise mean over observations after resampling each onto `grid`.
/// Records that cannot be resampled are skipped; throws if none remain.
GrandMean grand_mean(std::span<const SessionRecord> records, std::span<const double> grid,
                     Quantity quantity, Pooling pooling = Pooling::PerEye);

inline constexpr int kCurvePoints = 100;
inline constexpr double kCurveSpan = 5.0;

/// n uniform instants k * span / n, k = 0..n-1.
std::vector<double> uniform_grid(int n = kCurvePoints, double span = kCurveSpan);

struct CohortCurves {
  RadiusSeries alcohol;
  RadiusSeries no_alcohol;
  std::size_t n_alcohol{0};
  std::size_t n_no_alcohol{0};
};

/// Grand mean per cohort on the shared uniform grid. Throws when a cohort is absent.
CohortCurves cohort_curves(std::span<const SessionRecord> records,
                           Quantity quantity = Quantity::Radius,
                           Pooling pooling = Pooling::PerEye);

struct FiveNumber {
  double min{0};
  double q1{0};
  double median{0};
  double q3{0};
  double max{0};
  std::size_t n{0};
};

/// Order statistics with quartiles interpolated linearly at (n - 1) * p.
FiveNumber five_number_summary(std::vector<double> values);

/// Five-number summary of every per-frame ratio pooled across records of `session`.
FiveNumber session_boxstats(std::span<const SessionRecord> records, int session);

/// t,alcohol,no_alcohol,n_alcohol,n_no_alcohol
std::string write_curves_csv(const CohortCurves& curves);
/// session,n,min,q1,median,q3,max
std::string write_boxstats_csv(int session, const FiveNumber& stats);

}  // namespace irisloc
