#pragma once

#include <irisloc/geometry.hpp>
#include <irisloc/mask.hpp>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace irisloc {

inline constexpr double kDefaultIouConstant = 1e-6;

/// Intersection area over union area of two boxes; 0 when the union is empty.
double box_iou(const BoundingBox& a, const BoundingBox& b);

/// sum(a AND b) / (sum(a OR b) + c). Throws DimensionMismatch.
double bitwise_iou(const BinaryMask& a, const BinaryMask& b, double c = kDefaultIouConstant);

/// Localization errors of one frame, in pixels.
struct FrameError {
  double pupil_center_l2{0};
  double iris_center_l2{0};
  double pupil_rx_l1{0};
  double pupil_ry_l1{0};
  double iris_rx_l1{0};
  double iris_ry_l1{0};

  std::array<double, 6> values() const {
    return {pupil_center_l2, iris_center_l2, pupil_rx_l1, pupil_ry_l1, iris_rx_l1, iris_ry_l1};
  }
};

inline constexpr std::array<const char*, 6> kFrameErrorNames{
    "pupil_center_l2", "iris_center_l2", "pupil_rx_l1", "pupil_ry_l1", "iris_rx_l1", "iris_ry_l1"};

FrameError frame_error(const FrameMeasurement& pred, const FrameMeasurement& gt);

struct MeanStd {
  double mean{0};
  double std{0};
};

/// Population mean and standard deviation; throws AnalysisError on empty input.
MeanStd mean_std(std::span<const double> values);

struct ErrorReport {
  std::array<MeanStd, 6> metrics;  // order of kFrameErrorNames
  std::size_t n{0};

  const MeanStd& pupil_center_l2() const { return metrics[0]; }
  const MeanStd& iris_center_l2() const { return metrics[1]; }
  const MeanStd& pupil_rx_l1() const { return metrics[2]; }
  const MeanStd& pupil_ry_l1() const { return metrics[3]; }
  const MeanStd& iris_rx_l1() const { return metrics[4]; }
  const MeanStd& iris_ry_l1() const { return metrics[5]; }
};

ErrorReport aggregate(std::span<const FrameError> errors);

struct IoUReport {
  MeanStd pupil;
  MeanStd iris;
  MeanStd sclera;
  /// Mean of the three class means; std of the per-pair class averages.
  MeanStd overall;
  std::size_t n{0};
};

/// Per-class IoU of one prediction/ground-truth pair.
struct PairIoU {
  double pupil{0};
  double iris{0};
  double sclera{0};
};

PairIoU pair_iou(const LabelMask& pred, const LabelMask& gt, double c = kDefaultIouConstant);

/// Reduces per-pair results; throws AnalysisError on empty input.
IoUReport summarize_iou(std::span<const PairIoU> pairs);

/// Per-class bitwise IoU averaged over mask pairs.
IoUReport segmentation_eval(std::span<const LabelMask> preds, std::span<const LabelMask> gts,
                            double c = kDefaultIouConstant);

/// Long-format CSV: metric,mean,std,n. IoU rows first, then error rows when given.
std::string write_report_csv(const IoUReport* iou, const ErrorReport* errors);

}  // namespace irisloc
