#include <irisloc/errors.hpp>
#include <irisloc/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace irisloc {

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const BoundingBox inter{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1),
                          std::min(a.y1, b.y1)};
  const auto i = inter.area();
  const auto u = a.area() + b.area() - i;
  return u > 0 ? static_cast<double>(i) / static_cast<double>(u) : 0.0;
}

double bitwise_iou(const BinaryMask& a, const BinaryMask& b, double c) {
  if (!a.same_shape(b)) throw DimensionMismatch("bitwise_iou: mask dimensions differ");
  if (!(c > 0.0)) throw InvalidArgument("bitwise_iou: constant must be positive");
  const auto inter = (a.bits() && b.bits()).count();
  const auto uni = (a.bits() || b.bits()).count();
  return static_cast<double>(inter) / (static_cast<double>(uni) + c);
}

FrameError frame_error(const FrameMeasurement& pred, const FrameMeasurement& gt) {
  FrameError e;
  e.pupil_center_l2 = (pred.pupil.center() - gt.pupil.center()).norm();
  e.iris_center_l2 = (pred.iris.center() - gt.iris.center()).norm();
  e.pupil_rx_l1 = std::abs(pred.pupil.rx - gt.pupil.rx);
  e.pupil_ry_l1 = std::abs(pred.pupil.ry - gt.pupil.ry);
  e.iris_rx_l1 = std::abs(pred.iris.rx - gt.iris.rx);
  e.iris_ry_l1 = std::abs(pred.iris.ry - gt.iris.ry);
  return e;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw AnalysisError("mean_std: empty input");
  const Eigen::Map<const Eigen::ArrayXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  const double mean = v.mean();
  const double var = (v - mean).square().mean();
  return {mean, std::sqrt(var)};
}

ErrorReport aggregate(std::span<const FrameError> errors) {
  if (errors.empty()) throw AnalysisError("aggregate: no error records");
  ErrorReport r;
  r.n = errors.size();
  std::vector<double> column(errors.size());
  for (std::size_t k = 0; k < 6; ++k) {
    for (std::size_t i = 0; i < errors.size(); ++i) column[i] = errors[i].values()[k];
    r.metrics[k] = mean_std(column);
  }
  return r;
}

PairIoU pair_iou(const LabelMask& pred, const LabelMask& gt, double c) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw DimensionMismatch("pair_iou: mask dimensions differ");
  }
  auto iou = [&](Label l) { return bitwise_iou(class_plane(pred, l), class_plane(gt, l), c); };
  return {iou(Label::Pupil), iou(Label::Iris), iou(Label::Sclera)};
}

IoUReport summarize_iou(std::span<const PairIoU> pairs) {
  if (pairs.empty()) throw AnalysisError("segmentation_eval: no mask pairs");
  std::vector<double> pupil, iris, sclera, overall;
  for (const auto& p : pairs) {
    pupil.push_back(p.pupil);
    iris.push_back(p.iris);
    sclera.push_back(p.sclera);
    overall.push_back((p.pupil + p.iris + p.sclera) / 3.0);
  }
  IoUReport r;
  r.n = pairs.size();
  r.pupil = mean_std(pupil);
  r.iris = mean_std(iris);
  r.sclera = mean_std(sclera);
  r.overall = {(r.pupil.mean + r.iris.mean + r.sclera.mean) / 3.0, mean_std(overall).std};
  return r;
}

IoUReport segmentation_eval(std::span<const LabelMask> preds, std::span<const LabelMask> gts,
                            double c) {
  if (preds.size() != gts.size()) {
    throw DimensionMismatch("segmentation_eval: " + std::to_string(preds.size()) +
                            " predictions vs " + std::to_string(gts.size()) + " ground truths");
  }
  std::vector<PairIoU> pairs;
  pairs.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    try {
      pairs.push_back(pair_iou(preds[i], gts[i], c));
    } catch (const DimensionMismatch&) {
      throw DimensionMismatch("segmentation_eval: pair " + std::to_string(i) +
                              " has mismatched dimensions");
    }
  }
  return summarize_iou(pairs);
}

std::string write_report_csv(const IoUReport* iou, const ErrorReport* errors) {
  std::ostringstream out;
  auto row = [&](const char* name, const MeanStd& ms, std::size_t n) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%zu\n", name, ms.mean, ms.std, n);
    out << buf;
  };
  out << "metric,mean,std,n\n";
  if (iou) {
    row("iou_pupil", iou->pupil, iou->n);
    row("iou_iris", iou->iris, iou->n);
    row("iou_sclera", iou->sclera, iou->n);
    row("iou_overall", iou->overall, iou->n);
  }
  if (errors) {
    for (std::size_t k = 0; k < 6; ++k) row(kFrameErrorNames[k], errors->metrics[k], errors->n);
  }
  return out.str();
}

}  // namespace irisloc
