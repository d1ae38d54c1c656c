#pragma once

#include <irisloc/localization.hpp>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace irisloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Applies flat key=value settings on top of `base`:
///   pupil_radius_range=5,25
///   iris_radius_range=20,80
///   openness_threshold=0.6
///   hough_center_stride=1
///   horiz_ratio=2.0
LocalizationConfig parse_config(std::string_view text, LocalizationConfig base = {});

/// Entry point shared by the binary and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace irisloc::cli
