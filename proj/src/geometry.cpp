#include <irisloc/errors.hpp>
#include <irisloc/geometry.hpp>

#include <string>

namespace irisloc {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::MassCenter: return "MassCenter";
    case Method::LMS: return "LMS";
    case Method::Hough: return "Hough";
    case Method::Mixed: return "Mixed";
  }
  return "Mixed";
}

Method method_from_string(std::string_view s) {
  if (s == "MassCenter") return Method::MassCenter;
  if (s == "LMS") return Method::LMS;
  if (s == "Hough") return Method::Hough;
  if (s == "Mixed") return Method::Mixed;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

}  // namespace irisloc
