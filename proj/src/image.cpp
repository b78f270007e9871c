#include "texfair/image.hpp"

#include <algorithm>
#include <cmath>

#include "texfair/error.hpp"

namespace texfair {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidInput, "image dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

double GrayImage::sample(double x, double y, bool* outside) const {
  const double maxx = width_ - 1.0;
  const double maxy = height_ - 1.0;
  if (outside != nullptr) *outside = !contains(x, y);
  x = std::clamp(x, 0.0, maxx);
  y = std::clamp(y, 0.0, maxy);
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  x0 = std::min(x0, width_ - 2 < 0 ? 0 : width_ - 2);
  y0 = std::min(y0, height_ - 2 < 0 ? 0 : height_ - 2);
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * at(x0, y0) + fx * at(x1, y0);
  const double bottom = (1.0 - fx) * at(x0, y1) + fx * at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

}  // namespace texfair
