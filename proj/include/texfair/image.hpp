#pragma once

#include <cstddef>
#include <vector>

namespace texfair {

/// Row-major grayscale raster with intensities in [0,1].
///
/// Pixel (x, y) has its center at the continuous coordinate (x, y); x runs
/// along columns, y along rows.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  double at(int x, int y) const { return pixels_[index(x, y)]; }
  double& at(int x, int y) { return pixels_[index(x, y)]; }

  const std::vector<double>& pixels() const { return pixels_; }
  std::vector<double>& pixels() { return pixels_; }

  bool contains(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x <= width_ - 1.0 && y <= height_ - 1.0;
  }

  // Bilinear sample; coordinates outside the raster clamp to the nearest edge
  // pixel and set *outside when given.
  double sample(double x, double y, bool* outside = nullptr) const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

}  // namespace texfair
