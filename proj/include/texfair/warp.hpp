#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "texfair/geometry.hpp"
#include "texfair/image.hpp"

namespace texfair {

/// The fixed cell triangle: lower-left half of an S x S square with corners
/// (0,0), (S-1,0), (0,S-1). Face vertex j always maps to corner j.
class CanonicalTriangle {
 public:
  explicit CanonicalTriangle(int size);

  int size() const { return size_; }
  const std::array<Vec2, 3>& corners() const { return corners_; }

  bool inside(int x, int y) const { return mask_[index(x, y)] != 0; }
  const std::vector<unsigned char>& mask() const { return mask_; }
  /// Row-major indices of the masked-in pixels, ascending.
  const std::vector<int>& masked_indices() const { return masked_; }
  int masked_count() const { return static_cast<int>(masked_.size()); }

  /// Barycentric coordinates of a cell point w.r.t. the three corners.
  Eigen::Vector3d barycentric(const Vec2& p) const;

  int index(int x, int y) const { return y * size_ + x; }

 private:
  int size_;
  std::array<Vec2, 3> corners_;
  std::vector<unsigned char> mask_;
  std::vector<int> masked_;
};

using TrianglePtr = std::shared_ptr<const CanonicalTriangle>;

/// Shared canonical triangle for cell size S (S >= 8); the same object is
/// returned for equal S.
TrianglePtr canonical_triangle(int size);

/// S x S raster over the canonical triangle; masked-out entries are zero.
/// Observed cells hold intensities, residual cells hold signed values.
class CellImage {
 public:
  CellImage() = default;
  explicit CellImage(TrianglePtr triangle);

  static CellImage from_masked(TrianglePtr triangle, const Eigen::VectorXd& values);

  int size() const { return triangle_ ? triangle_->size() : 0; }
  const TrianglePtr& triangle() const { return triangle_; }
  bool inside(int x, int y) const { return triangle_->inside(x, y); }

  double at(int x, int y) const { return data_[triangle_->index(x, y)]; }
  double& at(int x, int y) { return data_[triangle_->index(x, y)]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  /// Masked-in values in masked_indices() order.
  Eigen::VectorXd masked_vector() const;

  /// Number of samples that fell outside the source image during extraction.
  int out_of_image() const { return out_of_image_; }
  void set_out_of_image(int count) { out_of_image_ = count; }

  bool same_mask(const CellImage& other) const;

 private:
  TrianglePtr triangle_;
  std::vector<double> data_;
  int out_of_image_ = 0;
};

/// Affine map from homogeneous image pixels (u, 1) to cell pixels.
struct AffineMap {
  Mat23 H = Mat23::Zero();

  Eigen::Matrix2d linear() const { return H.leftCols<2>(); }
  Vec2 apply(const Vec2& u) const { return H.leftCols<2>() * u + H.col(2); }
  /// Throws DegenerateProjection if the linear part is not invertible.
  AffineMap inverse() const;
};

AffineMap affine_map(const ImagePatch& patch, int cell_size);

CellImage extract_cell(const GrayImage& image, const AffineMap& map, int cell_size);

/// Mask-normalized Gaussian blur; sigma == 0 returns the input unchanged.
CellImage smooth_cell(const CellImage& cell, double sigma);

struct CellGradient {
  std::vector<double> gx;
  std::vector<double> gy;
};

/// Per-axis central differences inside the mask, one-sided at its border,
/// zero where neither neighbour is masked in.
CellGradient cell_gradient(const CellImage& cell);

/// Coarse-to-fine blur schedule, linear from max to min; a single level
/// uses min.
std::vector<double> smoothing_schedule(int levels, double sigma_max, double sigma_min);

}  // namespace texfair
