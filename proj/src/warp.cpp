#include "texfair/warp.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include <Eigen/LU>

#include "texfair/error.hpp"

namespace texfair {

CanonicalTriangle::CanonicalTriangle(int size) : size_(size) {
  if (size < 8) {
    throw Error(ErrorCode::InvalidInput, "cell size must be at least 8");
  }
  const double last = size - 1.0;
  corners_ = {Vec2(0.0, 0.0), Vec2(last, 0.0), Vec2(0.0, last)};
  mask_.assign(static_cast<std::size_t>(size) * size, 0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x + y <= size - 1; ++x) {
      mask_[index(x, y)] = 1;
      masked_.push_back(index(x, y));
    }
  }
}

Eigen::Vector3d CanonicalTriangle::barycentric(const Vec2& p) const {
  const double last = size_ - 1.0;
  const double l1 = p.x() / last;
  const double l2 = p.y() / last;
  return {1.0 - l1 - l2, l1, l2};
}

TrianglePtr canonical_triangle(int size) {
  static std::mutex mutex;
  static std::map<int, TrianglePtr> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(size);
  if (it != cache.end()) return it->second;
  auto tri = std::make_shared<const CanonicalTriangle>(size);
  cache.emplace(size, tri);
  return tri;
}

CellImage::CellImage(TrianglePtr triangle)
    : triangle_(std::move(triangle)),
      data_(static_cast<std::size_t>(triangle_->size()) * triangle_->size(), 0.0) {}

CellImage CellImage::from_masked(TrianglePtr triangle, const Eigen::VectorXd& values) {
  CellImage cell(std::move(triangle));
  const auto& idx = cell.triangle_->masked_indices();
  if (values.size() != static_cast<Eigen::Index>(idx.size())) {
    throw Error(ErrorCode::MaskMismatch, "vector length does not match the cell mask");
  }
  for (std::size_t p = 0; p < idx.size(); ++p) cell.data_[idx[p]] = values[static_cast<Eigen::Index>(p)];
  return cell;
}

Eigen::VectorXd CellImage::masked_vector() const {
  const auto& idx = triangle_->masked_indices();
  Eigen::VectorXd v(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t p = 0; p < idx.size(); ++p) v[static_cast<Eigen::Index>(p)] = data_[idx[p]];
  return v;
}

bool CellImage::same_mask(const CellImage& other) const {
  return triangle_ && other.triangle_ && triangle_->size() == other.triangle_->size();
}

AffineMap AffineMap::inverse() const {
  const Eigen::Matrix2d L = linear();
  const double det = L.determinant();
  if (!(std::abs(det) > 1e-9)) {
    throw Error(ErrorCode::DegenerateProjection, "affine map is not invertible");
  }
  const Eigen::Matrix2d Li = L.inverse();
  AffineMap inv;
  inv.H.leftCols<2>() = Li;
  inv.H.col(2) = -Li * H.col(2);
  return inv;
}

AffineMap affine_map(const ImagePatch& patch, int cell_size) {
  if (std::abs(patch.signed_area()) < kMinPatchArea) {
    throw Error(ErrorCode::DegenerateProjection, "image patch is degenerate");
  }
  const TrianglePtr tri = canonical_triangle(cell_size);
  Eigen::Matrix3d src;
  Eigen::Matrix<double, 2, 3> dst;
  for (int j = 0; j < 3; ++j) {
    src.col(j) << patch.corners[j], 1.0;
    dst.col(j) = tri->corners()[j];
  }
  AffineMap map;
  // Solve H * src = dst through the transposed system for stability.
  map.H = src.transpose().partialPivLu().solve(dst.transpose()).transpose();
  return map;
}

CellImage extract_cell(const GrayImage& image, const AffineMap& map, int cell_size) {
  const AffineMap inv = map.inverse();
  const TrianglePtr tri = canonical_triangle(cell_size);
  CellImage cell(tri);
  int outside_count = 0;
  const Eigen::Matrix2d L = inv.linear();
  const Vec2 t = inv.H.col(2);
  for (int idx : tri->masked_indices()) {
    const int x = idx % cell_size;
    const int y = idx / cell_size;
    const Vec2 u = L * Vec2(x, y) + t;
    bool outside = false;
    cell.data()[idx] = image.sample(u.x(), u.y(), &outside);
    if (outside) ++outside_count;
  }
  cell.set_out_of_image(outside_count);
  return cell;
}

CellImage smooth_cell(const CellImage& cell, double sigma) {
  if (sigma < 0.0) {
    throw Error(ErrorCode::InvalidInput, "smoothing sigma must be non-negative");
  }
  if (sigma == 0.0) return cell;

  const int S = cell.size();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    kernel[j + radius] = std::exp(-0.5 * j * j / (sigma * sigma));
    ksum += kernel[j + radius];
  }
  for (double& k : kernel) k /= ksum;

  const CanonicalTriangle& tri = *cell.triangle();
  const std::size_t n = static_cast<std::size_t>(S) * S;
  std::vector<double> num_h(n, 0.0), den_h(n, 0.0);
  // Horizontal pass over every row that can reach a masked pixel vertically.
  for (int y = 0; y < S; ++y) {
    const int row_len = S - y;  // masked-in columns are [0, row_len)
    for (int x = 0; x < S; ++x) {
      const int lo = std::max(0, x - radius);
      const int hi = std::min(row_len - 1, x + radius);
      double num = 0.0, den = 0.0;
      for (int xx = lo; xx <= hi; ++xx) {
        const double k = kernel[xx - x + radius];
        num += k * cell.data()[tri.index(xx, y)];
        den += k;
      }
      num_h[tri.index(x, y)] = num;
      den_h[tri.index(x, y)] = den;
    }
  }
  CellImage out(cell.triangle());
  out.set_out_of_image(cell.out_of_image());
  for (int idx : tri.masked_indices()) {
    const int x = idx % S;
    const int y = idx / S;
    const int lo = std::max(0, y - radius);
    const int hi = std::min(S - 1, y + radius);
    double num = 0.0, den = 0.0;
    for (int yy = lo; yy <= hi; ++yy) {
      const double k = kernel[yy - y + radius];
      num += k * num_h[tri.index(x, yy)];
      den += k * den_h[tri.index(x, yy)];
    }
    out.data()[idx] = den > 0.0 ? num / den : cell.data()[idx];
  }
  return out;
}

CellGradient cell_gradient(const CellImage& cell) {
  const int S = cell.size();
  const CanonicalTriangle& tri = *cell.triangle();
  CellGradient g;
  g.gx.assign(static_cast<std::size_t>(S) * S, 0.0);
  g.gy.assign(static_cast<std::size_t>(S) * S, 0.0);
  auto in = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < S && y < S && tri.inside(x, y);
  };
  for (int idx : tri.masked_indices()) {
    const int x = idx % S;
    const int y = idx / S;
    const double c = cell.data()[idx];
    const bool xm = in(x - 1, y), xp = in(x + 1, y);
    if (xm && xp) {
      g.gx[idx] = 0.5 * (cell.at(x + 1, y) - cell.at(x - 1, y));
    } else if (xp) {
      g.gx[idx] = cell.at(x + 1, y) - c;
    } else if (xm) {
      g.gx[idx] = c - cell.at(x - 1, y);
    }
    const bool ym = in(x, y - 1), yp = in(x, y + 1);
    if (ym && yp) {
      g.gy[idx] = 0.5 * (cell.at(x, y + 1) - cell.at(x, y - 1));
    } else if (yp) {
      g.gy[idx] = cell.at(x, y + 1) - c;
    } else if (ym) {
      g.gy[idx] = c - cell.at(x, y - 1);
    }
  }
  return g;
}

std::vector<double> smoothing_schedule(int levels, double sigma_max, double sigma_min) {
  if (levels < 1) {
    throw Error(ErrorCode::InvalidInput, "pyramid needs at least one level");
  }
  if (levels == 1) return {sigma_min};
  std::vector<double> out(levels);
  for (int l = 0; l < levels; ++l) {
    out[l] = sigma_max - (sigma_max - sigma_min) * l / (levels - 1.0);
  }
  return out;
}

}  // namespace texfair
