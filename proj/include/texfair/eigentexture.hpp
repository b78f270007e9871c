#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "texfair/warp.hpp"

namespace texfair {

/// Orthonormal texture basis for one face, built from its stack of cells.
///
/// Columns of `basis` are masked cell vectors (masked_indices() order). The
/// singular values cover the whole stack, not only the retained k.
struct EigenBasis {
  int face = -1;
  TrianglePtr triangle;
  Eigen::MatrixXd basis;            // masked-pixel-count x k
  Eigen::VectorXd singular_values;  // n values, descending
  Eigen::VectorXd mean;             // empty unless built with centering

  int k() const { return static_cast<int>(basis.cols()); }
  bool centered() const { return mean.size() > 0; }
};

struct CoeffVector {
  int view = -1;
  Eigen::VectorXd c;
};

/// Default basis dimension for n views: min(5, n).
int default_basis_dimension(int n_views);

/// Top-k left singular vectors of the stack, from the n x n Gram matrix.
/// Each basis vector's largest-magnitude entry is made positive.
/// `center` subtracts the mean cell first; off by default.
EigenBasis build_basis(std::span<const CellImage> cells, int k, bool center = false,
                       int face = -1);

CoeffVector project_coeffs(const EigenBasis& basis, const CellImage& cell, int view = -1);

/// Sum of c_m U_m (plus the mean when centered); not clamped.
CellImage reconstruct(const EigenBasis& basis, const CoeffVector& coeffs);

struct CoherenceResult {
  std::vector<CellImage> residuals;  // I - U c per view
  std::vector<CoeffVector> coeffs;
  double total_squared = 0.0;        // distance from eigenspace, summed
  double rms = 0.0;                  // over all masked-in pixels of all views
};

CoherenceResult coherence_residuals(const EigenBasis& basis, std::span<const CellImage> cells);

}  // namespace texfair
