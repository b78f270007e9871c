#include "texfair/eigentexture.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "texfair/error.hpp"

namespace texfair {

namespace {

void check_stack(std::span<const CellImage> cells) {
  if (cells.empty()) {
    throw Error(ErrorCode::InsufficientViews, "basis needs at least one cell");
  }
  for (const CellImage& c : cells) {
    if (!c.same_mask(cells.front())) {
      throw Error(ErrorCode::MaskMismatch, "cells in a stack must share the cell size");
    }
  }
}

// Orthogonalises column j against columns [0, j) twice and normalises it.
// Returns the norm before normalisation.
double reorthogonalize(Eigen::MatrixXd& U, Eigen::Index j) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < j; ++i) {
      U.col(j) -= U.col(i).dot(U.col(j)) * U.col(i);
    }
  }
  const double norm = U.col(j).norm();
  if (norm > 0.0) U.col(j) /= norm;
  return norm;
}

}  // namespace

int default_basis_dimension(int n_views) { return std::min(5, n_views); }

EigenBasis build_basis(std::span<const CellImage> cells, int k, bool center, int face) {
  check_stack(cells);
  const int n = static_cast<int>(cells.size());
  if (k < 1) throw Error(ErrorCode::InvalidInput, "basis dimension must be positive");
  if (k > n) throw Error(ErrorCode::KTooLarge, "basis dimension exceeds the number of views");

  EigenBasis out;
  out.face = face;
  out.triangle = cells.front().triangle();
  const Eigen::Index m = out.triangle->masked_count();

  Eigen::MatrixXd X(m, n);
  for (int i = 0; i < n; ++i) X.col(i) = cells[i].masked_vector();
  if (center) {
    out.mean = X.rowwise().mean();
    X.colwise() -= out.mean;
  }

  const Eigen::MatrixXd gram = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd lambda = eig.eigenvalues().reverse();
  const Eigen::MatrixXd V = eig.eigenvectors().rowwise().reverse();

  out.singular_values.resize(n);
  for (int i = 0; i < n; ++i) out.singular_values[i] = std::sqrt(std::max(0.0, lambda[i]));

  const double tiny = 1e-12 * std::max(1.0, out.singular_values[0]);
  out.basis.resize(m, k);
  Eigen::Index next_unit = 0;
  for (int j = 0; j < k; ++j) {
    const double s = out.singular_values[j];
    if (s > tiny) {
      out.basis.col(j) = X * V.col(j) / s;
    } else {
      out.basis.col(j).setZero();
    }
    double norm = reorthogonalize(out.basis, j);
    // Null directions of the stack: complete with unit vectors.
    while (norm < 0.5) {
      out.basis.col(j).setZero();
      out.basis(next_unit++, j) = 1.0;
      norm = reorthogonalize(out.basis, j);
    }
    Eigen::Index arg = 0;
    out.basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.basis(arg, j) < 0.0) out.basis.col(j) *= -1.0;
  }
  return out;
}

CoeffVector project_coeffs(const EigenBasis& basis, const CellImage& cell, int view) {
  if (!cell.triangle() || cell.size() != basis.triangle->size()) {
    throw Error(ErrorCode::MaskMismatch, "cell does not match the basis mask");
  }
  Eigen::VectorXd v = cell.masked_vector();
  if (basis.centered()) v -= basis.mean;
  return {view, basis.basis.transpose() * v};
}

CellImage reconstruct(const EigenBasis& basis, const CoeffVector& coeffs) {
  if (coeffs.c.size() != basis.k()) {
    throw Error(ErrorCode::InvalidInput, "coefficient count does not match basis dimension");
  }
  Eigen::VectorXd v = basis.basis * coeffs.c;
  if (basis.centered()) v += basis.mean;
  return CellImage::from_masked(basis.triangle, v);
}

CoherenceResult coherence_residuals(const EigenBasis& basis, std::span<const CellImage> cells) {
  CoherenceResult out;
  out.residuals.reserve(cells.size());
  out.coeffs.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CoeffVector c = project_coeffs(basis, cells[i], static_cast<int>(i));
    Eigen::VectorXd recon = basis.basis * c.c;
    if (basis.centered()) recon += basis.mean;
    const Eigen::VectorXd r = cells[i].masked_vector() - recon;
    out.total_squared += r.squaredNorm();
    out.residuals.push_back(CellImage::from_masked(basis.triangle, r));
    out.coeffs.push_back(std::move(c));
  }
  const double count = static_cast<double>(cells.size()) * basis.triangle->masked_count();
  out.rms = count > 0 ? std::sqrt(out.total_squared / count) : 0.0;
  return out;
}

}  // namespace texfair
