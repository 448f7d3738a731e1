#ifndef DTTPLUS_BASE_TRANSFORMS_HPP
#define DTTPLUS_BASE_TRANSFORMS_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "dttplus/graph_model.hpp"

namespace dttplus {

// Orthonormal GFT basis with ascending eigenvalues. Columns of `basis` are
// eigenvectors; the first entry with magnitude above 1e-12 in each column is
// made positive so results are reproducible.
struct EigenSystem {
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;
};

inline void fix_signs(Eigen::MatrixXd& U) {
  for (int k = 0; k < U.cols(); ++k) {
    for (int r = 0; r < U.rows(); ++r) {
      if (std::abs(U(r, k)) > 1e-12) {
        if (U(r, k) < 0) U.col(k) = -U.col(k);
        break;
      }
    }
  }
}

inline EigenSystem gft(const GeneralizedLaplacian& L) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.matrix);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed for Laplacian of size " +
                             std::to_string(L.n));
  Eigen::MatrixXd U = es.eigenvectors();  // ascending order
  fix_signs(U);
  return {std::move(U), es.eigenvalues()};
}

inline EigenSystem closed_form_dct2(int n) {
  if (n < 2) throw std::invalid_argument("dct2 needs n >= 2");
  const double pi = std::numbers::pi;
  Eigen::MatrixXd U(n, n);
  for (int k = 0; k < n; ++k) {
    const double c = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int j = 0; j < n; ++j)
      U(j, k) = c * std::cos(pi * k * (2 * j + 1) / (2.0 * n));
  }
  fix_signs(U);
  Eigen::VectorXd lam(n);
  for (int k = 0; k < n; ++k) lam(k) = 2.0 - 2.0 * std::cos(pi * k / n);
  return {std::move(U), std::move(lam)};
}

inline EigenSystem closed_form_dst7(int n) {
  if (n < 2) throw std::invalid_argument("dst7 needs n >= 2");
  const double pi = std::numbers::pi;
  const double s = 2.0 / std::sqrt(2.0 * n + 1.0);
  Eigen::MatrixXd U(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      U(j, k) = s * std::sin((j + 1) * (2 * k + 1) * pi / (2.0 * n + 1.0));
  fix_signs(U);
  Eigen::VectorXd lam(n);
  for (int k = 0; k < n; ++k)
    lam(k) = 2.0 - 2.0 * std::cos((2 * k + 1) * pi / (2.0 * n + 1.0));
  return {std::move(U), std::move(lam)};
}

inline EigenSystem base_transform(BaseGraphKind kind, int n) {
  return kind == BaseGraphKind::PathGraph ? closed_form_dct2(n)
                                          : closed_form_dst7(n);
}

// Coefficients of `block` under the separable pair (U_r, U_c):
// C = U_c^T * X * U_r, matching (U_r kron U_c)^T vec(X) column-major.
inline Eigen::MatrixXd apply_separable(const Eigen::MatrixXd& block,
                                       const EigenSystem& row_basis,
                                       const EigenSystem& col_basis) {
  if (block.rows() != col_basis.basis.rows() ||
      block.cols() != row_basis.basis.rows())
    throw std::invalid_argument("block/basis dimension mismatch");
  return col_basis.basis.transpose() * block * row_basis.basis;
}

// Quantized integer version of a dense orthonormal basis: matrix entries
// round(p * U) clipped to the signed bit depth, value = int / p.
struct IntegerKernel {
  Eigen::MatrixXi matrix;
  int shift = 0;  // p = 2^shift
  int bit_depth = 8;
};

inline IntegerKernel quantize_basis(const EigenSystem& eig, int shift,
                                    int bit_depth) {
  const double p = double(1 << shift);
  const int hi = (1 << (bit_depth - 1)) - 1;
  const int lo = -(1 << (bit_depth - 1));
  Eigen::MatrixXi M(eig.basis.rows(), eig.basis.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) {
      long v = std::lround(p * eig.basis(i, j));
      M(i, j) = int(std::clamp(v, long(lo), long(hi)));
    }
  return {std::move(M), shift, bit_depth};
}

}  // namespace dttplus

#endif  // DTTPLUS_BASE_TRANSFORMS_HPP
