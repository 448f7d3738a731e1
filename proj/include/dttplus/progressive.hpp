#ifndef DTTPLUS_PROGRESSIVE_HPP
#define DTTPLUS_PROGRESSIVE_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dttplus/base_transforms.hpp"
#include "dttplus/graph_model.hpp"

namespace dttplus {

// Cauchy-structured transition kernel mapping base-DTT coefficients to DTT+
// coefficients: Ut^T = diag(a) C(lt, beta*l) diag(z) U^T. Rows where the
// update leaves the eigenpair invariant (z_j = 0) are identity rows; rows
// that hit a near-coincident denominator fall back to the direct
// eigendecomposition and clear `cauchy_exact`.
struct TransitionKernel {
  Eigen::MatrixXd k_matrix;
  Eigen::VectorXd a;             // row normalizers (1 for identity/fallback rows)
  Eigen::VectorXd z;             // U^T e_i
  Eigen::VectorXd base_eigs;     // beta-scaled base eigenvalues
  Eigen::VectorXd updated_eigs;  // eigenvalues of beta*L + alpha*e_i e_i^T
  double beta = 1.0;
  bool cauchy_exact = true;
};

struct InterleavingResult {
  bool holds = false;
  double max_violation = 0.0;
};

// Prop-2 style chain beta*l_1 <= lt_1 <= beta*l_2 <= ... <= lt_n.
inline InterleavingResult check_interleaving(const Eigen::VectorXd& base_eigs,
                                             const Eigen::VectorXd& updated_eigs,
                                             double beta, double tol = 1e-10) {
  const int n = int(base_eigs.size());
  double viol = 0.0;
  for (int k = 0; k < n; ++k) {
    viol = std::max(viol, beta * base_eigs(k) - updated_eigs(k));
    if (k + 1 < n) viol = std::max(viol, updated_eigs(k) - beta * base_eigs(k + 1));
  }
  return {viol <= tol, std::max(viol, 0.0)};
}

// Builds the transition kernel for the self-loop update beta*L + alpha*e_i.
// alpha may be negative when the target graph has a smaller self-loop than
// the chosen base (mapping from the DST-7 graph); PSD of the updated
// Laplacian is still required.
inline TransitionKernel transition_kernel(const GeneralizedLaplacian& base,
                                          const EigenSystem& base_eig,
                                          double alpha, double beta, int i) {
  const int n = base.n;
  if (i < 1 || i > n) throw std::invalid_argument("node index out of range");
  if (beta <= 0.0) throw std::invalid_argument("beta must be positive");

  Eigen::MatrixXd updated = beta * base.matrix;
  updated(i - 1, i - 1) += alpha;
  EigenSystem up = gft(GeneralizedLaplacian{n, updated});

  TransitionKernel K;
  K.beta = beta;
  K.base_eigs = beta * base_eig.eigenvalues;
  K.updated_eigs = up.eigenvalues;
  K.z = base_eig.basis.transpose().col(i - 1);
  K.a = Eigen::VectorXd::Ones(n);

  if (std::abs(alpha) < 1e-14) {
    K.k_matrix = Eigen::MatrixXd::Identity(n, n);
    return K;
  }

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> id_col(n, -1);  // identity target column per row, or -1
  std::vector<bool> zero_z(n, false), row_used(n, false);
  for (int j = 0; j < n; ++j) zero_z[j] = std::abs(K.z(j)) <= 1e-12;

  // Invariant eigenpairs keep their base eigenvector; match them to the
  // updated spectrum by eigenvalue.
  for (int j = 0; j < n; ++j) {
    if (!zero_z[j]) continue;
    int best = -1;
    double gap = std::numeric_limits<double>::infinity();
    for (int r = 0; r < n; ++r) {
      if (row_used[r]) continue;
      const double g = std::abs(K.updated_eigs(r) - K.base_eigs(j));
      if (g < gap) { gap = g; best = r; }
    }
    if (best < 0 || gap > 1e-8)
      throw std::runtime_error("invariant eigenpair has no spectral match");
    row_used[best] = true;
    id_col[best] = j;
  }

  for (int r = 0; r < n; ++r) {
    if (id_col[r] >= 0) {
      M(r, id_col[r]) = 1.0;
      continue;
    }
    bool ok = true;
    for (int j = 0; j < n; ++j) {
      if (zero_z[j]) continue;
      const double den = K.updated_eigs(r) - K.base_eigs(j);
      if (std::abs(den) < 1e-10) { ok = false; break; }
      M(r, j) = K.z(j) / den;
    }
    if (ok) {
      const double norm = M.row(r).norm();
      K.a(r) = 1.0 / norm;
      M.row(r) /= norm;
    } else {
      // near-coincident eigenvalues with z != 0: take the row directly
      M.row(r) = up.basis.col(r).transpose() * base_eig.basis;
      K.cauchy_exact = false;
    }
  }

  // Per-row sign alignment against the directly computed updated GFT, so
  // both construction paths agree bit-for-bit in tests.
  Eigen::MatrixXd direct = up.basis.transpose() * base_eig.basis;
  for (int r = 0; r < n; ++r) {
    if (M.row(r).dot(direct.row(r)) < 0) {
      M.row(r) = -M.row(r);
      K.a(r) = -K.a(r);
    }
  }
  K.k_matrix = std::move(M);
  return K;
}

inline Eigen::VectorXd apply_transition(const Eigen::VectorXd& coeffs,
                                        const TransitionKernel& K) {
  if (coeffs.size() != K.k_matrix.cols())
    throw std::invalid_argument("coefficient length mismatch");
  return K.k_matrix * coeffs;
}

// Mean |K_ij| over off-diagonal band b; used for the decay diagnostics.
inline std::vector<double> band_means(const Eigen::MatrixXd& K) {
  const int n = int(K.rows());
  std::vector<double> out(n, 0.0);
  for (int b = 0; b < n; ++b) {
    double s = 0.0;
    int cnt = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::abs(i - j) == b) { s += std::abs(K(i, j)); ++cnt; }
    out[b] = s / cnt;
  }
  return out;
}

}  // namespace dttplus

#endif  // DTTPLUS_PROGRESSIVE_HPP
