#ifndef DTTPLUS_GRAPH_MODEL_HPP
#define DTTPLUS_GRAPH_MODEL_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dttplus {

// Base graphs of the supported DTTs: the path graph (DCT-2) and the path
// graph with a unit self-loop on the first node (DST-7).
enum class BaseGraphKind { PathGraph, PathWithUnitSelfLoop };

inline const char* to_string(BaseGraphKind k) {
  return k == BaseGraphKind::PathGraph ? "path" : "path_self_loop";
}

inline BaseGraphKind base_graph_kind_from_string(const std::string& s) {
  if (s == "path") return BaseGraphKind::PathGraph;
  if (s == "path_self_loop") return BaseGraphKind::PathWithUnitSelfLoop;
  throw std::invalid_argument("unknown base graph kind: " + s);
}

// Generalized graph Laplacian L = D - W + V. Symmetric, non-positive
// off-diagonal, PSD. Dense storage; block sizes stay <= 32.
struct GeneralizedLaplacian {
  int n = 0;
  Eigen::MatrixXd matrix;
};

// Learned parameters of a separable DTT+ block model. alpha/beta are the
// model-space (squared) values; node indices are 1-based as in e_i.
struct DttPlusParams {
  double alpha_r = 0.0;
  double beta_r = 1.0;
  double alpha_c = 0.0;
  double beta_c = 1.0;
  int i_r = 1;
  int i_c = 1;
};

inline void validate(const GeneralizedLaplacian& L) {
  const auto& M = L.matrix;
  if (M.rows() != L.n || M.cols() != L.n)
    throw std::invalid_argument("Laplacian size mismatch");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("Laplacian not symmetric");
  for (int i = 0; i < L.n; ++i)
    for (int j = 0; j < L.n; ++j)
      if (i != j && M(i, j) > 1e-12)
        throw std::invalid_argument("positive off-diagonal entry");
  for (int i = 0; i < L.n; ++i)
    if (M.row(i).sum() < -1e-9)
      throw std::invalid_argument("negative row sum (self-loop mass)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    throw std::invalid_argument("Laplacian not positive semidefinite");
}

inline GeneralizedLaplacian path_laplacian(int n) {
  if (n < 2) throw std::invalid_argument("path graph needs n >= 2");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    M(k, k) += 1.0;
    M(k + 1, k + 1) += 1.0;
    M(k, k + 1) -= 1.0;
    M(k + 1, k) -= 1.0;
  }
  return {n, std::move(M)};
}

inline GeneralizedLaplacian path_with_self_loop_laplacian(int n) {
  GeneralizedLaplacian L = path_laplacian(n);
  L.matrix(0, 0) += 1.0;
  return L;
}

inline GeneralizedLaplacian base_laplacian(BaseGraphKind kind, int n) {
  return kind == BaseGraphKind::PathGraph ? path_laplacian(n)
                                          : path_with_self_loop_laplacian(n);
}

// beta * L + alpha * e_i e_i^T with a 1-based node index i.
inline GeneralizedLaplacian rank_one_update(const GeneralizedLaplacian& base,
                                            double alpha, double beta, int i) {
  if (i < 1 || i > base.n) throw std::invalid_argument("node index out of range");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
  GeneralizedLaplacian out{base.n, beta * base.matrix};
  out.matrix(i - 1, i - 1) += alpha;
  return out;
}

// Kronecker sum L_r (+) L_c = L_r x I + I x L_c. Vectorization is
// column-major, so the row graph is the slow Kronecker factor.
inline GeneralizedLaplacian cartesian_product(const GeneralizedLaplacian& L_r,
                                              const GeneralizedLaplacian& L_c) {
  const int nr = L_r.n, nc = L_c.n;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nr * nc, nr * nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nr; ++j)
      M.block(i * nc, j * nc, nc, nc) =
          L_r.matrix(i, j) * Eigen::MatrixXd::Identity(nc, nc);
  for (int i = 0; i < nr; ++i) M.block(i * nc, i * nc, nc, nc) += L_c.matrix;
  return {nr * nc, std::move(M)};
}

}  // namespace dttplus

#endif  // DTTPLUS_GRAPH_MODEL_HPP
