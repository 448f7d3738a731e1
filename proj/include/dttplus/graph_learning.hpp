#ifndef DTTPLUS_GRAPH_LEARNING_HPP
#define DTTPLUS_GRAPH_LEARNING_HPP

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dttplus/base_transforms.hpp"
#include "dttplus/graph_model.hpp"

namespace dttplus {

// Maximum-likelihood fit of the separable DTT+ model: minimize
// -log det L_g(phi) + tr(L_g(phi) S) over the rank-one updates of the row
// and column base graphs, scanning all (i_r, i_c) pairs and running damped
// Newton on the re-parametrized continuous subproblem.

struct LearningProblem {
  int n = 0;
  Eigen::MatrixXd S;  // n^2 x n^2, ridge already applied
  BaseGraphKind base_r = BaseGraphKind::PathGraph;
  BaseGraphKind base_c = BaseGraphKind::PathGraph;
  GeneralizedLaplacian L_r, L_c;
  double ridge = 0.0;
};

struct LearningSolution {
  DttPlusParams params;  // model-space (squared) alpha/beta values
  double cost = std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  int newton_iters = 0;
  bool converged = false;
};

inline std::vector<Eigen::MatrixXd> center_blocks(
    const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("no blocks");
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(blocks[0].rows(), blocks[0].cols());
  for (const auto& b : blocks) mean += b;
  mean /= double(blocks.size());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(b - mean);
  return out;
}

// S = 1/n_e sum vec(x) vec(x)^T, column-major vectorization (matching the
// U_r kron U_c convention).
inline Eigen::MatrixXd sample_covariance(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("no blocks");
  const auto rows = blocks[0].rows(), cols = blocks[0].cols();
  const int d = int(rows * cols);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (const auto& b : blocks) {
    if (b.rows() != rows || b.cols() != cols)
      throw std::invalid_argument("inconsistent block sizes");
    Eigen::Map<const Eigen::VectorXd> v(b.data(), d);
    S.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0 / double(blocks.size()));
  }
  S = S.selfadjointView<Eigen::Lower>();
  return S;
}

inline LearningProblem make_problem(Eigen::MatrixXd S, int n,
                                    BaseGraphKind base_r = BaseGraphKind::PathGraph,
                                    BaseGraphKind base_c = BaseGraphKind::PathGraph,
                                    double ridge = -1.0) {
  if (S.rows() != n * n || S.cols() != n * n)
    throw std::invalid_argument("covariance must be n^2 x n^2");
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("covariance not symmetric");
  LearningProblem p;
  p.n = n;
  if (ridge < 0.0) ridge = 1e-8 * S.trace() / double(n * n);
  p.ridge = ridge;
  p.S = std::move(S);
  p.S.diagonal().array() += ridge;
  p.base_r = base_r;
  p.base_c = base_c;
  p.L_r = base_laplacian(base_r, n);
  p.L_c = base_laplacian(base_c, n);
  return p;
}

namespace detail {

// Linear S-traces; constant across Newton iterations.
struct STraces {
  double with_Lr = 0.0, with_Lc = 0.0;    // tr(S (L x I)), tr(S (I x L))
  Eigen::VectorXd with_Er, with_Ec;       // tr(S (E_i x I)), tr(S (I x E_j))
};

// Global index for the column-major vectorization: (i, j) -> i * n + j where
// i indexes the row-graph (slow) factor.
inline STraces s_traces(const LearningProblem& p) {
  const int n = p.n;
  STraces t;
  t.with_Er = Eigen::VectorXd::Zero(n);
  t.with_Ec = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int g = i * n + j;
      t.with_Er(i) += p.S(g, g);
      t.with_Ec(j) += p.S(g, g);
      for (int i2 = 0; i2 < n; ++i2)
        t.with_Lr += p.S(g, i2 * n + j) * p.L_r.matrix(i2, i);
      for (int j2 = 0; j2 < n; ++j2)
        t.with_Lc += p.S(g, i * n + j2) * p.L_c.matrix(j2, j);
    }
  return t;
}

// Re-parametrized variables th = (a_r, b_r, a_c, b_c); model values are the
// squares. Returns false when L_g is numerically singular.
inline bool cost_grad(const LearningProblem& p, const STraces& st,
                      const Eigen::Vector4d& th, int ir, int ic, double& cost,
                      Eigen::Vector4d& grad) {
  const int n = p.n;
  const double ar2 = th(0) * th(0), br2 = th(1) * th(1);
  const double ac2 = th(2) * th(2), bc2 = th(3) * th(3);

  Eigen::MatrixXd Lr = br2 * p.L_r.matrix;
  Lr(ir - 1, ir - 1) += ar2;
  Eigen::MatrixXd Lc = bc2 * p.L_c.matrix;
  Lc(ic - 1, ic - 1) += ac2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(Lr), ec(Lc);
  if (er.info() != Eigen::Success || ec.info() != Eigen::Success) return false;
  const Eigen::VectorXd& mr = er.eigenvalues();
  const Eigen::VectorXd& mc = ec.eigenvalues();

  double logdet = 0.0;
  Eigen::MatrixXd inv_lam(n, n);  // 1 / (mr_i + mc_j)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double lam = mr(i) + mc(j);
      if (lam < -1e-12) return false;
      lam = std::max(lam, 1e-12);
      logdet += std::log(lam);
      inv_lam(i, j) = 1.0 / lam;
    }

  cost = -logdet + br2 * st.with_Lr + ar2 * st.with_Er(ir - 1) +
         bc2 * st.with_Lc + ac2 * st.with_Ec(ic - 1);

  // tr(L_g^{-1} (M x I)) = sum_i (V_r^T M V_r)_{ii} * sum_j inv_lam(i, j)
  const Eigen::VectorXd row_sums = inv_lam.rowwise().sum();
  const Eigen::VectorXd col_sums = inv_lam.colwise().sum();
  const Eigen::MatrixXd& Vr = er.eigenvectors();
  const Eigen::MatrixXd& Vc = ec.eigenvectors();

  double inv_Er = 0.0, inv_Lr_tr = 0.0, inv_Ec = 0.0, inv_Lc_tr = 0.0;
  const Eigen::MatrixXd LVr = p.L_r.matrix * Vr;
  const Eigen::MatrixXd LVc = p.L_c.matrix * Vc;
  for (int i = 0; i < n; ++i) {
    inv_Er += Vr(ir - 1, i) * Vr(ir - 1, i) * row_sums(i);
    inv_Lr_tr += Vr.col(i).dot(LVr.col(i)) * row_sums(i);
  }
  for (int j = 0; j < n; ++j) {
    inv_Ec += Vc(ic - 1, j) * Vc(ic - 1, j) * col_sums(j);
    inv_Lc_tr += Vc.col(j).dot(LVc.col(j)) * col_sums(j);
  }

  grad(0) = 2.0 * th(0) * (st.with_Er(ir - 1) - inv_Er);
  grad(1) = 2.0 * th(1) * (st.with_Lr - inv_Lr_tr);
  grad(2) = 2.0 * th(2) * (st.with_Ec(ic - 1) - inv_Ec);
  grad(3) = 2.0 * th(3) * (st.with_Lc - inv_Lc_tr);
  return true;
}

struct InnerResult {
  Eigen::Vector4d th;
  double cost;
  double grad_norm;
  int iters;
};

inline InnerResult newton_from(const LearningProblem& p, const STraces& st,
                               int ir, int ic, Eigen::Vector4d th,
                               double tol = 1e-10, int max_iters = 200) {
  double c;
  Eigen::Vector4d g;
  if (!cost_grad(p, st, th, ir, ic, c, g))
    return {th, std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), 0};
  int it = 0;
  for (; it < max_iters; ++it) {
    const double gn = g.cwiseAbs().maxCoeff();
    if (gn < tol) break;

    Eigen::Matrix4d H;
    const double h = 1e-5;
    for (int k = 0; k < 4; ++k) {
      Eigen::Vector4d tp = th, tm = th;
      tp(k) += h;
      tm(k) -= h;
      double cp, cm;
      Eigen::Vector4d gp, gm;
      const bool okp = cost_grad(p, st, tp, ir, ic, cp, gp);
      const bool okm = cost_grad(p, st, tm, ir, ic, cm, gm);
      if (!okp || !okm) { H.setIdentity(); break; }
      H.col(k) = (gp - gm) / (2.0 * h);
    }
    H = 0.5 * (H + H.transpose());
    Eigen::Vector4d step = H.fullPivLu().solve(g);
    if (!step.allFinite() || g.dot(step) <= 0.0) step = g;

    if (gn < 1e-6) {
      // close to stationarity; accept on gradient-norm decrease, where the
      // cost change is below double-precision noise
      Eigen::Vector4d thn = th - step;
      double cn;
      Eigen::Vector4d gnew;
      if (cost_grad(p, st, thn, ir, ic, cn, gnew) &&
          gnew.cwiseAbs().maxCoeff() < gn) {
        th = thn;
        c = cn;
        g = gnew;
        continue;
      }
      break;
    }

    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      Eigen::Vector4d thn = th - t * step;
      double cn;
      Eigen::Vector4d gn2;
      if (cost_grad(p, st, thn, ir, ic, cn, gn2) && cn < c) {
        th = thn;
        c = cn;
        g = gn2;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  return {th, c, g.cwiseAbs().maxCoeff(), it};
}

}  // namespace detail

inline double cost(const DttPlusParams& phi, const LearningProblem& p) {
  const detail::STraces st = detail::s_traces(p);
  Eigen::Vector4d th(std::sqrt(phi.alpha_r), std::sqrt(phi.beta_r),
                     std::sqrt(phi.alpha_c), std::sqrt(phi.beta_c));
  double c;
  Eigen::Vector4d g;
  if (!detail::cost_grad(p, st, th, phi.i_r, phi.i_c, c, g))
    return std::numeric_limits<double>::infinity();
  return c;
}

// Gradient of the cost in the re-parametrized variables (chain-rule factors
// 2a, 2b included); all four entries vanish at an interior optimum.
inline Eigen::Vector4d stationarity_residual(const DttPlusParams& phi,
                                             const LearningProblem& p) {
  const detail::STraces st = detail::s_traces(p);
  Eigen::Vector4d th(std::sqrt(phi.alpha_r), std::sqrt(phi.beta_r),
                     std::sqrt(phi.alpha_c), std::sqrt(phi.beta_c));
  double c;
  Eigen::Vector4d g;
  if (!detail::cost_grad(p, st, th, phi.i_r, phi.i_c, c, g))
    throw std::runtime_error("singular model Laplacian");
  return g;
}

inline LearningSolution solve_inner(int i_r, int i_c, const LearningProblem& p,
                                    const DttPlusParams* init = nullptr) {
  if (i_r < 1 || i_r > p.n || i_c < 1 || i_c > p.n)
    throw std::invalid_argument("node index out of range");
  const detail::STraces st = detail::s_traces(p);

  std::vector<Eigen::Vector4d> starts;
  if (init) {
    starts.push_back(Eigen::Vector4d(std::sqrt(init->alpha_r), std::sqrt(init->beta_r),
                                     std::sqrt(init->alpha_c), std::sqrt(init->beta_c)));
  } else {
    starts.push_back(Eigen::Vector4d(0.5, 1.0, 0.5, 1.0));
    starts.push_back(Eigen::Vector4d(1.2, 0.8, 1.2, 0.8));
    starts.push_back(Eigen::Vector4d(0.1, 1.1, 0.1, 1.1));
  }

  detail::InnerResult best{starts[0], std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(), 0};
  for (const auto& s : starts) {
    detail::InnerResult r = detail::newton_from(p, st, i_r, i_c, s);
    if (r.cost < best.cost) best = r;
  }

  LearningSolution sol;
  sol.params.alpha_r = best.th(0) * best.th(0);
  sol.params.beta_r = best.th(1) * best.th(1);
  sol.params.alpha_c = best.th(2) * best.th(2);
  sol.params.beta_c = best.th(3) * best.th(3);
  sol.params.i_r = i_r;
  sol.params.i_c = i_c;
  sol.cost = best.cost;
  sol.grad_norm = best.grad_norm;
  sol.newton_iters = best.iters;
  sol.converged = std::isfinite(best.cost) && best.grad_norm <= 1e-8;
  return sol;
}

// Scan all n^2 (i_r, i_c) pairs; ties within 1e-12 go to the lexicographically
// smallest pair (the scan order guarantees that).
inline LearningSolution solve(const LearningProblem& p) {
  LearningSolution best;
  bool any = false;
  for (int ir = 1; ir <= p.n; ++ir)
    for (int ic = 1; ic <= p.n; ++ic) {
      LearningSolution s = solve_inner(ir, ic, p);
      if (!std::isfinite(s.cost)) continue;
      if (!any || s.cost < best.cost - 1e-12) {
        best = s;
        any = true;
      }
    }
  if (!any) throw std::runtime_error("all inner solves failed");
  return best;
}

}  // namespace dttplus

#endif  // DTTPLUS_GRAPH_LEARNING_HPP
