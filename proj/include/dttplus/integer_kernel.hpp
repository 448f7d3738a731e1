#ifndef DTTPLUS_INTEGER_KERNEL_HPP
#define DTTPLUS_INTEGER_KERNEL_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dttplus/base_transforms.hpp"
#include "dttplus/progressive.hpp"

namespace dttplus {

// INT-DTT+ payload: K ~ (I + F) K_d with a quantized diagonal (value =
// int / 2^shift_d) and a sparsified integer off-diagonal factor (value =
// int / 2^shift_f). Diagonal entries that are exactly +/-1 in float are kept
// exact (stored as +/-2^shift_d); they cost no multiplication.
struct SparseEntry {
  int row = 0;
  int col = 0;
  int value = 0;  // integer, actual value = value / 2^shift_f
};

struct IntegerTransitionKernel {
  int n = 0;
  BaseGraphKind base = BaseGraphKind::PathGraph;
  std::vector<int> k_d_q;         // length n
  int shift_d = 7;                // p_d = 128
  std::vector<SparseEntry> f_q;   // zero diagonal
  int shift_f = 2;                // p_f = 4
  int bit_depth_d = 8;
  int bit_depth_f = 3;
  bool split_failed = false;      // dense fallback marker (see split())
};

struct KernelQuality {
  double orthogonality = 0.0;  // ||T^T T - I||_inf
  double closeness = 0.0;      // max |T - K|
  double norm_dev = 0.0;       // max | ||row|| - 1 |
};

struct OpCount {
  int multiplications = 0;
  int additions = 0;
  int shifts = 0;
};

struct SplitKernel {
  Eigen::VectorXd k_d;
  Eigen::MatrixXd f;  // K_o K_d^{-1}, zero diagonal
};

// K = (I + F) K_d with F = K_o K_d^{-1}.
inline SplitKernel split(const TransitionKernel& K) {
  const int n = int(K.k_matrix.rows());
  SplitKernel s;
  s.k_d = K.k_matrix.diagonal();
  for (int j = 0; j < n; ++j)
    if (std::abs(s.k_d(j)) < 1e-6)
      throw std::runtime_error("near-zero diagonal entry; kernel unsuitable for (I+F)K_d split");
  s.f = K.k_matrix * s.k_d.cwiseInverse().asDiagonal();
  s.f.diagonal().setZero();
  return s;
}

namespace detail {

inline int round_half_away(double v) {
  return int(v >= 0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

// Arithmetic division by 2^s with round-half-away-from-zero.
inline std::int64_t rshift_round(std::int64_t v, int s) {
  if (s == 0) return v;
  const std::int64_t half = std::int64_t(1) << (s - 1);
  return v >= 0 ? (v + half) >> s : -((-v + half) >> s);
}

}  // namespace detail

inline IntegerTransitionKernel quantize(const SplitKernel& s, BaseGraphKind base,
                                        int p_d = 128, int p_f = 4,
                                        int bit_depth_d = 8, int bit_depth_f = 3) {
  auto log2_exact = [](int p) {
    if (p <= 0 || (p & (p - 1)) != 0)
      throw std::invalid_argument("precision must be a power of two");
    int s = 0;
    while ((1 << s) < p) ++s;
    return s;
  };
  IntegerTransitionKernel ik;
  ik.n = int(s.k_d.size());
  ik.base = base;
  ik.shift_d = log2_exact(p_d);
  ik.shift_f = log2_exact(p_f);
  ik.bit_depth_d = bit_depth_d;
  ik.bit_depth_f = bit_depth_f;

  const int hi_d = (1 << (bit_depth_d - 1)) - 1, lo_d = -(1 << (bit_depth_d - 1));
  ik.k_d_q.resize(ik.n);
  for (int i = 0; i < ik.n; ++i) {
    if (std::abs(std::abs(s.k_d(i)) - 1.0) < 1e-12) {
      // exact unit diagonal entry: a wire, kept unquantized
      ik.k_d_q[i] = s.k_d(i) > 0 ? p_d : -p_d;
    } else {
      ik.k_d_q[i] = std::clamp(detail::round_half_away(p_d * s.k_d(i)), lo_d, hi_d);
    }
  }

  const int hi_f = (1 << (bit_depth_f - 1)) - 1, lo_f = -(1 << (bit_depth_f - 1));
  for (int i = 0; i < ik.n; ++i)
    for (int j = 0; j < ik.n; ++j) {
      if (i == j) continue;
      const int v = std::clamp(detail::round_half_away(p_f * s.f(i, j)), lo_f, hi_f);
      if (v != 0) ik.f_q.push_back({i, j, v});
    }
  return ik;
}

// Reconstructed float kernel (I + F_q) K_dq.
inline Eigen::MatrixXd reconstruct(const IntegerTransitionKernel& ik) {
  const double pd = double(1 << ik.shift_d), pf = double(1 << ik.shift_f);
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(ik.n, ik.n);
  for (const auto& e : ik.f_q) F(e.row, e.col) = e.value / pf;
  Eigen::VectorXd d(ik.n);
  for (int i = 0; i < ik.n; ++i) d(i) = ik.k_d_q[i] / pd;
  return (Eigen::MatrixXd::Identity(ik.n, ik.n) + F) * d.asDiagonal();
}

inline KernelQuality quality(const IntegerTransitionKernel& ik,
                             const TransitionKernel& float_ref) {
  const Eigen::MatrixXd T = reconstruct(ik);
  KernelQuality q;
  q.orthogonality =
      (T.transpose() * T - Eigen::MatrixXd::Identity(ik.n, ik.n)).cwiseAbs().maxCoeff();
  q.closeness = (T - float_ref.k_matrix).cwiseAbs().maxCoeff();
  q.norm_dev = (T.rowwise().norm().array() - 1.0).abs().maxCoeff();
  return q;
}

inline double combined_quality(const KernelQuality& q,
                               const Eigen::Vector3d& w = Eigen::Vector3d::Ones()) {
  return w(0) * q.orthogonality + w(1) * q.closeness + w(2) * q.norm_dev;
}

// Coordinate descent over the stored integers, each perturbed by +/-1 within
// its clip range; sweeps until a full pass makes no change.
inline IntegerTransitionKernel fine_tune(IntegerTransitionKernel ik,
                                         const TransitionKernel& float_ref,
                                         const Eigen::Vector3d& weights =
                                             Eigen::Vector3d::Ones(),
                                         int max_sweeps = 50) {
  const int p_d = 1 << ik.shift_d;
  const int hi_d = (1 << (ik.bit_depth_d - 1)) - 1, lo_d = -(1 << (ik.bit_depth_d - 1));
  const int hi_f = (1 << (ik.bit_depth_f - 1)) - 1, lo_f = -(1 << (ik.bit_depth_f - 1));
  double best = combined_quality(quality(ik, float_ref), weights);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (int i = 0; i < ik.n; ++i) {
      const int orig = ik.k_d_q[i];
      for (int d : {-1, +1}) {
        const int cand = orig + d;
        // regular clip range plus the exact-unit sentinel +/-p_d
        if ((cand < lo_d || cand > hi_d) && std::abs(cand) != p_d) continue;
        ik.k_d_q[i] = cand;
        const double m = combined_quality(quality(ik, float_ref), weights);
        if (m < best - 1e-15) { best = m; changed = true; break; }
        ik.k_d_q[i] = orig;
      }
    }
    for (auto& e : ik.f_q) {
      const int orig = e.value;
      for (int d : {-1, +1}) {
        const int cand = orig + d;
        if (cand < lo_f || cand > hi_f) continue;
        e.value = cand;
        const double m = combined_quality(quality(ik, float_ref), weights);
        if (m < best - 1e-15) { best = m; changed = true; break; }
        e.value = orig;
      }
    }
    if (!changed) break;
  }
  return ik;
}

// Paper rule: DCT-2 base below 0.5 normalized self-loop weight, DST-7 from
// 0.5 up.
inline BaseGraphKind select_base(double learned_self_loop_weight) {
  if (learned_self_loop_weight < 0.0)
    throw std::invalid_argument("self-loop weight must be non-negative");
  return learned_self_loop_weight < 0.5 ? BaseGraphKind::PathGraph
                                        : BaseGraphKind::PathWithUnitSelfLoop;
}

// q = z + F'_q z with z = K'_dq y, all divisions as rounding shifts.
// Unit diagonal entries (|int| == p_d) are exact copies.
inline std::vector<std::int32_t> forward(const std::vector<std::int32_t>& coeffs,
                                         const IntegerTransitionKernel& ik) {
  if (int(coeffs.size()) != ik.n) throw std::invalid_argument("length mismatch");
  const std::int64_t p_d = std::int64_t(1) << ik.shift_d;
  std::vector<std::int64_t> z(ik.n);
  for (int i = 0; i < ik.n; ++i) {
    const std::int64_t d = ik.k_d_q[i];
    z[i] = std::llabs(d) == p_d ? (d > 0 ? coeffs[i] : -std::int64_t(coeffs[i]))
                                : detail::rshift_round(d * coeffs[i], ik.shift_d);
  }
  std::vector<std::int64_t> acc(ik.n, 0);
  for (const auto& e : ik.f_q) acc[e.row] += std::int64_t(e.value) * z[e.col];
  std::vector<std::int32_t> out(ik.n);
  for (int i = 0; i < ik.n; ++i) {
    const std::int64_t q = z[i] + detail::rshift_round(acc[i], ik.shift_f);
    if (q > INT32_MAX || q < INT32_MIN) throw std::overflow_error("accumulator overflow");
    out[i] = std::int32_t(q);
  }
  return out;
}

// Transpose factorization K_dq^T (I + F_q^T).
inline std::vector<std::int32_t> inverse(const std::vector<std::int32_t>& coeffs,
                                         const IntegerTransitionKernel& ik) {
  if (int(coeffs.size()) != ik.n) throw std::invalid_argument("length mismatch");
  const std::int64_t p_d = std::int64_t(1) << ik.shift_d;
  std::vector<std::int64_t> acc(ik.n, 0);
  for (const auto& e : ik.f_q) acc[e.col] += std::int64_t(e.value) * coeffs[e.row];
  std::vector<std::int32_t> out(ik.n);
  for (int j = 0; j < ik.n; ++j) {
    const std::int64_t t = coeffs[j] + detail::rshift_round(acc[j], ik.shift_f);
    const std::int64_t d = ik.k_d_q[j];
    const std::int64_t y = std::llabs(d) == p_d
                               ? (d > 0 ? t : -t)
                               : detail::rshift_round(d * t, ik.shift_d);
    if (y > INT32_MAX || y < INT32_MIN) throw std::overflow_error("accumulator overflow");
    out[j] = std::int32_t(y);
  }
  return out;
}

// Products by +/-1 are free: a unit diagonal entry is a copy and a +/-1 entry
// of F is a plain add. One rounding shift per scaled row.
inline OpCount count_ops(const IntegerTransitionKernel& ik) {
  const int p_d = 1 << ik.shift_d;
  OpCount c;
  std::vector<int> row_nnz(ik.n, 0);
  for (int i = 0; i < ik.n; ++i)
    if (std::abs(ik.k_d_q[i]) != p_d && ik.k_d_q[i] != 0) {
      ++c.multiplications;
      ++c.shifts;
    }
  for (const auto& e : ik.f_q) {
    if (std::abs(e.value) != 1) ++c.multiplications;
    ++c.additions;
    ++row_nnz[e.row];
  }
  for (int i = 0; i < ik.n; ++i)
    if (row_nnz[i] > 0) ++c.shifts;
  return c;
}

// Row-wise grouped count for a dense integer kernel applied to one vector.
inline OpCount count_ops(const IntegerKernel& k) {
  OpCount c;
  for (int i = 0; i < k.matrix.rows(); ++i) {
    int nnz = 0;
    for (int j = 0; j < k.matrix.cols(); ++j) {
      const int v = k.matrix(i, j);
      if (v == 0) continue;
      ++nnz;
      if (std::abs(v) != 1) ++c.multiplications;
    }
    if (nnz > 0) {
      c.additions += nnz - 1;
      ++c.shifts;
    }
  }
  return c;
}

inline int nnz(const IntegerTransitionKernel& ik) {
  int n = 0;
  for (const auto& e : ik.f_q)
    if (e.value != 0) ++n;
  return n;
}

}  // namespace dttplus

#endif  // DTTPLUS_INTEGER_KERNEL_HPP
