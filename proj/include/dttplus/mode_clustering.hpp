#ifndef DTTPLUS_MODE_CLUSTERING_HPP
#define DTTPLUS_MODE_CLUSTERING_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dttplus/graph_model.hpp"
#include "dttplus/integer_kernel.hpp"

namespace dttplus {

// k-means grouping of per-mode DTT+ parameters on z-scored
// (alpha_r, beta_r, alpha_c, beta_c) features, with seeded k-means++
// initialization. Centroid index fields are the modal index within the
// cluster.

struct ClusterResult {
  std::vector<int> assignment;          // cluster per mode
  std::vector<DttPlusParams> centroids;
  double objective = 0.0;               // within-cluster squared distance
};

inline ClusterResult cluster_weights(const std::vector<DttPlusParams>& params_by_mode,
                                     int k, std::uint64_t seed = 0,
                                     int max_iters = 100) {
  const int m = int(params_by_mode.size());
  if (k < 1 || k > m) throw std::invalid_argument("k must be in [1, modes]");

  Eigen::MatrixXd X(m, 4);
  for (int i = 0; i < m; ++i)
    X.row(i) << params_by_mode[i].alpha_r, params_by_mode[i].beta_r,
        params_by_mode[i].alpha_c, params_by_mode[i].beta_c;
  Eigen::RowVector4d mean = X.colwise().mean();
  Eigen::RowVector4d sd;
  for (int c = 0; c < 4; ++c) {
    const double var = (X.col(c).array() - mean(c)).square().mean();
    sd(c) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd Z = (X.rowwise() - mean).array().rowwise() / sd.array();

  // k-means++ seeding
  std::mt19937_64 rng(seed);
  auto pick_uniform = [&](int hi) { return int(rng() % std::uint64_t(hi)); };
  Eigen::MatrixXd C(k, 4);
  C.row(0) = Z.row(pick_uniform(m));
  Eigen::VectorXd d2 = (Z.rowwise() - C.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      const double u = (double(rng() >> 11) / 9007199254740992.0) * total;
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        acc += d2(i);
        if (acc >= u) { pick = i; break; }
      }
    } else {
      pick = pick_uniform(m);
    }
    C.row(c) = Z.row(pick);
    d2 = d2.cwiseMin((Z.rowwise() - C.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(m, 0);
  double obj = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    obj = 0.0;
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      int best = 0;
      double bd = (Z.row(i) - C.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (Z.row(i) - C.row(c)).squaredNorm();
        if (d < bd - 1e-15) { bd = d; best = c; }
      }
      if (best != assign[i]) { assign[i] = best; changed = true; }
      obj += bd;
    }
    Eigen::MatrixXd Cn = Eigen::MatrixXd::Zero(k, 4);
    Eigen::VectorXi cnt = Eigen::VectorXi::Zero(k);
    for (int i = 0; i < m; ++i) {
      Cn.row(assign[i]) += Z.row(i);
      ++cnt(assign[i]);
    }
    for (int c = 0; c < k; ++c)
      if (cnt(c) > 0) C.row(c) = Cn.row(c) / double(cnt(c));
    if (!changed && it > 0) break;
  }

  ClusterResult res;
  res.assignment = assign;
  res.objective = obj;
  res.centroids.resize(k);
  for (int c = 0; c < k; ++c) {
    Eigen::RowVector4d f = C.row(c).array() * sd.array() + mean.array();
    DttPlusParams p;
    p.alpha_r = std::max(0.0, f(0));
    p.beta_r = std::max(1e-12, f(1));
    p.alpha_c = std::max(0.0, f(2));
    p.beta_c = std::max(1e-12, f(3));
    // modal (most frequent) index among cluster members
    std::vector<int> hist_r, hist_c;
    int best_r = 1, best_c = 1, cnt_r = 0, cnt_c = 0;
    for (int i = 0; i < m; ++i) {
      if (assign[i] != c) continue;
      int cr = 0, cc = 0;
      for (int j = 0; j < m; ++j) {
        if (assign[j] != c) continue;
        if (params_by_mode[j].i_r == params_by_mode[i].i_r) ++cr;
        if (params_by_mode[j].i_c == params_by_mode[i].i_c) ++cc;
      }
      if (cr > cnt_r) { cnt_r = cr; best_r = params_by_mode[i].i_r; }
      if (cc > cnt_c) { cnt_c = cc; best_c = params_by_mode[i].i_c; }
    }
    p.i_r = best_r;
    p.i_c = best_c;
    res.centroids[c] = p;
  }
  return res;
}

// Storage accounting. sep-KLT: two dense n x n kernels at `bit_depth` bits.
// INT-DTT+: n diagonal integers at bit_depth_d, each stored F entry at
// bit_depth_f plus ceil(log2 n) bits per coordinate, plus a 16-bit header
// (base kind and entry count).
inline std::int64_t sep_klt_memory_bits(int n, int bit_depth = 8) {
  return std::int64_t(2) * n * n * bit_depth;
}

inline std::int64_t memory_bits(const IntegerTransitionKernel& ik) {
  const int index_bits = int(std::ceil(std::log2(double(ik.n))));
  return 16 + std::int64_t(ik.n) * ik.bit_depth_d +
         std::int64_t(nnz(ik)) * (ik.bit_depth_f + 2 * index_bits);
}

inline std::int64_t memory_bits(const std::vector<IntegerTransitionKernel>& set) {
  std::int64_t total = 0;
  for (const auto& ik : set) total += memory_bits(ik);
  return total;
}

}  // namespace dttplus

#endif  // DTTPLUS_MODE_CLUSTERING_HPP
