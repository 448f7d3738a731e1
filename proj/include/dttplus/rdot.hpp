#ifndef DTTPLUS_RDOT_HPP
#define DTTPLUS_RDOT_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dttplus/base_transforms.hpp"
#include "dttplus/graph_learning.hpp"
#include "dttplus/graph_model.hpp"

namespace dttplus {

// Rate-distortion optimized transform design: Lloyd alternation between
// per-cluster DTT+ learning and RD-based reassignment against a fixed
// transform set, with a deadzone quantizer and an l1 rate proxy.

struct QuantizerSpec {
  double step = 1.0;
  double deadzone_offset = 1.0 / 6.0;  // HEVC intra convention
};

struct SeparableTransform {
  std::string name;
  EigenSystem row_basis;
  EigenSystem col_basis;
};

inline SeparableTransform dtt_plus_transform(const DttPlusParams& phi,
                                             const GeneralizedLaplacian& base_r,
                                             const GeneralizedLaplacian& base_c,
                                             const std::string& name = "dtt+") {
  SeparableTransform t;
  t.name = name;
  t.row_basis = gft(rank_one_update(base_r, phi.alpha_r, phi.beta_r, phi.i_r));
  t.col_basis = gft(rank_one_update(base_c, phi.alpha_c, phi.beta_c, phi.i_c));
  return t;
}

struct QuantizeResult {
  Eigen::MatrixXi levels;
  Eigen::MatrixXd recon;
};

// level = sign(c) * floor(|c| / step + offset); recon = level * step.
inline QuantizeResult deadzone_quantize(const Eigen::MatrixXd& coeffs,
                                        const QuantizerSpec& spec) {
  if (spec.step <= 0.0) throw std::invalid_argument("quantizer step must be positive");
  QuantizeResult r;
  r.levels.resize(coeffs.rows(), coeffs.cols());
  r.recon.resize(coeffs.rows(), coeffs.cols());
  for (int i = 0; i < coeffs.rows(); ++i)
    for (int j = 0; j < coeffs.cols(); ++j) {
      const double c = coeffs(i, j);
      const int lv = int(std::floor(std::abs(c) / spec.step + spec.deadzone_offset));
      r.levels(i, j) = c < 0 ? -lv : lv;
      r.recon(i, j) = r.levels(i, j) * spec.step;
    }
  return r;
}

// l1 rate proxy over quantized levels, used inside RDOT.
inline double rate_proxy(const Eigen::MatrixXi& levels) {
  return double(levels.cwiseAbs().sum());
}

// Zero-order empirical entropy of the level stream, in bits. Equivalent to a
// significance-flag plus value split by the entropy chain rule.
inline double entropy_bits(const std::map<int, std::int64_t>& histogram) {
  std::int64_t total = 0;
  for (const auto& [v, c] : histogram) total += c;
  if (total == 0) return 0.0;
  double bits = 0.0;
  for (const auto& [v, c] : histogram) {
    if (c == 0) continue;
    const double prob = double(c) / double(total);
    bits -= double(c) * std::log2(prob);
  }
  return bits;
}

struct RdChoice {
  int index = 0;
  double cost = 0.0;
  double distortion = 0.0;
  double rate = 0.0;  // l1 proxy + signaling
};

// Pixel-domain distortion after inverse transform of the reconstructed
// coefficients; flat log2(n_t) signaling bits per block; lowest index wins
// ties.
inline RdChoice rd_select(const Eigen::MatrixXd& block,
                          const std::vector<SeparableTransform>& transforms,
                          const QuantizerSpec& spec, double lagrangian) {
  if (transforms.empty()) throw std::invalid_argument("no transforms");
  const double signaling =
      transforms.size() > 1 ? std::log2(double(transforms.size())) : 0.0;
  RdChoice best;
  bool first = true;
  for (int t = 0; t < int(transforms.size()); ++t) {
    const auto& tr = transforms[t];
    const Eigen::MatrixXd C = apply_separable(block, tr.row_basis, tr.col_basis);
    const QuantizeResult q = deadzone_quantize(C, spec);
    const Eigen::MatrixXd rec =
        tr.col_basis.basis * q.recon * tr.row_basis.basis.transpose();
    const double d = (block - rec).squaredNorm();
    const double r = rate_proxy(q.levels) + signaling;
    const double j = d + lagrangian * r;
    if (first || j < best.cost - 1e-12) {
      best = {t, j, d, r};
      first = false;
    }
  }
  return best;
}

struct RdotState {
  std::vector<SeparableTransform> fixed_transforms;
  std::vector<DttPlusParams> learned_params;
  std::vector<SeparableTransform> learned_transforms;
  std::vector<int> assignments;     // transform index per example
  double lagrangian = 0.0;
  std::vector<double> cost_trace;   // total RD cost per iteration
  int iterations = 0;
};

struct RdotConfig {
  int n_learned = 1;
  double lagrangian = 1.0;
  QuantizerSpec quantizer;
  double tol = 0.01;  // stop when the relative RD-cost decrease drops below
  int max_iters = 20;
  std::uint64_t seed = 0;
  BaseGraphKind base_r = BaseGraphKind::PathGraph;
  BaseGraphKind base_c = BaseGraphKind::PathGraph;
};

namespace detail {

inline LearningSolution learn_cluster(const std::vector<Eigen::MatrixXd>& blocks,
                                      const std::vector<int>& members, int n,
                                      BaseGraphKind base_r, BaseGraphKind base_c) {
  std::vector<Eigen::MatrixXd> sub;
  sub.reserve(members.size());
  for (int m : members) sub.push_back(blocks[m]);
  const Eigen::MatrixXd S = sample_covariance(center_blocks(sub));
  return solve(make_problem(S, n, base_r, base_c));
}

}  // namespace detail

inline RdotState rdot_design(const std::vector<Eigen::MatrixXd>& blocks,
                             const std::vector<SeparableTransform>& fixed,
                             const RdotConfig& cfg) {
  if (blocks.empty()) throw std::invalid_argument("no blocks");
  if (cfg.n_learned < 1) throw std::invalid_argument("need at least one learned transform");
  const int n = int(blocks[0].rows());
  const int ne = int(blocks.size());
  const int n_fixed = int(fixed.size());
  const int nt = n_fixed + cfg.n_learned;

  RdotState st;
  st.fixed_transforms = fixed;
  st.lagrangian = cfg.lagrangian;
  st.learned_params.assign(cfg.n_learned, DttPlusParams{});
  st.learned_transforms.assign(cfg.n_learned, SeparableTransform{});

  // random initial partition over the learned clusters
  std::mt19937_64 rng(cfg.seed);
  st.assignments.resize(ne);
  for (int i = 0; i < ne; ++i)
    st.assignments[i] = n_fixed + int(rng() % std::uint64_t(cfg.n_learned));

  const GeneralizedLaplacian Lr = base_laplacian(cfg.base_r, n);
  const GeneralizedLaplacian Lc = base_laplacian(cfg.base_c, n);

  // baseline for the first relative-decrease check: best fixed transform per
  // block (when a fixed set exists)
  double prev_cost = std::numeric_limits<double>::infinity();
  if (n_fixed > 0) {
    prev_cost = 0.0;
    for (const auto& b : blocks)
      prev_cost += rd_select(b, st.fixed_transforms, cfg.quantizer, cfg.lagrangian).cost;
  }
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // clusters of the learned transforms; repair empties by splitting the
    // largest cluster
    std::vector<std::vector<int>> members(cfg.n_learned);
    for (int i = 0; i < ne; ++i) {
      const int a = st.assignments[i];
      if (a >= n_fixed) members[a - n_fixed].push_back(i);
    }
    for (int j = 0; j < cfg.n_learned; ++j) {
      if (!members[j].empty()) continue;
      int largest = 0;
      for (int k = 1; k < cfg.n_learned; ++k)
        if (members[k].size() > members[largest].size()) largest = k;
      if (members[largest].size() < 2) {
        // nothing to split; seed from a random subset of all examples
        for (int i = 0; i < ne; ++i)
          if (rng() % 4 == 0) members[j].push_back(i);
        if (members[j].empty()) members[j].push_back(int(rng() % std::uint64_t(ne)));
        continue;
      }
      std::vector<int> keep, moved;
      for (std::size_t t = 0; t < members[largest].size(); ++t)
        ((rng() & 1) ? moved : keep).push_back(members[largest][t]);
      if (moved.empty()) moved.push_back(keep.back()), keep.pop_back();
      if (keep.empty()) keep.push_back(moved.back()), moved.pop_back();
      members[largest] = keep;
      members[j] = moved;
    }

    // relearn per cluster; a failed learn keeps the previous transform
    for (int j = 0; j < cfg.n_learned; ++j) {
      try {
        const LearningSolution sol =
            detail::learn_cluster(blocks, members[j], n, cfg.base_r, cfg.base_c);
        st.learned_params[j] = sol.params;
        st.learned_transforms[j] = dtt_plus_transform(
            sol.params, Lr, Lc, "dtt+_" + std::to_string(j));
      } catch (const std::exception&) {
        if (st.learned_transforms[j].row_basis.basis.size() == 0)
          st.learned_transforms[j] =
              SeparableTransform{"dtt+_" + std::to_string(j), gft(Lr), gft(Lc)};
      }
    }

    std::vector<SeparableTransform> all = st.fixed_transforms;
    for (const auto& t : st.learned_transforms) all.push_back(t);

    double total = 0.0;
    for (int i = 0; i < ne; ++i) {
      const RdChoice c = rd_select(blocks[i], all, cfg.quantizer, cfg.lagrangian);
      st.assignments[i] = c.index;
      total += c.cost;
    }
    st.cost_trace.push_back(total);
    st.iterations = iter + 1;
    (void)nt;
    if (std::isfinite(prev_cost) &&
        (prev_cost - total) < cfg.tol * std::abs(prev_cost))
      break;
    prev_cost = total;
  }
  return st;
}

}  // namespace dttplus

#endif  // DTTPLUS_RDOT_HPP
