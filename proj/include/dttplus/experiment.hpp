#ifndef DTTPLUS_EXPERIMENT_HPP
#define DTTPLUS_EXPERIMENT_HPP

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dttplus/bdrate.hpp"
#include "dttplus/dataset.hpp"
#include "dttplus/integer_kernel.hpp"
#include "dttplus/mode_clustering.hpp"
#include "dttplus/rdot.hpp"
#include "dttplus/serialization.hpp"

namespace dttplus {

// End-to-end evaluation harness: synthesize residuals per mode, RDOT-train
// DTT+ against a fixed DCT-2/DST-7 MTS-style set, derive INT-DTT+ and
// sep-KLT baselines, encode the test split over a Delta/lambda sweep, and
// report RD curves plus BD-rates against the fixed set.

inline std::vector<SeparableTransform> mts_fixed_set(int n) {
  const EigenSystem dct = closed_form_dct2(n);
  const EigenSystem dst = closed_form_dst7(n);
  return {{"dct2_dct2", dct, dct},
          {"dst7_dct2", dst, dct},
          {"dct2_dst7", dct, dst},
          {"dst7_dst7", dst, dst}};
}

// Row/column KLTs from the axis covariances, quantized to 8 bits and used
// through the reconstructed float basis.
inline SeparableTransform sep_klt_train(const std::vector<Eigen::MatrixXd>& blocks,
                                        int quant_shift = 7, int bit_depth = 8) {
  if (blocks.empty()) throw std::invalid_argument("no blocks");
  const int n = int(blocks[0].rows());
  Eigen::MatrixXd Cr = Eigen::MatrixXd::Zero(n, n);  // across columns (row axis)
  Eigen::MatrixXd Cc = Eigen::MatrixXd::Zero(n, n);  // across rows (column axis)
  for (const auto& b : blocks) {
    Cr += b.transpose() * b;
    Cc += b * b.transpose();
  }
  Cr /= double(blocks.size() * n);
  Cc /= double(blocks.size() * n);
  auto basis_of = [&](const Eigen::MatrixXd& C) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    Eigen::MatrixXd U = es.eigenvectors();
    // descending energy order, DC-like vector first
    U = U.rowwise().reverse().eval();
    fix_signs(U);
    EigenSystem e{U, es.eigenvalues().reverse()};
    const IntegerKernel q = quantize_basis(e, quant_shift, bit_depth);
    e.basis = q.matrix.cast<double>() / double(1 << quant_shift);
    return e;
  };
  SeparableTransform t;
  t.name = "sep_klt";
  t.row_basis = basis_of(Cr);
  t.col_basis = basis_of(Cc);
  return t;
}

// Normalized self-loop weight used by the base-transform selection rule.
inline double normalized_self_loop(double alpha, double beta) {
  return beta > 0.0 ? alpha / beta : 0.0;
}

struct IntKernelBuild {
  IntegerTransitionKernel kernel;
  TransitionKernel float_kernel;
  BaseGraphKind base;
  KernelQuality quality_metrics;
  OpCount ops;
};

// From learned model-space parameters for one axis: pick the base DTT, build
// the Cauchy transition kernel, split, quantize, fine-tune. When the learned
// graph sits above the DST-7 self-loop scale the update from that base is a
// self-loop removal (negative alpha relative to the base).
inline IntKernelBuild build_int_kernel(double alpha, double beta, int node_index,
                                       int n, int p_d = 128, int p_f = 4) {
  IntKernelBuild out;
  const double w = normalized_self_loop(alpha, beta);
  out.base = node_index == 1 ? select_base(w) : BaseGraphKind::PathGraph;
  const GeneralizedLaplacian L = base_laplacian(out.base, n);
  const EigenSystem be = base_transform(out.base, n);
  double upd_alpha = alpha;
  if (out.base == BaseGraphKind::PathWithUnitSelfLoop) upd_alpha = alpha - beta;
  out.float_kernel = transition_kernel(L, be, upd_alpha, beta, node_index);
  try {
    const SplitKernel s = split(out.float_kernel);
    out.kernel = quantize(s, out.base, p_d, p_f);
  } catch (const std::runtime_error&) {
    // dense 8-bit fallback expressed in the same record: keep the diagonal
    // and store every off-diagonal entry of K at diagonal precision
    out.kernel.n = n;
    out.kernel.base = out.base;
    out.kernel.shift_d = 7;
    out.kernel.shift_f = 7;
    out.kernel.bit_depth_d = 8;
    out.kernel.bit_depth_f = 8;
    out.kernel.split_failed = true;
    out.kernel.k_d_q.resize(n);
    for (int i = 0; i < n; ++i)
      out.kernel.k_d_q[i] =
          std::clamp(detail::round_half_away(128.0 * out.float_kernel.k_matrix(i, i)),
                     -128, 127);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const int v = std::clamp(
            detail::round_half_away(128.0 * out.float_kernel.k_matrix(i, j)), -128, 127);
        if (v != 0) out.kernel.f_q.push_back({i, j, v});
      }
  }
  out.kernel = fine_tune(out.kernel, out.float_kernel);
  out.quality_metrics = quality(out.kernel, out.float_kernel);
  out.ops = count_ops(out.kernel);
  return out;
}

// Effective separable basis of the integer kernel pair: base DTT followed by
// the reconstructed transition matrix (coefficients y = T U^T x, so the
// effective basis is U T^T).
inline SeparableTransform int_dtt_plus_transform(const IntKernelBuild& row,
                                                 const IntKernelBuild& col, int n,
                                                 const std::string& name) {
  auto eff = [&](const IntKernelBuild& b) {
    const EigenSystem base = base_transform(b.base, n);
    EigenSystem e;
    e.basis = base.basis * reconstruct(b.kernel).transpose();
    e.eigenvalues = b.float_kernel.updated_eigs;
    return e;
  };
  return {name, eff(row), eff(col)};
}

struct EncodePoint {
  double delta = 0.0;
  double lagrangian = 0.0;
  double rate = 0.0;  // bits per sample, pooled entropy + signaling
  double psnr = 0.0;
};

inline EncodePoint encode_dataset(const std::vector<Eigen::MatrixXd>& blocks,
                                  const std::vector<SeparableTransform>& transforms,
                                  double delta, double lagrangian,
                                  double deadzone_offset = 1.0 / 6.0) {
  if (blocks.empty()) throw std::invalid_argument("no blocks");
  const int n = int(blocks[0].rows());
  const QuantizerSpec spec{delta, deadzone_offset};
  const double signaling =
      transforms.size() > 1 ? std::log2(double(transforms.size())) : 0.0;
  std::map<int, std::int64_t> hist;
  double sse = 0.0;
  for (const auto& b : blocks) {
    const RdChoice ch = rd_select(b, transforms, spec, lagrangian);
    const auto& tr = transforms[ch.index];
    const Eigen::MatrixXd C = apply_separable(b, tr.row_basis, tr.col_basis);
    const QuantizeResult q = deadzone_quantize(C, spec);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ++hist[q.levels(i, j)];
    sse += ch.distortion;
  }
  const double samples = double(blocks.size()) * n * n;
  const double bits = entropy_bits(hist) + double(blocks.size()) * signaling;
  const double mse = std::max(sse / samples, 1e-12);
  EncodePoint p;
  p.delta = delta;
  p.lagrangian = lagrangian;
  p.rate = bits / samples;
  p.psnr = 10.0 * std::log10(255.0 * 255.0 / mse);
  return p;
}

struct ModeSpec {
  std::string name;
  SynthModel model;
};

struct ExperimentConfig {
  int n = 8;
  std::vector<ModeSpec> modes;
  int train_count = 2000;
  int test_count = 5000;
  int n_learned = 2;
  double delta_ref = 12.0;
  std::vector<double> sweep = {0.1, 0.5, 2.0, 10.0, 40.0};  // lambda multipliers
  double train_lambda_multiplier = 2.0;  // RDOT training point of the sweep
  double rdot_tol = 0.01;
  int rdot_max_iters = 20;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

struct ModeResult {
  std::string name;
  std::vector<DttPlusParams> learned;
  std::vector<IntKernelBuild> int_row, int_col;
  std::map<std::string, std::vector<EncodePoint>> points;  // per config
  std::map<std::string, double> bd_vs_fixed;               // per config
  std::vector<OpCount> op_counts;
  std::int64_t int_memory_bits = 0;
  int rdot_iterations = 0;
  std::vector<double> rdot_cost_trace;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ModeResult> modes;
  std::map<std::string, double> mean_bd_vs_fixed;
};

inline std::pair<double, double> sweep_point(double multiplier, double delta_ref) {
  // lambda tied to the squared step so rate and distortion move together;
  // the 0.4 factor puts the deadzone quantizer near its RD-optimal operating
  // point for the l1 rate proxy
  const double delta = delta_ref * std::sqrt(multiplier);
  return {delta, 0.4 * delta * delta};
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.modes.empty()) throw std::invalid_argument("no modes configured");
  ExperimentReport rep;
  rep.config = cfg;

  const std::vector<SeparableTransform> fixed = mts_fixed_set(cfg.n);

  for (std::size_t mi = 0; mi < cfg.modes.size(); ++mi) {
    const ModeSpec& ms = cfg.modes[mi];
    SynthModel train_model = ms.model;
    train_model.n = cfg.n;
    train_model.count = cfg.train_count;
    train_model.seed = cfg.seed * 1000003 + mi * 2 + 1;
    SynthModel test_model = train_model;
    test_model.count = cfg.test_count;
    test_model.seed = cfg.seed * 1000003 + mi * 2 + 2;

    const auto train = blocks_as_double(synth_residuals(train_model, ms.name));
    const auto test = blocks_as_double(synth_residuals(test_model, ms.name));

    ModeResult mr;
    mr.name = ms.name;

    RdotConfig rc;
    rc.n_learned = cfg.n_learned;
    const auto [train_delta, train_lambda] =
        sweep_point(cfg.train_lambda_multiplier, cfg.delta_ref);
    rc.quantizer.step = train_delta;
    rc.lagrangian = train_lambda;
    rc.tol = cfg.rdot_tol;
    rc.max_iters = cfg.rdot_max_iters;
    rc.seed = cfg.seed + mi;
    const RdotState rdot = rdot_design(train, fixed, rc);
    mr.learned = rdot.learned_params;
    mr.rdot_iterations = rdot.iterations;
    mr.rdot_cost_trace = rdot.cost_trace;

    std::vector<SeparableTransform> dtt_set = fixed;
    std::vector<SeparableTransform> int_set = fixed;
    for (std::size_t j = 0; j < rdot.learned_params.size(); ++j) {
      const DttPlusParams& p = rdot.learned_params[j];
      dtt_set.push_back(rdot.learned_transforms[j]);
      // F precision 1/8: the coarser 1/4 grid cannot represent learned
      // off-diagonal corrections near 1/8 and the RD loss versus the float
      // kernel becomes visible; the multiplication count is unchanged
      IntKernelBuild row = build_int_kernel(p.alpha_r, p.beta_r, p.i_r, cfg.n, 128, 8);
      IntKernelBuild col = build_int_kernel(p.alpha_c, p.beta_c, p.i_c, cfg.n, 128, 8);
      int_set.push_back(int_dtt_plus_transform(row, col, cfg.n,
                                               "int_dtt+_" + std::to_string(j)));
      mr.op_counts.push_back(row.ops);
      mr.op_counts.push_back(col.ops);
      mr.int_memory_bits += memory_bits(row.kernel) + memory_bits(col.kernel);
      mr.int_row.push_back(std::move(row));
      mr.int_col.push_back(std::move(col));
    }
    std::vector<SeparableTransform> klt_set = fixed;
    klt_set.push_back(sep_klt_train(center_blocks(train)));

    const std::map<std::string, const std::vector<SeparableTransform>*> configs = {
        {"fixed", &fixed},
        {"fixed+dttplus", &dtt_set},
        {"fixed+intdttplus", &int_set},
        {"fixed+sepklt", &klt_set}};

    for (const auto& [name, set] : configs) {
      std::vector<EncodePoint> pts;
      for (double mult : cfg.sweep) {
        const auto [delta, lambda] = sweep_point(mult, cfg.delta_ref);
        pts.push_back(encode_dataset(test, *set, delta, lambda));
      }
      std::sort(pts.begin(), pts.end(),
                [](const EncodePoint& a, const EncodePoint& b) { return a.rate < b.rate; });
      mr.points[name] = std::move(pts);
    }
    auto as_curve = [](const std::vector<EncodePoint>& pts) {
      RdCurve c;
      for (const auto& p : pts) c.push_back({p.rate, p.psnr});
      return c;
    };
    for (const auto& [name, pts] : mr.points)
      if (name != "fixed")
        mr.bd_vs_fixed[name] = bd_rate(as_curve(mr.points.at("fixed")), as_curve(pts));
    rep.modes.push_back(std::move(mr));
  }

  for (const auto& mr : rep.modes)
    for (const auto& [name, bd] : mr.bd_vs_fixed)
      rep.mean_bd_vs_fixed[name] += bd / double(rep.modes.size());
  return rep;
}

inline void write_report(const ExperimentReport& rep, const std::string& out_dir) {
  std::string csv_path = out_dir + "/report.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path + " for writing");
  csv << "config,mode,delta,lambda,rate,psnr\n";
  char buf[160];
  for (const auto& mr : rep.modes)
    for (const auto& [name, pts] : mr.points)
      for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.9f,%.6f\n", name.c_str(),
                      mr.name.c_str(), p.delta, p.lagrangian, p.rate, p.psnr);
        csv << buf;
      }

  json j;
  j["format"] = "int-dtt+-report";
  j["version"] = 1;
  j["n"] = rep.config.n;
  j["seed"] = rep.config.seed;
  j["mean_bd_vs_fixed"] = rep.mean_bd_vs_fixed;
  json modes = json::array();
  for (const auto& mr : rep.modes) {
    json m;
    m["mode"] = mr.name;
    m["bd_vs_fixed"] = mr.bd_vs_fixed;
    m["rdot_iterations"] = mr.rdot_iterations;
    m["rdot_cost_trace"] = mr.rdot_cost_trace;
    m["int_memory_bits"] = mr.int_memory_bits;
    json params = json::array();
    for (const auto& p : mr.learned) params.push_back(to_json(p));
    m["learned_params"] = params;
    json ops = json::array();
    for (const auto& o : mr.op_counts)
      ops.push_back({{"mults", o.multiplications},
                     {"adds", o.additions},
                     {"shifts", o.shifts}});
    m["op_counts"] = ops;
    json kernels = json::array();
    for (std::size_t k = 0; k < mr.int_row.size(); ++k) {
      kernels.push_back({{"row", to_json(mr.int_row[k].kernel)},
                         {"col", to_json(mr.int_col[k].kernel)}});
    }
    m["int_kernels"] = kernels;
    modes.push_back(std::move(m));
  }
  j["modes"] = modes;
  j["sep_klt_memory_bits_per_kernel"] = sep_klt_memory_bits(rep.config.n);
  write_json(j, out_dir + "/report.json");
}

}  // namespace dttplus

#endif  // DTTPLUS_EXPERIMENT_HPP
