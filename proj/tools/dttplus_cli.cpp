// Command-line front end: synthetic residual generation, graph learning,
// integer-kernel construction, encoding sweeps, BD-rate, experiment reports,
// and mode clustering.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dttplus/experiment.hpp"

using namespace dttplus;

namespace {

// Minimal key=value config reader ('#' comments, blank lines ignored).
std::map<std::string, std::string> read_config(const std::string& path,
                                               std::vector<std::string>& order) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (!kv.count(key)) order.push_back(key);
    kv[key] = val;
  }
  return kv;
}

ExperimentConfig config_from_file(const std::string& path) {
  std::vector<std::string> order;
  const auto kv = read_config(path, order);
  ExperimentConfig cfg;
  std::vector<std::string> mode_order;
  std::map<std::string, SynthModel> mode_models;

  auto to_d = [](const std::string& s) { return std::stod(s); };
  auto to_i = [](const std::string& s) { return std::stoi(s); };

  for (const auto& key : order) {
    const std::string& val = kv.at(key);
    if (key == "n") cfg.n = to_i(val);
    else if (key == "train_count") cfg.train_count = to_i(val);
    else if (key == "test_count") cfg.test_count = to_i(val);
    else if (key == "n_learned") cfg.n_learned = to_i(val);
    else if (key == "delta_ref") cfg.delta_ref = to_d(val);
    else if (key == "train_lambda_multiplier") cfg.train_lambda_multiplier = to_d(val);
    else if (key == "rdot_tol") cfg.rdot_tol = to_d(val);
    else if (key == "rdot_max_iters") cfg.rdot_max_iters = to_i(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "out_dir") cfg.out_dir = val;
    else if (key == "sweep") {
      cfg.sweep.clear();
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.sweep.push_back(to_d(tok));
    } else if (key.rfind("mode.", 0) == 0) {
      const auto dot = key.find('.', 5);
      if (dot == std::string::npos)
        throw std::invalid_argument("mode keys are mode.<name>.<field>: " + key);
      const std::string name = key.substr(5, dot - 5);
      const std::string field = key.substr(dot + 1);
      if (!mode_models.count(name)) {
        mode_order.push_back(name);
        mode_models[name] = SynthModel{};
      }
      SynthModel& m = mode_models[name];
      if (field == "rho_r") m.rho_r = to_d(val);
      else if (field == "rho_c") m.rho_c = to_d(val);
      else if (field == "boundary_decay") m.boundary_decay = to_d(val);
      else if (field == "sigma") m.sigma = to_d(val);
      else throw std::invalid_argument("unknown mode field: " + key);
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  for (const auto& name : mode_order)
    cfg.modes.push_back({name, mode_models.at(name)});
  if (cfg.modes.empty())
    throw std::invalid_argument("config declares no modes (mode.<name>.<field> keys)");
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"DTT+ transform design and evaluation toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic residual dataset");
  SynthModel sm;
  std::string synth_out = "residuals.bin", synth_mode = "synthetic";
  synth->add_option("--n", sm.n, "block size");
  synth->add_option("--count", sm.count, "number of blocks");
  synth->add_option("--rho-r", sm.rho_r, "row-axis AR(1) correlation");
  synth->add_option("--rho-c", sm.rho_c, "column-axis AR(1) correlation");
  synth->add_option("--boundary-decay", sm.boundary_decay,
                    "variance at the predicted boundary (1 = stationary)");
  synth->add_option("--sigma", sm.sigma, "residual scale");
  synth->add_option("--seed", sm.seed, "RNG seed");
  synth->add_option("--mode-name", synth_mode, "mode label");
  synth->add_option("--out", synth_out, "output dataset path");

  // learn
  auto* learn = app.add_subcommand("learn", "fit a separable DTT+ model");
  std::string learn_in, learn_out = "learned.json";
  std::string learn_base_r = "path", learn_base_c = "path";
  int learn_mode = -1;
  learn->add_option("--dataset", learn_in, "input dataset")->required();
  learn->add_option("--mode", learn_mode, "mode index filter (-1 = all blocks)");
  learn->add_option("--base-r", learn_base_r, "row base graph (path|path_self_loop)");
  learn->add_option("--base-c", learn_base_c, "column base graph");
  learn->add_option("--out", learn_out, "output solution JSON");

  // quantize-kernel
  auto* qk = app.add_subcommand("quantize-kernel",
                                "build integer row/column kernels from a solution");
  std::string qk_in, qk_out = "kernels.json";
  int qk_n = 8;
  qk->add_option("--solution", qk_in, "learned solution JSON")->required();
  qk->add_option("--n", qk_n, "block size");
  qk->add_option("--out", qk_out, "output kernel JSON");

  // encode
  auto* enc = app.add_subcommand("encode", "encode a dataset over the step sweep");
  std::string enc_in, enc_out = "curve.csv", enc_params;
  double enc_delta_ref = 12.0;
  std::vector<double> enc_sweep = {0.1, 0.5, 2.0, 10.0, 40.0};
  enc->add_option("--dataset", enc_in, "input dataset")->required();
  enc->add_option("--params", enc_params,
                  "learned solution JSON added to the fixed transform set");
  enc->add_option("--delta-ref", enc_delta_ref, "reference quantizer step");
  enc->add_option("--sweep", enc_sweep, "lambda multipliers")->expected(-1);
  enc->add_option("--out", enc_out, "output curve CSV");

  // bdrate
  auto* bd = app.add_subcommand("bdrate", "BD-rate between two curve CSVs");
  std::string bd_a, bd_b;
  bd->add_option("--curve-a", bd_a, "baseline curve CSV")->required();
  bd->add_option("--curve-b", bd_b, "test curve CSV")->required();

  // report
  auto* rep = app.add_subcommand("report", "run the full experiment pipeline");
  std::string rep_cfg, rep_out_dir;
  std::uint64_t rep_seed = 0;
  bool rep_seed_set = false, rep_out_set = false;
  rep->add_option("--config", rep_cfg, "key=value experiment config")->required();
  rep->add_option("--seed", rep_seed, "seed override")
      ->each([&](const std::string&) { rep_seed_set = true; });
  rep->add_option("--out-dir", rep_out_dir, "output directory override")
      ->each([&](const std::string&) { rep_out_set = true; });

  // cluster-modes
  auto* cl = app.add_subcommand("cluster-modes", "k-means over per-mode parameters");
  std::string cl_in, cl_out = "clusters.json";
  int cl_k = 3;
  std::uint64_t cl_seed = 0;
  cl->add_option("--params", cl_in, "JSON array of per-mode parameter records")
      ->required();
  cl->add_option("--k", cl_k, "number of clusters");
  cl->add_option("--seed", cl_seed, "RNG seed");
  cl->add_option("--out", cl_out, "output JSON");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    const ResidualDataset d = synth_residuals(sm, synth_mode);
    save_dataset(d, synth_out);
    std::cout << "wrote " << d.blocks.size() << " blocks (" << d.n << "x" << d.n
              << ") to " << synth_out << "\n";
  } else if (learn->parsed()) {
    const ResidualDataset d = load_dataset(learn_in);
    const auto blocks = blocks_as_double(d, learn_mode);
    if (blocks.empty()) throw std::invalid_argument("no blocks match the mode filter");
    const Eigen::MatrixXd S = sample_covariance(center_blocks(blocks));
    const auto p = make_problem(S, d.n, base_graph_kind_from_string(learn_base_r),
                                base_graph_kind_from_string(learn_base_c));
    const LearningSolution sol = solve(p);
    write_json(to_json(sol), learn_out);
    std::cout << "cost " << sol.cost << ", grad " << sol.grad_norm << ", self-loop at ("
              << sol.params.i_r << ", " << sol.params.i_c << "), wrote " << learn_out
              << "\n";
  } else if (qk->parsed()) {
    const json sol = read_json(qk_in);
    const DttPlusParams p = params_from_json(sol.contains("params") ? sol.at("params")
                                                                    : sol);
    const IntKernelBuild row = build_int_kernel(p.alpha_r, p.beta_r, p.i_r, qk_n);
    const IntKernelBuild col = build_int_kernel(p.alpha_c, p.beta_c, p.i_c, qk_n);
    json out{{"row", to_json(row.kernel)},
             {"col", to_json(col.kernel)},
             {"row_quality",
              {{"orthogonality", row.quality_metrics.orthogonality},
               {"closeness", row.quality_metrics.closeness},
               {"norm_dev", row.quality_metrics.norm_dev}}},
             {"col_quality",
              {{"orthogonality", col.quality_metrics.orthogonality},
               {"closeness", col.quality_metrics.closeness},
               {"norm_dev", col.quality_metrics.norm_dev}}},
             {"row_ops",
              {{"mults", row.ops.multiplications},
               {"adds", row.ops.additions},
               {"shifts", row.ops.shifts}}},
             {"col_ops",
              {{"mults", col.ops.multiplications},
               {"adds", col.ops.additions},
               {"shifts", col.ops.shifts}}},
             {"memory_bits", memory_bits(row.kernel) + memory_bits(col.kernel)}};
    write_json(out, qk_out);
    std::cout << "wrote " << qk_out << "\n";
  } else if (enc->parsed()) {
    const ResidualDataset d = load_dataset(enc_in);
    const auto blocks = blocks_as_double(d);
    std::vector<SeparableTransform> set = mts_fixed_set(d.n);
    if (!enc_params.empty()) {
      const json sol = read_json(enc_params);
      const DttPlusParams p =
          params_from_json(sol.contains("params") ? sol.at("params") : sol);
      set.push_back(dtt_plus_transform(p, path_laplacian(d.n), path_laplacian(d.n),
                                       "dtt+"));
    }
    RdCurve curve;
    std::vector<EncodePoint> pts;
    for (double mult : enc_sweep) {
      const auto [delta, lambda] = sweep_point(mult, enc_delta_ref);
      pts.push_back(encode_dataset(blocks, set, delta, lambda));
    }
    std::sort(pts.begin(), pts.end(),
              [](const EncodePoint& a, const EncodePoint& b) { return a.rate < b.rate; });
    for (const auto& p : pts) curve.push_back({p.rate, p.psnr});
    write_curve_csv(curve, enc_out);
    std::cout << "wrote " << curve.size() << " RD points to " << enc_out << "\n";
  } else if (bd->parsed()) {
    const double pct = bd_rate(read_curve_csv(bd_a), read_curve_csv(bd_b));
    std::cout << pct << "\n";
  } else if (rep->parsed()) {
    ExperimentConfig cfg = config_from_file(rep_cfg);
    if (rep_seed_set) cfg.seed = rep_seed;
    if (rep_out_set) cfg.out_dir = rep_out_dir;
    const ExperimentReport report = run_experiment(cfg);
    write_report(report, cfg.out_dir);
    for (const auto& [name, bdpct] : report.mean_bd_vs_fixed)
      std::cout << name << " BD-rate vs fixed: " << bdpct << "%\n";
    std::cout << "wrote " << cfg.out_dir << "/report.csv and report.json\n";
  } else if (cl->parsed()) {
    const json arr = read_json(cl_in);
    std::vector<DttPlusParams> params;
    for (const auto& e : arr)
      params.push_back(params_from_json(e.contains("params") ? e.at("params") : e));
    const ClusterResult r = cluster_weights(params, cl_k, cl_seed);
    json out{{"assignment", r.assignment}, {"objective", r.objective}};
    json cents = json::array();
    for (const auto& c : r.centroids) cents.push_back(to_json(c));
    out["centroids"] = cents;
    write_json(out, cl_out);
    std::cout << "wrote " << cl_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
