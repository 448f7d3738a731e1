#ifndef DTTPLUS_SERIALIZATION_HPP
#define DTTPLUS_SERIALIZATION_HPP

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dttplus/bdrate.hpp"
#include "dttplus/graph_learning.hpp"
#include "dttplus/graph_model.hpp"
#include "dttplus/integer_kernel.hpp"

namespace dttplus {

using nlohmann::json;

inline json to_json(const DttPlusParams& p) {
  return json{{"alpha_r", p.alpha_r}, {"beta_r", p.beta_r},
              {"alpha_c", p.alpha_c}, {"beta_c", p.beta_c},
              {"i_r", p.i_r},         {"i_c", p.i_c}};
}

inline DttPlusParams params_from_json(const json& j) {
  DttPlusParams p;
  p.alpha_r = j.at("alpha_r");
  p.beta_r = j.at("beta_r");
  p.alpha_c = j.at("alpha_c");
  p.beta_c = j.at("beta_c");
  p.i_r = j.at("i_r");
  p.i_c = j.at("i_c");
  return p;
}

inline json to_json(const LearningSolution& s) {
  return json{{"params", to_json(s.params)},
              {"cost", s.cost},
              {"grad_norm", s.grad_norm},
              {"newton_iters", s.newton_iters},
              {"converged", s.converged}};
}

// Versioned integer-kernel record; integers only, so round-trips are
// bit-exact.
inline json to_json(const IntegerTransitionKernel& ik) {
  json f = json::array();
  for (const auto& e : ik.f_q) f.push_back({e.row, e.col, e.value});
  return json{{"format", "int-dtt+-kernel"},
              {"version", 1},
              {"base", to_string(ik.base)},
              {"n", ik.n},
              {"shift_d", ik.shift_d},
              {"shift_f", ik.shift_f},
              {"bit_depth_d", ik.bit_depth_d},
              {"bit_depth_f", ik.bit_depth_f},
              {"k_d_q", ik.k_d_q},
              {"f_q", f},
              {"split_failed", ik.split_failed}};
}

inline IntegerTransitionKernel kernel_from_json(const json& j) {
  if (j.at("format") != "int-dtt+-kernel" || int(j.at("version")) != 1)
    throw std::runtime_error("unsupported kernel record");
  IntegerTransitionKernel ik;
  ik.base = base_graph_kind_from_string(j.at("base"));
  ik.n = j.at("n");
  ik.shift_d = j.at("shift_d");
  ik.shift_f = j.at("shift_f");
  ik.bit_depth_d = j.at("bit_depth_d");
  ik.bit_depth_f = j.at("bit_depth_f");
  ik.k_d_q = j.at("k_d_q").get<std::vector<int>>();
  for (const auto& e : j.at("f_q"))
    ik.f_q.push_back({e.at(0), e.at(1), e.at(2)});
  ik.split_failed = j.at("split_failed");
  return ik;
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return json::parse(is);
}

inline void write_curve_csv(const RdCurve& c, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "rate,psnr\n";
  char buf[80];
  for (const auto& p : c) {
    std::snprintf(buf, sizeof buf, "%.9f,%.6f\n", p.rate, p.psnr);
    os << buf;
  }
}

inline RdCurve read_curve_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(is, line);  // header
  RdCurve c;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed curve CSV");
    c.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return c;
}

}  // namespace dttplus

#endif  // DTTPLUS_SERIALIZATION_HPP
