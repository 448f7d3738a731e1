#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <Eigen/Dense>

#include "dttplus/base_transforms.hpp"
#include "dttplus/graph_model.hpp"
#include "dttplus/integer_kernel.hpp"
#include "dttplus/progressive.hpp"
#include "dttplus/serialization.hpp"

using namespace dttplus;

namespace {

TransitionKernel kernel_from_matrix(const Eigen::MatrixXd& K) {
  TransitionKernel t;
  t.k_matrix = K;
  const int n = int(K.rows());
  t.a = Eigen::VectorXd::Ones(n);
  t.z = Eigen::VectorXd::Zero(n);
  t.base_eigs = Eigen::VectorXd::Zero(n);
  t.updated_eigs = Eigen::VectorXd::Zero(n);
  return t;
}

TransitionKernel learned_kernel() {
  const auto base = path_with_self_loop_laplacian(8);
  return transition_kernel(base, gft(base), 0.35, 1.0, 1);
}

// Independent fixed-point oracle: wide integers, truncating division with a
// signed half offset (equals round-half-away-from-zero).
std::vector<std::int32_t> forward_oracle(const std::vector<std::int32_t>& y,
                                         const IntegerTransitionKernel& ik) {
  using wide = __int128;
  const wide pd = wide(1) << ik.shift_d, pf = wide(1) << ik.shift_f;
  auto div_round = [](wide v, wide p) {
    const wide half = p / 2;
    return (v >= 0 ? v + half : v - half) / p;
  };
  std::vector<wide> z(ik.n), acc(ik.n, 0);
  for (int i = 0; i < ik.n; ++i) {
    const wide d = ik.k_d_q[i];
    z[i] = (d == pd || d == -pd) ? (d > 0 ? wide(y[i]) : -wide(y[i]))
                                 : div_round(d * y[i], pd);
  }
  for (const auto& e : ik.f_q) acc[e.row] += wide(e.value) * z[e.col];
  std::vector<std::int32_t> out(ik.n);
  for (int i = 0; i < ik.n; ++i) out[i] = std::int32_t(z[i] + div_round(acc[i], pf));
  return out;
}

std::vector<std::int32_t> inverse_oracle(const std::vector<std::int32_t>& q,
                                         const IntegerTransitionKernel& ik) {
  using wide = __int128;
  const wide pd = wide(1) << ik.shift_d, pf = wide(1) << ik.shift_f;
  auto div_round = [](wide v, wide p) {
    const wide half = p / 2;
    return (v >= 0 ? v + half : v - half) / p;
  };
  std::vector<wide> acc(ik.n, 0);
  for (const auto& e : ik.f_q) acc[e.col] += wide(e.value) * q[e.row];
  std::vector<std::int32_t> out(ik.n);
  for (int j = 0; j < ik.n; ++j) {
    const wide t = wide(q[j]) + div_round(acc[j], pf);
    const wide d = ik.k_d_q[j];
    const wide y = (d == pd || d == -pd) ? (d > 0 ? t : -t) : div_round(d * t, pd);
    out[j] = std::int32_t(y);
  }
  return out;
}

}  // namespace

TEST_CASE("split factorization", "[integer_kernel]") {
  // identity kernel
  const auto id = kernel_from_matrix(Eigen::MatrixXd::Identity(3, 3));
  const SplitKernel sid = split(id);
  REQUIRE((sid.k_d - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(sid.f.cwiseAbs().maxCoeff() == 0.0);

  // 2x2 rotation-like kernel
  Eigen::MatrixXd K(2, 2);
  K << 0.9, 0.1, -0.1, 0.9;
  const SplitKernel s = split(kernel_from_matrix(K));
  REQUIRE(s.k_d(0) == Catch::Approx(0.9));
  REQUIRE(s.k_d(1) == Catch::Approx(0.9));
  REQUIRE(s.f(0, 1) == Catch::Approx(1.0 / 9.0));
  REQUIRE(s.f(1, 0) == Catch::Approx(-1.0 / 9.0));
  REQUIRE(s.f(0, 0) == 0.0);

  // (I + F) K_d reconstructs K exactly, including on a learned kernel
  const auto learned = learned_kernel();
  const SplitKernel sl = split(learned);
  const Eigen::MatrixXd recon =
      (Eigen::MatrixXd::Identity(8, 8) + sl.f) * sl.k_d.asDiagonal();
  REQUIRE((recon - learned.k_matrix).cwiseAbs().maxCoeff() < 1e-12);

  // a zero diagonal entry (90-degree rotation) is unsuitable
  Eigen::MatrixXd rot(2, 2);
  rot << 0, -1, 1, 0;
  REQUIRE_THROWS_AS(split(kernel_from_matrix(rot)), std::runtime_error);
}

TEST_CASE("quantization arithmetic", "[integer_kernel]") {
  SplitKernel s;
  s.k_d = Eigen::Vector2d(0.999, 1.0);
  s.f = Eigen::MatrixXd::Zero(2, 2);
  s.f(0, 1) = 0.1;   // rounds to 0 at p_f = 4, dropped
  s.f(1, 0) = -0.3;  // rounds to -1
  const IntegerTransitionKernel ik = quantize(s, BaseGraphKind::PathGraph);
  REQUIRE(ik.k_d_q[0] == 127);  // round(127.872) = 128, clipped
  REQUIRE(ik.k_d_q[1] == 128);  // exact unit entry kept as a wire
  REQUIRE(ik.f_q.size() == 1);
  REQUIRE(ik.f_q[0].row == 1);
  REQUIRE(ik.f_q[0].col == 0);
  REQUIRE(ik.f_q[0].value == -1);

  REQUIRE_THROWS_AS(quantize(s, BaseGraphKind::PathGraph, 100, 4),
                    std::invalid_argument);
}

TEST_CASE("coarser F precision never adds nonzeros", "[integer_kernel]") {
  const SplitKernel s = split(learned_kernel());
  int prev = INT32_MAX;
  for (int pf : {8, 4, 2}) {
    const auto ik = quantize(s, BaseGraphKind::PathWithUnitSelfLoop, 128, pf, 8, 4);
    REQUIRE(int(ik.f_q.size()) <= prev);
    prev = int(ik.f_q.size());
  }
}

TEST_CASE("rounding shift semantics", "[integer_kernel]") {
  REQUIRE(detail::rshift_round(5, 1) == 3);
  REQUIRE(detail::rshift_round(-5, 1) == -3);
  REQUIRE(detail::rshift_round(6, 2) == 2);
  REQUIRE(detail::rshift_round(-6, 2) == -2);
  REQUIRE(detail::rshift_round(5, 2) == 1);
  REQUIRE(detail::rshift_round(0, 5) == 0);
  REQUIRE(detail::rshift_round(7, 0) == 7);
}

TEST_CASE("quantized identity acts as identity", "[integer_kernel]") {
  const auto id = kernel_from_matrix(Eigen::MatrixXd::Identity(8, 8));
  const IntegerTransitionKernel ik = quantize(split(id), BaseGraphKind::PathGraph);
  std::vector<std::int32_t> y{100, -37, 0, 512, -9999, 3, 77, -1};
  REQUIRE(forward(y, ik) == y);
  REQUIRE(inverse(y, ik) == y);
  const auto q = quality(ik, id);
  REQUIRE(q.orthogonality == 0.0);
  REQUIRE(q.closeness == 0.0);
  REQUIRE(q.norm_dev == 0.0);
  const OpCount ops = count_ops(ik);
  REQUIRE(ops.multiplications == 0);
  REQUIRE(ops.additions == 0);
}

TEST_CASE("forward and inverse match the wide-integer oracle", "[integer_kernel]") {
  const auto learned = learned_kernel();
  const IntegerTransitionKernel ik =
      quantize(split(learned), BaseGraphKind::PathWithUnitSelfLoop);
  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::int32_t> y(8);
    for (auto& v : y) v = std::int32_t(rng() % 65536) - 32768;
    REQUIRE(forward(y, ik) == forward_oracle(y, ik));
    REQUIRE(inverse(y, ik) == inverse_oracle(y, ik));
  }
  std::vector<std::int32_t> zero(8, 0);
  REQUIRE(forward(zero, ik) == zero);
  REQUIRE(inverse(zero, ik) == zero);
  REQUIRE_THROWS_AS(forward(std::vector<std::int32_t>(5, 0), ik),
                    std::invalid_argument);
}

TEST_CASE("fine-tune restores a perturbed identity and never regresses",
          "[integer_kernel]") {
  const auto id = kernel_from_matrix(Eigen::MatrixXd::Identity(4, 4));
  IntegerTransitionKernel ik = quantize(split(id), BaseGraphKind::PathGraph);
  ik.k_d_q[2] = 127;  // nudge one wire entry off by one
  const auto tuned = fine_tune(ik, id);
  REQUIRE(tuned.k_d_q[2] == 128);

  const auto learned = learned_kernel();
  IntegerTransitionKernel lk =
      quantize(split(learned), BaseGraphKind::PathWithUnitSelfLoop);
  const double before = combined_quality(quality(lk, learned));
  const auto lt = fine_tune(lk, learned);
  const double after = combined_quality(quality(lt, learned));
  REQUIRE(after <= before);
  // a second pass is a fixed point
  const auto lt2 = fine_tune(lt, learned);
  REQUIRE(combined_quality(quality(lt2, learned)) == after);
}

TEST_CASE("base selection threshold", "[integer_kernel]") {
  REQUIRE(select_base(0.0) == BaseGraphKind::PathGraph);
  REQUIRE(select_base(0.49) == BaseGraphKind::PathGraph);
  REQUIRE(select_base(0.5) == BaseGraphKind::PathWithUnitSelfLoop);
  REQUIRE(select_base(2.0) == BaseGraphKind::PathWithUnitSelfLoop);
  REQUIRE_THROWS_AS(select_base(-0.1), std::invalid_argument);
}

TEST_CASE("operation counting", "[integer_kernel]") {
  // dense 8x8 integer kernel without unit entries: 64 mults, 56 adds
  IntegerKernel dense;
  dense.matrix = Eigen::MatrixXi::Constant(8, 8, 3);
  dense.shift = 7;
  const OpCount dc = count_ops(dense);
  REQUIRE(dc.multiplications == 64);
  REQUIRE(dc.additions == 56);

  // sparse kernel: +/-1 F entries cost adds only
  IntegerTransitionKernel ik;
  ik.n = 4;
  ik.k_d_q = {128, 120, -128, 90};  // two wires, two scaled rows
  ik.f_q = {{0, 1, 1}, {1, 2, -3}, {3, 0, -1}};
  const OpCount c = count_ops(ik);
  REQUIRE(c.multiplications == 3);  // 2 diagonal + 1 non-unit F entry
  REQUIRE(c.additions == 3);
  REQUIRE(nnz(ik) == 3);
}

TEST_CASE("kernel record round-trips bit-exactly", "[integer_kernel]") {
  const auto learned = learned_kernel();
  const IntegerTransitionKernel ik = fine_tune(
      quantize(split(learned), BaseGraphKind::PathWithUnitSelfLoop), learned);
  const IntegerTransitionKernel back = kernel_from_json(to_json(ik));
  REQUIRE(back.n == ik.n);
  REQUIRE(back.base == ik.base);
  REQUIRE(back.shift_d == ik.shift_d);
  REQUIRE(back.shift_f == ik.shift_f);
  REQUIRE(back.k_d_q == ik.k_d_q);
  REQUIRE(back.f_q.size() == ik.f_q.size());
  for (std::size_t i = 0; i < ik.f_q.size(); ++i) {
    REQUIRE(back.f_q[i].row == ik.f_q[i].row);
    REQUIRE(back.f_q[i].col == ik.f_q[i].col);
    REQUIRE(back.f_q[i].value == ik.f_q[i].value);
  }
  REQUIRE(back.split_failed == ik.split_failed);
}
