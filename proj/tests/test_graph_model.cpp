#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <Eigen/Dense>

#include "dttplus/base_transforms.hpp"
#include "dttplus/graph_model.hpp"

using namespace dttplus;

TEST_CASE("path Laplacian small cases", "[graph_model]") {
  const auto L3 = path_laplacian(3);
  Eigen::Matrix3d expect3;
  expect3 << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  REQUIRE((L3.matrix - expect3).cwiseAbs().maxCoeff() == 0.0);

  const auto L2 = path_laplacian(2);
  Eigen::Matrix2d expect2;
  expect2 << 1, -1, -1, 1;
  REQUIRE((L2.matrix - expect2).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS_AS(path_laplacian(1), std::invalid_argument);
  REQUIRE_NOTHROW(validate(L3));
}

TEST_CASE("path Laplacian spectrum matches closed form", "[graph_model]") {
  const int n = 8;
  const auto eig = gft(path_laplacian(n));
  for (int k = 0; k < n; ++k) {
    const double expect = 2.0 - 2.0 * std::cos(std::numbers::pi * k / n);
    REQUIRE(eig.eigenvalues(k) == Catch::Approx(expect).margin(1e-10));
  }
}

TEST_CASE("self-loop path Laplacian", "[graph_model]") {
  const auto L2 = path_with_self_loop_laplacian(2);
  Eigen::Matrix2d expect2;
  expect2 << 2, -1, -1, 1;
  REQUIRE((L2.matrix - expect2).cwiseAbs().maxCoeff() == 0.0);

  const auto L3 = path_with_self_loop_laplacian(3);
  Eigen::Matrix3d expect3;
  expect3 << 2, -1, 0, -1, 2, -1, 0, -1, 1;
  REQUIRE((L3.matrix - expect3).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_NOTHROW(validate(L3));
}

TEST_CASE("rank-one update", "[graph_model]") {
  const auto base = path_laplacian(3);
  const auto same = rank_one_update(base, 0.0, 1.0, 1);
  REQUIRE((same.matrix - base.matrix).cwiseAbs().maxCoeff() == 0.0);

  const auto dst_graph = rank_one_update(base, 1.0, 1.0, 1);
  REQUIRE((dst_graph.matrix - path_with_self_loop_laplacian(3).matrix)
              .cwiseAbs()
              .maxCoeff() == 0.0);

  const auto L4 = path_laplacian(4);
  const auto upd = rank_one_update(L4, 0.7, 1.3, 2);
  Eigen::MatrixXd expect = 1.3 * L4.matrix;
  expect(1, 1) += 0.7;
  REQUIRE((upd.matrix - expect).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE_NOTHROW(validate(upd));

  REQUIRE_THROWS_AS(rank_one_update(base, -0.5, 1.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(rank_one_update(base, 0.5, 0.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(rank_one_update(base, 0.5, 1.0, 4), std::invalid_argument);
}

TEST_CASE("rank-one update stays PSD on random draws", "[graph_model]") {
  std::mt19937_64 rng(11);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * double(rng() >> 11) / 9007199254740992.0;
  };
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + int(rng() % 10);
    const auto base = (rng() & 1) ? path_laplacian(n) : path_with_self_loop_laplacian(n);
    const auto upd =
        rank_one_update(base, uni(0.0, 5.0), uni(0.1, 4.0), 1 + int(rng() % n));
    REQUIRE_NOTHROW(validate(upd));
  }
}

TEST_CASE("cartesian product spectrum is the pairwise sum", "[graph_model]") {
  const auto L = cartesian_product(path_laplacian(2), path_laplacian(2));
  REQUIRE(L.n == 4);
  const auto eig = gft(L);
  Eigen::Vector4d expect(0.0, 2.0, 2.0, 4.0);
  REQUIRE((eig.eigenvalues - expect).cwiseAbs().maxCoeff() < 1e-9);

  // identity of the Kronecker sum
  GeneralizedLaplacian one{1, Eigen::MatrixXd::Zero(1, 1)};
  const auto same = cartesian_product(path_laplacian(3), one);
  REQUIRE((same.matrix - path_laplacian(3).matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cartesian product eigenvectors are Kronecker products", "[graph_model]") {
  const auto Lr = path_laplacian(2);
  const auto Lc = path_with_self_loop_laplacian(2);
  const auto er = gft(Lr);
  const auto ec = gft(Lc);
  const auto eig = gft(cartesian_product(Lr, Lc));
  // eigenvalues sorted pairwise sums
  std::vector<double> sums;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sums.push_back(er.eigenvalues(i) + ec.eigenvalues(j));
  std::sort(sums.begin(), sums.end());
  for (int k = 0; k < 4; ++k)
    REQUIRE(eig.eigenvalues(k) == Catch::Approx(sums[k]).margin(1e-9));
  // each product eigenvector is an eigenvector of the product Laplacian
  const auto Lg = cartesian_product(Lr, Lc);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd v(4);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          v(a * 2 + b) = er.basis(a, i) * ec.basis(b, j);
      const double lam = er.eigenvalues(i) + ec.eigenvalues(j);
      REQUIRE((Lg.matrix * v - lam * v).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("cartesian spectrum equals Minkowski sum up to n=8", "[graph_model]") {
  for (int nr : {3, 8})
    for (int nc : {2, 5}) {
      const auto Lr = path_laplacian(nr);
      const auto Lc = path_with_self_loop_laplacian(nc);
      const auto eig = gft(cartesian_product(Lr, Lc));
      std::vector<double> sums;
      const auto er = gft(Lr), ec = gft(Lc);
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j)
          sums.push_back(er.eigenvalues(i) + ec.eigenvalues(j));
      std::sort(sums.begin(), sums.end());
      for (int k = 0; k < nr * nc; ++k)
        REQUIRE(eig.eigenvalues(k) == Catch::Approx(sums[k]).margin(1e-9));
    }
}
