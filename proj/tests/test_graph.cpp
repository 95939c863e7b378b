#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ppsync/error.hpp"
#include "ppsync/graph.hpp"

using namespace ppsync;

namespace {

Digraph two_node() {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  return Digraph(a, Eigen::Vector2d(1, 0));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ppsync::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("two-node Laplacian, L + B, q and P") {
  const auto gm = build_matrices(two_node());
  Eigen::Matrix2d l, lb;
  l << 1, -1, -1, 1;
  lb << 2, -1, -1, 1;
  CHECK(gm.laplacian.isApprox(l));
  CHECK(gm.lb.isApprox(lb));
  CHECK(gm.q(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gm.q(1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(gm.p_matrix(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(gm.p_matrix(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(gm.p_matrix(0, 1) == 0.0);
  CHECK(gm.laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("two-node Q is symmetric positive definite") {
  const auto gm = build_matrices(two_node());
  CHECK((gm.q_matrix - gm.q_matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const auto ev = oracle::jacobi_eigenvalues(gm.q_matrix);
  CHECK(ev[0] == doctest::Approx(0.26614596042785855).epsilon(1e-12));
  CHECK(ev[1] == doctest::Approx(2.4005207062388081).epsilon(1e-12));
}

TEST_CASE("strong connectivity") {
  Eigen::MatrixXd ring = Eigen::MatrixXd::Zero(3, 3);
  ring(1, 0) = ring(2, 1) = ring(0, 2) = 1.0;
  CHECK(is_strongly_connected(Digraph(ring, Eigen::Vector3d(1, 0, 0))));

  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(3, 3);
  chain(1, 0) = chain(2, 1) = 1.0;
  CHECK_FALSE(is_strongly_connected(Digraph(chain, Eigen::Vector3d(1, 0, 0))));

  CHECK(is_strongly_connected(example1_digraph()));
  CHECK(example1_digraph().pinning()(2) == 1.0);
}

TEST_CASE("weighted Q") {
  const auto gm = build_matrices(two_node());
  CHECK(weighted_q_matrix(gm, Eigen::Vector2d::Ones()).isApprox(gm.q_matrix, 1e-15));
  const Eigen::MatrixXd w = weighted_q_matrix(gm, Eigen::Vector2d(2, 1));
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(oracle::jacobi_eigenvalues(w)[0] == doctest::Approx(0.19895858752238377).epsilon(1e-12));
  CHECK(code_of([&] { weighted_q_matrix(gm, Eigen::Vector2d(1, 0)); }) == ErrorCode::NonPositiveR);
  CHECK(code_of([&] { weighted_q_matrix(gm, Eigen::Vector3d::Ones()); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("global error") {
  const auto gm = build_matrices(two_node());
  const Eigen::VectorXd e = global_error(gm, Eigen::Vector2d(3, 1), Eigen::VectorXd::Constant(1, 1.0));
  CHECK(e(0) == doctest::Approx(4.0));
  CHECK(e(1) == doctest::Approx(-2.0));
  CHECK(global_error(gm, Eigen::Vector2d(1, 1), Eigen::VectorXd::Constant(1, 1.0)).isZero());
  CHECK(tracking_error_bound(gm, e) >= (Eigen::Vector2d(2, 0)).norm() - 1e-12);

  // MIMO: channel-wise application of the scalar map.
  const auto g5 = build_matrices(example1_digraph());
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  Eigen::VectorXd x(15), x0(3);
  for (auto& v : x) v = nd(gen);
  for (auto& v : x0) v = nd(gen);
  const Eigen::VectorXd big = global_error(g5, x, x0);
  for (int ch = 0; ch < 3; ++ch) {
    Eigen::VectorXd xs(5);
    for (int i = 0; i < 5; ++i) xs(i) = x(3 * i + ch);
    const Eigen::VectorXd es = global_error(g5, xs, Eigen::VectorXd::Constant(1, x0(ch)));
    for (int i = 0; i < 5; ++i) CHECK(big(3 * i + ch) == doctest::Approx(es(i)).epsilon(1e-14));
  }
}

TEST_CASE("validation") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 1) = -1.0;
  CHECK(code_of([&] { Digraph(a, Eigen::Vector2d(1, 0)); }) == ErrorCode::InvalidArgument);
  a(0, 1) = 1.0;
  a(1, 1) = 1.0;
  CHECK(code_of([&] { Digraph(a, Eigen::Vector2d(1, 0)); }) == ErrorCode::InvalidArgument);
  a(1, 1) = 0.0;
  CHECK(code_of([&] { Digraph(a, Eigen::Vector3d(1, 0, 0)); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { build_matrices(Digraph(a, Eigen::Vector2d::Zero())); }) == ErrorCode::NoPinning);
}

TEST_CASE("property: random strongly connected digraphs give positive q") {
  std::mt19937_64 gen(20170401);
  std::uniform_int_distribution<int> size(2, 8);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = size(gen);
    const auto rg = oracle::random_strongly_connected(gen, n);
    REQUIRE(oracle::strongly_connected(rg.adjacency));
    const Digraph g(rg.adjacency, rg.pinning);
    CHECK(is_strongly_connected(g));
    const auto gm = build_matrices(g);
    CHECK((gm.q.array() > 0.0).all());
    CHECK((gm.lb * gm.q - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(gm.q_matrix.isApprox(gm.q_matrix.transpose()));
    CHECK(weighted_q_matrix(gm, Eigen::VectorXd::Ones(n)).isApprox(gm.q_matrix));

    const auto evq = oracle::jacobi_eigenvalues(gm.q_matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gm.q_matrix);
    CHECK(std::abs(eig.eigenvalues()(0) - evq.front()) < 1e-10);

    // Q is definite whenever the communication graph is undirected.
    const Digraph sym(rg.adjacency + rg.adjacency.transpose(), rg.pinning);
    CHECK(oracle::jacobi_eigenvalues(build_matrices(sym).q_matrix).front() > 1e-10);
  }
}

TEST_CASE("Q can be indefinite on a directed cycle") {
  // 1 <- 3, 2 <- 1 with weight 10, 3 <- 2, leader pinned to node 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 2) = 1.0;
  a(1, 0) = 10.0;
  a(2, 1) = 1.0;
  const auto gm = build_matrices(Digraph(a, Eigen::Vector3d(1, 0, 0)));
  CHECK(gm.q.isApprox(Eigen::Vector3d(2.1, 2.2, 3.2)));
  CHECK(oracle::jacobi_eigenvalues(gm.q_matrix).front() == doctest::Approx(-0.56450531025282702).epsilon(1e-12));
}
