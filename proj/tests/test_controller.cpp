#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "ppsync/controller.hpp"
#include "ppsync/error.hpp"

using namespace ppsync;

namespace {

using V = Eigen::VectorXd;

V vec(std::initializer_list<double> v) {
  V out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

KnownModel scalar_model() { return KnownModel(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1)); }

Digraph two_node() {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  return Digraph(a, Eigen::Vector2d(1, 0));
}

}  // namespace

TEST_CASE("control signal") {
  const auto km = scalar_model();
  CHECK(control_signal(km, vec({0}), vec({0}), vec({1.5}), vec({0}), vec({0}), 100.0)(0) == 0.0);
  CHECK(control_signal(km, vec({0.1}), vec({0.3}), vec({1.5}), vec({0}), vec({2}), 100.0)(0) ==
        doctest::Approx(-12.0).epsilon(1e-15));
  // theta_hat multiplies |x| for scalar agents.
  CHECK(control_signal(km, vec({0}), vec({0}), vec({-3}), vec({2}), vec({0}), 1.0)(0) == doctest::Approx(-6.0));

  const KnownModel mimo(Eigen::Matrix3d::Identity() * 2.0, Eigen::Matrix3d::Identity());
  const V eps = vec({0.1, -0.2, 0.3}), xt = vec({1, 2, 3}), x = vec({0.5, -4, 1});
  const V th = vec({0.1, 0.2, 0.3}), sg = vec({1, 1, 1});
  const V u1 = control_signal(mimo, eps, xt, x, th, sg, 10.0);
  const V u2 = control_signal(mimo, eps, xt, x, th, sg, 20.0);
  CHECK(u1.size() == 3);
  CHECK((u2 - u1).isApprox(-10.0 * eps));
  CHECK(u1(1) == doctest::Approx(-10.0 * -0.2 - 2.0 * 2 - 0.2 * 4 - 1));

  const KnownModel scaled(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity() * 4.0);
  CHECK(control_signal(scaled, vec({1, 0}), vec({0, 0}), vec({0, 0}), vec({0, 0}), vec({0, 0}), 8.0)(0) ==
        doctest::Approx(-2.0));
}

TEST_CASE("singular input matrix") {
  try {
    KnownModel(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Ones());
    FAIL("expected SingularInputMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularInputMatrix);
  }
}

TEST_CASE("adaptive derivatives") {
  double td = 0, sd = 0;
  const double x = 2, eps = 0.1, r = 1, th = 1, sg = 0.5;
  adaptive_derivatives({&eps, 1}, {&x, 1}, 0.5, {&r, 1}, 2.0, {&th, 1}, {&sg, 1}, 150.0, 0.8, {&td, 1}, {&sd, 1});
  CHECK(td == doctest::Approx(-90.0).epsilon(1e-14));
  CHECK(sd == doctest::Approx(15.0 - 60.0).epsilon(1e-14));

  const double zero = 0.0;
  adaptive_derivatives({&zero, 1}, {&x, 1}, 0.5, {&r, 1}, 2.0, {&th, 1}, {&sg, 1}, 150.0, 0.8, {&td, 1}, {&sd, 1});
  CHECK(td == doctest::Approx(-120.0));
  CHECK(sd == doctest::Approx(-60.0));

  double td2 = 0, sd2 = 0;
  adaptive_derivatives({&eps, 1}, {&x, 1}, 0.5, {&r, 1}, 2.0, {&th, 1}, {&sg, 1}, 300.0, 0.8, {&td2, 1}, {&sd2, 1});
  adaptive_derivatives({&eps, 1}, {&x, 1}, 0.5, {&r, 1}, 2.0, {&th, 1}, {&sg, 1}, 150.0, 0.8, {&td, 1}, {&sd, 1});
  CHECK(td2 == doctest::Approx(2 * td));
  CHECK(sd2 == doctest::Approx(2 * sd));
}

TEST_CASE("MIMO adaptive derivatives use the infinity norm and per-channel r") {
  const double eps[3] = {0.1, -0.2, 0.0}, x[3] = {1.0, -3.0, 2.0}, r[3] = {1.0, 2.0, 0.5};
  const double th[3] = {0, 0, 1}, sg[3] = {0, 0, 0};
  double td[3], sd[3];
  adaptive_derivatives(eps, x, 0.5, r, 2.0, th, sg, 10.0, 0.1, td, sd);
  CHECK(td[0] == doctest::Approx(10 * 3.0 * 0.1 * 0.5 * 1.0 * 2.0));
  CHECK(td[1] == doctest::Approx(10 * 3.0 * -0.2 * 0.5 * 2.0 * 2.0));
  CHECK(td[2] == doctest::Approx(-0.1 * 10 * 1.0));
  CHECK(sd[1] == doctest::Approx(10 * -0.2 * 0.5 * 2.0 * 2.0));
  CHECK(adaptation_regressor(std::span<const double>(x, 3)) == 3.0);
  CHECK(adaptation_regressor(std::span<const double>(x + 1, 1)) == -3.0);
}

TEST_CASE("gain conditions") {
  const auto gm = build_matrices(two_node());
  ModelBounds bounds;
  bounds.x_M = 1.0;
  // lambda_min(Q) = 0.26614596042785855 for this graph; c = 10 gives k = c lambda / 2.
  ControllerGains tuned{10.0, 1.3307298021392928, {1.0, 1.0}};
  const auto rep = check_gain_conditions(gm, tuned, bounds, two_node().adjacency());
  CHECK(rep.lambda_min_q == doctest::Approx(0.26614596042785855).epsilon(1e-12));
  CHECK(rep.lambda_max_p == doctest::Approx(0.5));
  CHECK(rep.lambda_max_a == doctest::Approx(1.0));
  CHECK(rep.k_condition);
  CHECK(rep.c_condition);
  CHECK(rep == check_gain_conditions(gm, tuned, bounds, two_node().adjacency()));

  bounds.x_M = 1e6;
  CHECK_FALSE(check_gain_conditions(gm, tuned, bounds, two_node().adjacency()).c_condition);

  const auto g5 = build_matrices(example1_digraph());
  ModelBounds b2;
  const auto defaults = check_gain_conditions(g5, ControllerGains{100.0, 0.8, std::vector<double>(5, 150.0)}, b2,
                                           example1_digraph().adjacency());
  CHECK_FALSE(defaults.k_condition);
  CHECK(defaults.recommended_k == doctest::Approx(50.0 * defaults.lambda_min_q));
}

TEST_CASE("Lyapunov value") {
  const auto gm = build_matrices(two_node());
  const ControllerGains gains{1.0, 1.0, {2.0, 4.0}};
  AdaptiveState ad(2, 1);
  const std::vector<double> zeros(2, 0.0);
  CHECK(lyapunov_value(zeros, ad, zeros, zeros, gm, gains) == 0.0);
  const std::vector<double> unit{1.0, 0.0};
  CHECK(lyapunov_value(unit, ad, zeros, zeros, gm, gains) == doctest::Approx(0.25));

  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> eps(2), th(2), sg(2);
  for (int i = 0; i < 2; ++i) {
    eps[i] = nd(gen);
    th[i] = nd(gen);
    sg[i] = nd(gen);
    ad.theta_hat[i] = nd(gen);
    ad.sigma_hat[i] = nd(gen);
  }
  const Eigen::Vector2d e(eps[0], eps[1]);
  double expected = 0.5 * e.dot(gm.p_matrix * e);
  for (int i = 0; i < 2; ++i) {
    const double a = th[i] - ad.theta_hat[i], b = sg[i] - ad.sigma_hat[i];
    expected += 0.5 * (a * a + b * b) / gains.gamma[i];
  }
  CHECK(lyapunov_value(eps, ad, th, sg, gm, gains) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("controller header does not depend on the plant model") {
  std::ifstream in(std::string(PPSYNC_SOURCE_DIR) + "/include/ppsync/controller.hpp");
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("dynamics.hpp") == std::string::npos);
  CHECK(ss.str().find("AgentModel") == std::string::npos);
}
