#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ppsync/error.hpp"
#include "ppsync/ppf.hpp"

using namespace ppsync;

namespace {

const PerformanceFunction kPf{7.0, 0.05, 7.0};

TransformSpec spec(TransformVariant v) { return TransformSpec{7.0, 1.0, v, 20.0, false}; }

bool throws_code(auto&& fn, ErrorCode code) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("rho") {
  CHECK(rho(kPf, 0.0) == 7.0);
  CHECK(rho(kPf, 1.0) == doctest::Approx(0.056337579660603887648).epsilon(1e-15));
  CHECK(std::abs(rho(kPf, 10.0) - 0.05) < 1e-6);
  for (double t = 0.0; t < 5.0; t += 0.5) CHECK(rho(kPf, t + 0.5) < rho(kPf, t));
  CHECK(throws_code([] { rho(kPf, -1e-3); }, ErrorCode::NegativeTime));
  CHECK(throws_code([] { PerformanceFunction{0.01, 0.05, 1.0}.validate(); }, ErrorCode::InvalidArgument));
}

TEST_CASE("rho_dot") {
  CHECK(rho_dot(kPf, 0.0) == doctest::Approx(-7.0 * 6.95));
  for (double t = 0.0; t < 10.0; t += 0.7) CHECK(rho_dot(kPf, t) < 0.0);
  const double h = 1e-6;
  const double fd = (rho(kPf, 0.3 + h) - rho(kPf, 0.3 - h)) / (2 * h);
  CHECK(std::abs(fd - rho_dot(kPf, 0.3)) <= 1e-6 * std::abs(rho_dot(kPf, 0.3)));
}

TEST_CASE("smooth function S") {
  const auto s = spec(TransformVariant::ErfSmoothed);
  CHECK(smooth_s(s, 0.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::abs(smooth_s(s, 40.0) - 7.0) < 1e-12);
  CHECK(std::abs(smooth_s(s, -40.0) + 1.0) < 1e-12);
  CHECK(smooth_s(s, 1.0) == doctest::Approx(6.0463766238230595525).epsilon(1e-15));
  CHECK(std::isfinite(smooth_s(s, 1e6)));
  CHECK(std::isfinite(smooth_s(s, -1e6)));
}

TEST_CASE("transform values") {
  CHECK(transform(spec(TransformVariant::ErfSmoothed), 0.0, 1.0) == 0.0);
  CHECK(transform(spec(TransformVariant::SignSwitched), 0.5, 1.0) ==
        doctest::Approx(-0.73316853439671352233).epsilon(1e-14));
  for (double e : {0.1, 0.5, 2.0, 3.0, 5.5, 6.9}) {
    const auto sw = spec(TransformVariant::SignSwitched);
    CHECK(transform(sw, -e, 1.0) == -transform(sw, e, 1.0));
    const auto er = spec(TransformVariant::ErfSmoothed);
    CHECK(transform(er, -e, 1.0) == doctest::Approx(-transform(er, e, 1.0)).epsilon(1e-15));
  }
}

TEST_CASE("erf gain normalisation") {
  auto s = spec(TransformVariant::ErfSmoothed);
  const double plain = transform(s, 2.0, 1.0);
  s.normalize_erf_gain = true;
  CHECK(transform(s, 2.0, 1.0) == doctest::Approx(plain * std::sqrt(M_PI)).epsilon(1e-14));
}

TEST_CASE("initial-sign branch") {
  const auto s = spec(TransformVariant::InitialSign);
  // Positive branch admits (-1, 7) in units of rho; negative branch (-7, 1).
  CHECK(transform(s, -0.5, 1.0, 1.0) == doctest::Approx(0.5 * std::log(0.5 / 7.5)));
  CHECK(transform(s, -5.0, 1.0, -1.0) == doctest::Approx(-0.5 * std::log(6.0 / 2.0)));
  CHECK(throws_code([&] { transform(s, -1.5, 1.0, 1.0); }, ErrorCode::BoundViolation));
  CHECK(throws_code([&] { transform(s, 1.5, 1.0, -1.0); }, ErrorCode::BoundViolation));
}

TEST_CASE("bound violation and clamping") {
  const auto s = spec(TransformVariant::SignSwitched);
  CHECK(throws_code([&] { transform(s, 7.0, 1.0); }, ErrorCode::BoundViolation));
  CHECK(throws_code([&] { r_factor(s, -8.0, 1.0); }, ErrorCode::BoundViolation));
  const auto c = transform_clamped(s, 9.0, 1.0);
  CHECK(c.clamped);
  CHECK(std::isfinite(c.eps));
  CHECK(std::isfinite(c.r));
  const auto ok = transform_clamped(s, 2.0, 1.0);
  CHECK_FALSE(ok.clamped);
  CHECK(ok.eps == transform(s, 2.0, 1.0));
  CHECK(ok.r == r_factor(s, 2.0, 1.0));
}

TEST_CASE("r factor") {
  const auto s = spec(TransformVariant::SignSwitched);
  CHECK(r_factor(s, 0.0, 2.0) == doctest::Approx((1.0 + 1.0 / 7.0) / 4.0));
  CHECK(r_factor(s, 0.5, 1.0) == doctest::Approx(0.41025641025641025641).epsilon(1e-15));
  CHECK(r_factor(s, -0.5, 1.0) == r_factor(s, 0.5, 1.0));
}

TEST_CASE("r factor matches the derivative of the switched transform") {
  const auto s = spec(TransformVariant::SignSwitched);
  for (double rho_t : {0.3, 1.0, 7.0})
    for (double ratio : {0.05, 0.5, 1.7, 3.0, 4.5, 6.5}) {
      const double e = ratio * rho_t;
      const double h = 1e-6 * rho_t;
      const double fd = (transform(s, e + h, rho_t) - transform(s, e - h, rho_t)) / (2 * h);
      CHECK(std::abs(fd - r_factor(s, e, rho_t)) <= 1e-5 * r_factor(s, e, rho_t));
    }
}

TEST_CASE("fixed-branch inverse of S on the well-conditioned range") {
  const auto s = spec(TransformVariant::InitialSign);
  for (double eps = -9.0; eps <= 9.0; eps += 0.25) {
    const double rho_t = 0.8;
    const double back = transform(s, rho_t * smooth_s(s, eps), rho_t, 1.0);
    CHECK(std::abs(back - eps) <= 1e-9 * std::max(1.0, std::abs(eps)));
  }
}

TEST_CASE("erf") {
  CHECK(ppsync::erf(0.0) == 0.0);
  CHECK(std::abs(ppsync::erf(10.0) - 1.0) < 1e-12);
  CHECK(ppsync::erf(1.0) == doctest::Approx(0.84270079294971486934).epsilon(1e-15));
  for (double x = -6.0; x <= 6.0; x += 0.01)
    CHECK(std::abs(ppsync::erf(x) - double(oracle::erf(x))) <= 1.5e-7);
}

TEST_CASE("variant names") {
  for (auto v : {TransformVariant::InitialSign, TransformVariant::SignSwitched, TransformVariant::ErfSmoothed})
    CHECK(parse_variant(to_string(v)) == v);
  CHECK(throws_code([] { parse_variant("tanh"); }, ErrorCode::InvalidArgument));
  CHECK(throws_code([] { TransformSpec{1.0, 1.0}.validate(); }, ErrorCode::InvalidArgument));
}
