#include "ppsync/ppf.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ppsync/error.hpp"

namespace ppsync {

void PerformanceFunction::validate() const {
  if (!(rho_inf > 0.0 && rho0 > rho_inf && ell > 0.0 && std::isfinite(rho0) && std::isfinite(ell)))
    throw Error(ErrorCode::InvalidArgument,
                "performance function needs rho0 > rho_inf > 0 and ell > 0");
}

double rho(const PerformanceFunction& pf, double t) {
  if (t < 0.0) throw Error(ErrorCode::NegativeTime, "rho evaluated at t < 0");
  return (pf.rho0 - pf.rho_inf) * std::exp(-pf.ell * t) + pf.rho_inf;
}

double rho_dot(const PerformanceFunction& pf, double t) {
  if (t < 0.0) throw Error(ErrorCode::NegativeTime, "rho_dot evaluated at t < 0");
  return -pf.ell * (pf.rho0 - pf.rho_inf) * std::exp(-pf.ell * t);
}

std::string_view to_string(TransformVariant v) {
  switch (v) {
    case TransformVariant::InitialSign: return "initial_sign";
    case TransformVariant::SignSwitched: return "sign_switched";
    case TransformVariant::ErfSmoothed: return "erf_smoothed";
  }
  return "unknown";
}

TransformVariant parse_variant(std::string_view name) {
  if (name == "initial_sign") return TransformVariant::InitialSign;
  if (name == "sign_switched") return TransformVariant::SignSwitched;
  if (name == "erf_smoothed") return TransformVariant::ErfSmoothed;
  throw Error(ErrorCode::InvalidArgument, "unknown transform variant '" + std::string(name) + "'");
}

void TransformSpec::validate() const {
  if (!(delta_lo > 0.0 && delta_lo <= 1.0 && delta_hi > delta_lo && std::isfinite(delta_hi)))
    throw Error(ErrorCode::InvalidArgument, "transform needs delta_hi > delta_lo with 0 < delta_lo <= 1");
  if (!(xi > 0.0 && std::isfinite(xi)))
    throw Error(ErrorCode::InvalidArgument, "transform needs xi > 0");
}

double smooth_s(const TransformSpec& spec, double eps) {
  const double span = spec.delta_hi + spec.delta_lo;
  if (eps >= 0.0) return spec.delta_hi - span / (1.0 + std::exp(2.0 * eps));
  return -spec.delta_lo + span / (1.0 + std::exp(-2.0 * eps));
}

double erf(double x) { return std::erf(x); }

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct Branch {
  double ratio;   // e / rho mapped onto the branch where dl < ratio < dh is admissible
  double orient;  // +1 or -1: undoes the mapping
  bool clamped;
};

// Maps e/rho onto a ratio s with admissible interval (-dl, dh) and clamps it.
Branch select_branch(const TransformSpec& spec, double e, double rho_t, double initial_sign) {
  const double ratio = e / rho_t;
  double orient = 1.0;
  double s = ratio;
  if (spec.variant == TransformVariant::InitialSign) {
    orient = initial_sign < 0.0 ? -1.0 : 1.0;
    s = orient * ratio;
  } else {
    s = std::abs(ratio);
  }
  const double hi = spec.delta_hi * (1.0 - kClampMargin);
  const double lo = -spec.delta_lo * (1.0 - kClampMargin);
  bool clamped = false;
  if (!(s < hi)) {
    s = hi;
    clamped = true;
  } else if (!(s > lo)) {
    s = lo;
    clamped = true;
  }
  return {s, orient, clamped};
}

double log_barrier(const TransformSpec& spec, double s) {
  return std::log((spec.delta_lo + s) / (spec.delta_hi - s));
}

double r_of(const TransformSpec& spec, double s, double rho_t) {
  return (1.0 / (spec.delta_lo + s) + 1.0 / (spec.delta_hi - s)) / (2.0 * rho_t);
}

double eps_of(const TransformSpec& spec, double e, double rho_t, const Branch& b) {
  switch (spec.variant) {
    case TransformVariant::InitialSign:
      return 0.5 * b.orient * log_barrier(spec, b.ratio);
    case TransformVariant::SignSwitched:
      return 0.5 * sign(e / rho_t) * log_barrier(spec, b.ratio);
    case TransformVariant::ErfSmoothed: {
      const double gain = spec.normalize_erf_gain ? 0.5 : 0.5 / std::sqrt(std::numbers::pi);
      return gain * erf(spec.xi * e / rho_t) * log_barrier(spec, b.ratio);
    }
  }
  return 0.0;
}

void require_admissible(const Branch& b, double e, double rho_t) {
  if (b.clamped)
    throw Error(ErrorCode::BoundViolation,
                "e/rho = " + std::to_string(e / rho_t) + " outside the admissible envelope");
}

}  // namespace

double transform(const TransformSpec& spec, double e, double rho_t, double initial_sign) {
  const Branch b = select_branch(spec, e, rho_t, initial_sign);
  require_admissible(b, e, rho_t);
  return eps_of(spec, e, rho_t, b);
}

double r_factor(const TransformSpec& spec, double e, double rho_t, double initial_sign) {
  const Branch b = select_branch(spec, e, rho_t, initial_sign);
  require_admissible(b, e, rho_t);
  return r_of(spec, b.ratio, rho_t);
}

TransformSample transform_clamped(const TransformSpec& spec, double e, double rho_t,
                                  double initial_sign) {
  const Branch b = select_branch(spec, e, rho_t, initial_sign);
  return {eps_of(spec, e, rho_t, b), r_of(spec, b.ratio, rho_t), b.clamped};
}

}  // namespace ppsync
