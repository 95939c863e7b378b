#pragma once

#include <string_view>

namespace ppsync {

/// Exponential performance envelope rho(t) = (rho0 - rho_inf) exp(-ell t) + rho_inf.
struct PerformanceFunction {
  double rho0 = 7.0;
  double rho_inf = 0.05;
  double ell = 7.0;

  /// Requires rho0 > rho_inf > 0 and ell > 0.
  void validate() const;
};

double rho(const PerformanceFunction& pf, double t);
double rho_dot(const PerformanceFunction& pf, double t);

enum class TransformVariant {
  InitialSign,   // delta roles fixed by the sign of e(0)
  SignSwitched,  // delta roles follow sign(e(t))
  ErfSmoothed,   // sign(.) replaced by erf(xi e / rho)
};

std::string_view to_string(TransformVariant v);
TransformVariant parse_variant(std::string_view name);

struct TransformSpec {
  double delta_hi = 7.0;  // wide side of the envelope
  double delta_lo = 1.0;  // narrow side
  TransformVariant variant = TransformVariant::ErfSmoothed;
  double xi = 20.0;                 // erf sharpness, ErfSmoothed only
  bool normalize_erf_gain = false;  // scale the erf form by sqrt(pi)

  /// Requires delta_hi > delta_lo, 0 < delta_lo <= 1 and xi > 0.
  void validate() const;
};

/// Relative distance from the barrier at which the ratio |e|/rho is clamped.
inline constexpr double kClampMargin = 1e-9;

/// S(eps) = (dh e^eps - dl e^-eps) / (e^eps + e^-eps), evaluated without overflow.
double smooth_s(const TransformSpec& spec, double eps);

/// Transformed error eps for error e under envelope value rho_t.
///
/// `initial_sign` selects the frozen branch for InitialSign and is ignored by
/// the switched variants. Throws BoundViolation when e/rho_t lies at or past
/// the clamp threshold of the active branch.
double transform(const TransformSpec& spec, double e, double rho_t, double initial_sign = 1.0);

/// r = 1/(2 rho) [1/(dl + |e|/rho) + 1/(dh - |e|/rho)]; InitialSign uses the
/// signed ratio of its frozen branch. Throws BoundViolation like transform().
double r_factor(const TransformSpec& spec, double e, double rho_t, double initial_sign = 1.0);

double erf(double x);

struct TransformSample {
  double eps = 0.0;
  double r = 0.0;
  bool clamped = false;
};

/// transform() and r_factor() in one pass, clamping the ratio onto the
/// admissible interval instead of throwing.
TransformSample transform_clamped(const TransformSpec& spec, double e, double rho_t,
                                  double initial_sign = 1.0);

}  // namespace ppsync
