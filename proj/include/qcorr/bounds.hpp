#pragma once

#include <cmath>
#include <stdexcept>

#include "qcorr/config.hpp"

namespace qcorr {

enum class Sign { minus, plus };

/// Reference yields/errors this close to 0 or 1 are rejected rather than
/// clamped: the tangent slope is singular there and silent clamping would
/// hide a modeling mistake upstream.
inline constexpr double kReferenceEps = 1e-12;

namespace detail {
template <class Real>
void check_yz(Real y, Real z) {
  if (!(y >= Real(0) && y <= Real(1))) throw std::domain_error("y must lie in [0,1]");
  if (!(z > Real(0) && z <= Real(1))) throw std::domain_error("z must lie in (0,1]");
}
}  // namespace detail

/// Smooth envelope g+-(y,z) = y + (1-z)(1-2y) +- 2 sqrt(z(1-z)y(1-y)).
template <class Real>
Real cs_envelope(Real y, Real z, Sign sign) {
  detail::check_yz(y, z);
  const Real root = Real(2) * std::sqrt(z * (Real(1) - z) * y * (Real(1) - y));
  const Real base = y + (Real(1) - z) * (Real(1) - Real(2) * y);
  return sign == Sign::plus ? base + root : base - root;
}

/// Piecewise Cauchy-Schwarz bound: G- vanishes for y <= 1-z, G+ saturates
/// at 1 for y >= z. Bounds how far a second conditional probability can sit
/// from y when the underlying states have squared overlap at least z.
template <class Real>
Real cs_bound(Real y, Real z, Sign sign) {
  detail::check_yz(y, z);
  if (sign == Sign::minus) return y > Real(1) - z ? cs_envelope(y, z, Sign::minus) : Real(0);
  return y < z ? cs_envelope(y, z, Sign::plus) : Real(1);
}

/// dG+-/dy. The two branches glue C^1 (both give 0 at the breakpoint), so
/// the smooth-branch expression is used on the closed branch.
template <class Real>
Real cs_bound_derivative(Real y, Real z, Sign sign) {
  if (!(y > Real(0) && y < Real(1)))
    throw std::domain_error("derivative requires y strictly inside (0,1)");
  if (!(z > Real(0) && z <= Real(1))) throw std::domain_error("z must lie in (0,1]");
  const Real s = sign == Sign::plus ? Real(1) : Real(-1);
  if (sign == Sign::minus && y < Real(1) - z) return Real(0);
  if (sign == Sign::plus && y > z) return Real(0);
  return Real(-1) + Real(2) * z +
         s * (Real(1) - Real(2) * y) * std::sqrt(z * (Real(1) - z) / (y * (Real(1) - y)));
}

/// Lower bound on the squared overlap between the conditional states of two
/// intensity settings at fixed photon number.
struct OverlapBound {
  double value = 1.0;  // in (0,1]; exactly 1 iff delta_max = 0
};

/// One tangent-line relaxation c + m*y of a CS bound.
struct LinearizedConstraint {
  double intercept = 0.0;
  double slope = 0.0;
};

struct TangentPair {
  LinearizedConstraint lower;  // intercept + slope*y_a <= y_b
  LinearizedConstraint upper;  // y_b <= intercept + slope*y_a
};

/// Model-independent overlap bound for settings a, b at photon number n and
/// correlation range xi. Products are evaluated in log space. Requires
/// a != b and c(1+delta_max) < 1 for every intensity involved; n >= 1 with a
/// zero intensity is rejected (the conditioning event has zero probability).
OverlapBound overlap_model_independent(double a, double b, int n, int xi,
                                       const ProtocolConfig& cfg);

/// Deterministic-correlations variant: same prefactor, tighter bracket.
OverlapBound overlap_deterministic(double a, double b, int n, int xi,
                                   const ProtocolConfig& cfg);

/// Half-width sqrt(1 - overlap) of the trace-distance band |Y_a - Y_b|.
double trace_distance_halfwidth(OverlapBound overlap);

/// Tangent lines to G-+ at the given reference, valid bounds by convexity.
/// The reference must be in [kReferenceEps, 1-kReferenceEps].
TangentPair linearize(double reference, OverlapBound overlap);

}  // namespace qcorr
