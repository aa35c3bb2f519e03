#include "qcorr/bounds.hpp"

#include <cmath>

namespace qcorr {

namespace {

void check_overlap_inputs(double a, double b, int n, int xi, const ProtocolConfig& cfg) {
  if (a == b) throw std::domain_error("overlap bound requires two distinct settings");
  if (a < 0 || b < 0) throw std::domain_error("intensities must be >= 0");
  if (n < 0) throw std::domain_error("photon number must be >= 0");
  if (xi < 0) throw std::domain_error("correlation range must be >= 0");
  const double d = cfg.delta_max;
  if (d < 0) throw std::domain_error("delta_max must be >= 0");
  for (double c : {a, b, cfg.mu, cfg.nu, cfg.omega})
    if (!(c * (1 + d) < 1))
      throw std::domain_error("intensity upper endpoint c*(1+delta_max) must be < 1");
  if (n >= 1 && (a == 0 || b == 0))
    throw std::domain_error("overlap undefined for n >= 1 with a zero-intensity setting");
}

// log of the prefactor common to both overlap bounds
double log_prefactor(double a, double b, int n, double d) {
  if (n == 0) return -2 * d * (a + b);
  // e^{2 d (a+b)} ((1-d)/(1+d))^{2n}
  return 2 * d * (a + b) + 2.0 * n * (std::log1p(-d) - std::log1p(d));
}

}  // namespace

OverlapBound overlap_model_independent(double a, double b, int n, int xi,
                                       const ProtocolConfig& cfg) {
  check_overlap_inputs(a, b, n, xi, cfg);
  const double d = cfg.delta_max;
  // bracket = 1 - sum_c p_c (e^{-c-} - e^{-c+}), kept accurate at tiny d
  double s = 0.0;
  for (Setting st : kAllSettings) {
    const double c = cfg.intensity(st);
    s += cfg.probability(st) * std::exp(-c * (1 - d)) * (-std::expm1(-2 * d * c));
  }
  const double log_bracket = std::log1p(-s);
  return OverlapBound{std::exp(log_prefactor(a, b, n, d) + 2.0 * xi * log_bracket)};
}

OverlapBound overlap_deterministic(double a, double b, int n, int xi,
                                   const ProtocolConfig& cfg) {
  check_overlap_inputs(a, b, n, xi, cfg);
  const double d = cfg.delta_max;
  // bracket = sum_c p_c exp{ sqrt(c+ c-) - c }, exponent = c (sqrt(1-d^2) - 1)
  const double em = -d * d / (1 + std::sqrt(1 - d * d));
  double s = 0.0;
  for (Setting st : kAllSettings)
    s += cfg.probability(st) * std::expm1(cfg.intensity(st) * em);
  const double log_bracket = std::log1p(s);
  return OverlapBound{std::exp(log_prefactor(a, b, n, d) + 2.0 * xi * log_bracket)};
}

double trace_distance_halfwidth(OverlapBound overlap) {
  if (!(overlap.value > 0 && overlap.value <= 1))
    throw std::domain_error("overlap must lie in (0,1]");
  return std::sqrt(1 - overlap.value);
}

TangentPair linearize(double reference, OverlapBound overlap) {
  if (!(reference >= kReferenceEps && reference <= 1 - kReferenceEps))
    throw std::domain_error("reference value too close to 0 or 1");
  const double z = overlap.value;
  if (!(z > 0 && z <= 1)) throw std::domain_error("overlap must lie in (0,1]");
  TangentPair t;
  const double gl = cs_bound(reference, z, Sign::minus);
  const double sl = cs_bound_derivative(reference, z, Sign::minus);
  t.lower = {gl - sl * reference, sl};
  const double gu = cs_bound(reference, z, Sign::plus);
  const double su = cs_bound_derivative(reference, z, Sign::plus);
  t.upper = {gu - su * reference, su};
  return t;
}

}  // namespace qcorr
