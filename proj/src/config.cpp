#include "qcorr/config.hpp"

#include <cmath>
#include <stdexcept>

namespace qcorr {

namespace {
constexpr double kProbTol = 1e-12;
}

std::string to_string(ConstraintMode m) {
  return m == ConstraintMode::cs_linearized ? "cs_linearized" : "trace_distance";
}

std::string to_string(CorrelationModel m) {
  return m == CorrelationModel::model_independent ? "model_independent" : "deterministic";
}

ConstraintMode constraint_mode_from_string(const std::string& s) {
  if (s == "cs_linearized") return ConstraintMode::cs_linearized;
  if (s == "trace_distance") return ConstraintMode::trace_distance;
  throw std::invalid_argument("unknown constraint_mode: " + s);
}

CorrelationModel correlation_model_from_string(const std::string& s) {
  if (s == "model_independent") return CorrelationModel::model_independent;
  if (s == "deterministic") return CorrelationModel::deterministic;
  throw std::invalid_argument("unknown correlation_model: " + s);
}

void ProtocolConfig::validate() const {
  if (!(mu > nu && nu > omega && omega >= 0))
    throw std::invalid_argument("intensities must satisfy mu > nu > omega >= 0");
  if (delta_max < 0) throw std::invalid_argument("delta_max must be >= 0");
  if (!(mu * (1 + delta_max) < 1))
    throw std::invalid_argument("mu*(1+delta_max) must be < 1");
  if (p_mu < 0 || p_nu < 0 || p_omega < 0 || std::abs(p_mu + p_nu + p_omega - 1) > kProbTol)
    throw std::invalid_argument("setting probabilities must be nonnegative and sum to 1");
  if (q_z < 0 || q_x < 0 || std::abs(q_z + q_x - 1) > kProbTol)
    throw std::invalid_argument("basis probabilities must be nonnegative and sum to 1");
  if (xi < 0) throw std::invalid_argument("xi must be >= 0");
  if (n_cut < 1) throw std::invalid_argument("n_cut must be >= 1");
}

double ChannelParams::eta() const {
  return eta_det * std::pow(10.0, -alpha_att * distance_km / 10.0);
}

void ChannelParams::validate() const {
  if (eta_det < 0 || eta_det > 1) throw std::invalid_argument("eta_det must be in [0,1]");
  if (alpha_att < 0) throw std::invalid_argument("alpha_att must be >= 0");
  if (distance_km < 0) throw std::invalid_argument("distance_km must be >= 0");
  if (p_dark < 0 || p_dark > 1) throw std::invalid_argument("p_dark must be in [0,1]");
  if (f_ec < 1) throw std::invalid_argument("f_ec must be >= 1");
  if (e_tol && (*e_tol < 0 || *e_tol > 1))
    throw std::invalid_argument("e_tol must be in [0,1]");
  double e = eta();
  if (e < 0 || e > 1) throw std::invalid_argument("overall transmittance out of [0,1]");
}

void SecurityParams::validate() const {
  for (double e : {eps_s, eps_pa, eps_cor, delta})
    if (!(e > 0 && e < 1))
      throw std::invalid_argument("security parameters must lie in (0,1)");
}

}  // namespace qcorr
