#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace qcorr {

/// Intensity settings of the three-intensity decoy protocol, strongest first.
enum class Setting : int { signal = 0, decoy = 1, vacuum = 2 };
inline constexpr int kNumSettings = 3;
inline constexpr std::array<Setting, 3> kAllSettings = {Setting::signal, Setting::decoy,
                                                        Setting::vacuum};

enum class ConstraintMode { cs_linearized, trace_distance };
enum class CorrelationModel { model_independent, deterministic };

std::string to_string(ConstraintMode m);
std::string to_string(CorrelationModel m);
ConstraintMode constraint_mode_from_string(const std::string& s);
CorrelationModel correlation_model_from_string(const std::string& s);

/// Protocol-side configuration: intensities, selection probabilities,
/// correlation characterization (delta_max, xi) and estimation knobs.
struct ProtocolConfig {
  double mu = 0.5;
  double nu = 0.17;
  double omega = 1e-4;
  // Setting probabilities. The asymptotic rate does not depend on p_nu,
  // p_omega or q_x, so the defaults take the p_mu ~ 1, q_z ~ 1 limit.
  double p_mu = 1.0;
  double p_nu = 0.0;
  double p_omega = 0.0;
  double q_z = 1.0;
  double q_x = 0.0;
  double delta_max = 0.0;     // max relative intensity deviation
  int xi = 1;                 // correlation range (settings of memory)
  int n_cut = 10;             // photon-number truncation of the LPs
  ConstraintMode constraint_mode = ConstraintMode::cs_linearized;
  CorrelationModel correlation_model = CorrelationModel::model_independent;

  double intensity(Setting s) const {
    return s == Setting::signal ? mu : (s == Setting::decoy ? nu : omega);
  }
  double probability(Setting s) const {
    return s == Setting::signal ? p_mu : (s == Setting::decoy ? p_nu : p_omega);
  }

  /// Throws std::invalid_argument on any violated invariant:
  /// mu > nu > omega >= 0, mu(1+delta_max) < 1, probabilities normalized,
  /// delta_max >= 0, xi >= 0, n_cut >= 1.
  void validate() const;
};

/// Channel/detector parameters of the simulated-observation model.
struct ChannelParams {
  double eta_det = 0.65;     // detector efficiency
  double alpha_att = 0.2;    // fiber attenuation, dB/km
  double distance_km = 0.0;
  double p_dark = 7.2e-8;    // dark count probability per detector
  double misalignment = 0.08;  // polarization misalignment angle, rad
  double f_ec = 1.16;        // error-correction efficiency
  std::optional<double> e_tol;  // tolerated bit error rate; derived if unset

  /// Overall transmittance eta = eta_det * 10^(-alpha_att L / 10).
  double eta() const;

  void validate() const;
};

/// Failure probabilities of the finite-key analysis.
struct SecurityParams {
  double eps_s = 1e-10;    // Serfling (phase-error) bound
  double eps_pa = 1e-10;   // privacy amplification
  double eps_cor = 1e-10;  // correctness
  double delta = 1e-10;    // smoothing

  double eps_sec() const { return 2 * eps_s + eps_pa + delta; }
  void validate() const;
};

}  // namespace qcorr
