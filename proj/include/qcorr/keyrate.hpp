#pragma once

#include "qcorr/config.hpp"
#include "qcorr/estimation.hpp"

namespace qcorr {

/// Binary entropy in bits, with 0 log 0 = 0. Domain error outside [0,1].
double binary_entropy(double x);

/// Serfling deviation term of the phase-error estimate,
///   sqrt( (x1+z1)(z1+1/N) log2(1/eps_s) / (2 N z1^2 x1) ).
/// Logarithms are base 2 throughout the module (bits).
double serfling_deviation(double z1_rate, double x1_rate, double rounds, double eps_s);

enum class RateReason {
  ok,
  x_bound_zero,       // X-basis single-photon bound vanished; ratio undefined
  entropy_saturated,  // phase-error argument reached 1/2
};

struct KeyRateResult {
  double rate = 0.0;      // max(raw_rate, 0)
  double raw_rate = 0.0;  // may be negative
  double phase_error_ratio = 0.0;          // raw Ebar1/Xbar1, before clamping
  double phase_error_ratio_clamped = 0.0;  // entropy argument actually used
  double key_term = 0.0;                   // Zbar1^L (1 - h(...))
  double ec_term = 0.0;                    // f_EC Zbar_mu h(E_tol)
  double serfling_term = 0.0;
  double finite_size_term = 0.0;  // (1/N) log2(1/(eps_cor eps_PA^2 delta))
  double e_tol = 0.0;             // resolved tolerated error rate
  bool finite_mode = false;
  RateReason reason = RateReason::ok;
};

/// Asymptotic rate K_inf = Zbar1^L [1 - h(Ebar1^U/Xbar1^L)] - f_EC Zbar_mu h(E_tol).
/// The phase-error ratio is evaluated in the q_x-cancelled form
/// (mu+ e^{-mu+} h1) / (mu- e^{-mu-} y1'), so the q_x -> 0 limit is exact.
KeyRateResult asymptotic_rate(const SinglePhotonBounds& bounds, const DecoyObservations& obs,
                              const ProtocolConfig& cfg, const ChannelParams& ch);

/// Finite-N rate: adds the Serfling deviation inside the entropy and the
/// (1/N) log2(1/(eps_cor eps_PA^2 delta)) correction. Requires positive
/// Zbar1^L and Xbar1^L (so q_x > 0).
KeyRateResult finite_rate(const SinglePhotonBounds& bounds, const DecoyObservations& obs,
                          const ProtocolConfig& cfg, const ChannelParams& ch, double rounds,
                          const SecurityParams& sec);

/// E_tol resolution order: explicit ChannelParams::e_tol, else the observed
/// signal-setting Z error/gain ratio, else the channel-model expectation.
double resolve_e_tol(const DecoyObservations& obs, const ProtocolConfig& cfg,
                     const ChannelParams& ch);

}  // namespace qcorr
