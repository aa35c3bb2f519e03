#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>

#include "qcorr/channel.hpp"
#include "qcorr/config.hpp"
#include "qcorr/lp.hpp"

namespace qcorr {

enum class Basis { z, x };

/// Observed (or expected) session averages, normalized per setting by the
/// selection probabilities: <Zbar_a>/(q_z^2 p_a) and the X-basis twins.
/// Entries are indexed by Setting.
struct DecoyObservations {
  Eigen::Vector3d z_gain = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_gain = Eigen::Vector3d::Zero();
  Eigen::Vector3d x_error = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector3d> z_error;  // feeds the default E_tol
  std::optional<double> rounds;            // absent in pure-asymptotic mode

  double gain(Basis b, Setting s) const {
    return (b == Basis::z ? z_gain : x_gain)(static_cast<int>(s));
  }
  void validate() const;
};

/// Expected observations of the typical channel model (the simulation inputs).
DecoyObservations model_observations(const ProtocolConfig& cfg, const ChannelParams& ch);

/// Decoy LP over yields y_{n,a}, n = 0..n_cut, a in {mu,nu,omega}, boxed to
/// [0,1]: interval-endpoint decoy rows plus pairwise cross-setting
/// constraints (linearized CS tangents or trace-distance bands, per
/// cfg.constraint_mode). Objective: minimize y_{1,mu}.
LinearProgram build_yield_lp(const DecoyObservations& obs, Basis basis,
                             const ProtocolConfig& cfg, const ReferenceStatistics& refs);

/// Same structure over error probabilities h_{n,a}; objective: maximize
/// h_{1,mu}.
LinearProgram build_error_lp(const DecoyObservations& obs, const ProtocolConfig& cfg,
                             const ReferenceStatistics& refs);

/// Row bookkeeping of the builders, for structural tests and diagnostics.
struct DecoyLpLayout {
  int decoy_rows = 0;    // one-sided interval rows (2 per setting)
  int pair_records = 0;  // two-sided cross-setting constraint records
  int total_rows = 0;
  int variables = 0;
};
DecoyLpLayout decoy_lp_layout(const ProtocolConfig& cfg);

/// Thrown when any estimation LP reports a non-optimal status: the
/// observations are inconsistent with the declared model (wrong
/// configuration, or an attack outside the assumed correlation bounds).
class estimation_error : public std::runtime_error {
 public:
  estimation_error(const std::string& what, LpStatus status)
      : std::runtime_error(what), status_(status) {}
  LpStatus status() const { return status_; }

 private:
  LpStatus status_;
};

/// Certified bounds on the signal-setting single-photon statistics, plus the
/// converted per-pulse count rates
///   Zbar1 = q_z^2 p_mu mu- e^{-mu-} y1,   Ebar1 = q_x^2 p_mu mu+ e^{-mu+} h1.
struct SinglePhotonBounds {
  double y1_z_low = 0.0;  // Z-basis single-photon yield, lower bound
  double y1_x_low = 0.0;  // X-basis twin
  double h1_up = 1.0;     // single-photon error probability, upper bound
  double z1_rate_low = 0.0;
  double x1_rate_low = 0.0;
  double e1_rate_up = 0.0;
};

/// Solves the three LPs (Z yield, X yield, error) and applies the rate
/// conversion factors. Pure; when the Z and X observation vectors are
/// bitwise equal the yield solve is shared.
SinglePhotonBounds estimate(const DecoyObservations& obs, const ProtocolConfig& cfg,
                            const ChannelParams& ch);

/// estimate() with the reference statistics precomputed (hot path of the
/// intensity optimizer).
SinglePhotonBounds estimate_with_refs(const DecoyObservations& obs, const ProtocolConfig& cfg,
                                      const ReferenceStatistics& refs);

}  // namespace qcorr
