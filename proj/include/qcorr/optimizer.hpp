#pragma once

#include <string>
#include <vector>

#include "qcorr/config.hpp"
#include "qcorr/keyrate.hpp"

namespace qcorr {

/// Deterministic grid-then-refine search over (mu, nu). The coarse grid
/// runs mu in [nu+step, mu_max], nu in [2*omega, mu-step]; each refinement
/// halves the step around the incumbent. mu_max defaults to
/// 0.95/(1+delta_max).
struct OptimizerSettings {
  double coarse_step = 0.02;
  int refinements = 2;
  double mu_max = 0.0;  // 0 = derive from delta_max

  double resolved_mu_max(double delta_max) const {
    return mu_max > 0 ? mu_max : 0.95 / (1 + delta_max);
  }
};

struct SweepSpec {
  std::vector<double> distances_km;
  std::vector<double> delta_maxes;
  std::vector<int> xis;
  std::vector<ConstraintMode> modes = {ConstraintMode::cs_linearized};
  std::vector<CorrelationModel> models = {CorrelationModel::model_independent};
  OptimizerSettings optimizer;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct OptimizeResult {
  double mu = 0.0;
  double nu = 0.0;
  KeyRateResult rate;
  int evaluations = 0;
};

/// Maximize the asymptotic rate over the (mu, nu) grid for the fixed
/// channel. Ties break toward smaller mu, then smaller nu; all-zero grids
/// return the first valid pair with rate 0.
OptimizeResult optimize_intensities(const ChannelParams& ch, const ProtocolConfig& cfg_template,
                                    const OptimizerSettings& settings);

struct SweepRow {
  double distance_km = 0.0;
  double delta_max = 0.0;
  int xi = 0;
  ConstraintMode mode = ConstraintMode::cs_linearized;
  CorrelationModel model = CorrelationModel::model_independent;
  double mu = 0.0, nu = 0.0;
  double k_inf = 0.0, k_raw = 0.0, key_term = 0.0, ec_term = 0.0;
  bool ok = false;
  std::string status;  // "ok" or the failure reason
};

/// One row per (model, mode, delta_max, xi, distance) grid point, in grid
/// order regardless of scheduling. Row failures land in the row status and
/// never abort the sweep.
std::vector<SweepRow> sweep(const SweepSpec& spec, const ProtocolConfig& cfg_template,
                            const ChannelParams& base_channel);

}  // namespace qcorr
