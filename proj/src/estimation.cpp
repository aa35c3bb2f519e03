#include "qcorr/estimation.hpp"

#include <cmath>

#include "qcorr/bounds.hpp"

namespace qcorr {

void DecoyObservations::validate() const {
  auto in01 = [](const Eigen::Vector3d& v) {
    return (v.array() >= 0).all() && (v.array() <= 1).all() && v.allFinite();
  };
  if (!in01(z_gain) || !in01(x_gain) || !in01(x_error))
    throw std::invalid_argument("normalized observations must lie in [0,1]");
  if ((x_error.array() > x_gain.array()).any())
    throw std::invalid_argument("X error counts cannot exceed X gains");
  if (z_error && !in01(*z_error))
    throw std::invalid_argument("normalized Z errors must lie in [0,1]");
  if (rounds && !(*rounds >= 1)) throw std::invalid_argument("round count must be >= 1");
}

DecoyObservations model_observations(const ProtocolConfig& cfg, const ChannelParams& ch) {
  cfg.validate();
  ch.validate();
  DecoyObservations obs;
  Eigen::Vector3d zerr;
  for (int s = 0; s < kNumSettings; ++s) {
    const double a = cfg.intensity(static_cast<Setting>(s));
    obs.z_gain(s) = expected_gain(a, ch);
    obs.x_gain(s) = obs.z_gain(s);
    obs.x_error(s) = expected_error(a, ch);
    zerr(s) = obs.x_error(s);
  }
  obs.z_error = zerr;
  return obs;
}

namespace {

struct BuilderInputs {
  Eigen::Vector3d observed;
  const Eigen::MatrixXd& references;  // (n_cut+1) x 3
  bool maximize;
};

int var_index(int setting, int n, int n_cut) { return setting * (n_cut + 1) + n; }

// Pairwise cross-setting constraints are skipped for n >= 1 when a setting
// has zero intensity: conditioning on photons from a vacuum pulse is a null
// event and the overlap bound is undefined there.
bool pair_active(const ProtocolConfig& cfg, Setting a, Setting b, int n) {
  return n == 0 || (cfg.intensity(a) > 0 && cfg.intensity(b) > 0);
}

LinearProgram build_decoy_lp(const BuilderInputs& in, const ProtocolConfig& cfg) {
  cfg.validate();
  const int ncut = cfg.n_cut;
  const int V = kNumSettings * (ncut + 1);
  const bool cs = cfg.constraint_mode == ConstraintMode::cs_linearized;

  int rows = 2 * kNumSettings;
  for (int n = 0; n <= ncut; ++n)
    for (int sa = 0; sa < kNumSettings; ++sa)
      for (int sb = cs ? 0 : sa + 1; sb < kNumSettings; ++sb) {
        if (sa == sb) continue;
        if (pair_active(cfg, static_cast<Setting>(sa), static_cast<Setting>(sb), n)) rows += 2;
      }

  LinearProgram lp(V);
  lp.var_lower.setZero();
  lp.var_upper.setOnes();
  lp.objective.setZero();
  lp.objective(var_index(0, 1, ncut)) = 1.0;  // y_{1,mu} / h_{1,mu}
  lp.maximize = in.maximize;
  lp.coeffs = Eigen::MatrixXd::Zero(rows, V);
  lp.rhs.resize(rows);
  lp.senses.assign(rows, Sense::le);

  int r = 0;
  for (int s = 0; s < kNumSettings; ++s) {
    const double a = cfg.intensity(static_cast<Setting>(s));
    // sum_n low_n v_n <= observed
    for (int n = 0; n <= ncut; ++n)
      lp.coeffs(r, var_index(s, n, ncut)) = photon_number_interval(a, n, cfg.delta_max).low;
    lp.senses[r] = Sense::le;
    lp.rhs(r) = in.observed(s);
    ++r;
    // sum_n high_n v_n >= observed - tail mass above n_cut at the upper endpoint
    const double a_hi = a * (1 + cfg.delta_max);
    for (int n = 0; n <= ncut; ++n)
      lp.coeffs(r, var_index(s, n, ncut)) = photon_number_interval(a, n, cfg.delta_max).high;
    lp.senses[r] = Sense::ge;
    lp.rhs(r) = in.observed(s) - poisson_upper_tail(a_hi, ncut);
    ++r;
  }

  for (int n = 0; n <= ncut; ++n) {
    for (int sa = 0; sa < kNumSettings; ++sa) {
      for (int sb = cs ? 0 : sa + 1; sb < kNumSettings; ++sb) {
        if (sa == sb) continue;
        const Setting a = static_cast<Setting>(sa), b = static_cast<Setting>(sb);
        if (!pair_active(cfg, a, b, n)) continue;
        const double ia = cfg.intensity(a), ib = cfg.intensity(b);
        const OverlapBound ov = cfg.correlation_model == CorrelationModel::deterministic
                                    ? overlap_deterministic(ia, ib, n, cfg.xi, cfg)
                                    : overlap_model_independent(ia, ib, n, cfg.xi, cfg);
        const int va = var_index(sa, n, ncut), vb = var_index(sb, n, ncut);
        if (cs) {
          const TangentPair t = linearize(in.references(n, sa), ov);
          // v_b <= c+ + m+ v_a
          lp.coeffs(r, vb) = 1.0;
          lp.coeffs(r, va) = -t.upper.slope;
          lp.senses[r] = Sense::le;
          lp.rhs(r) = t.upper.intercept;
          ++r;
          // v_b >= c- + m- v_a
          lp.coeffs(r, vb) = 1.0;
          lp.coeffs(r, va) = -t.lower.slope;
          lp.senses[r] = Sense::ge;
          lp.rhs(r) = t.lower.intercept;
          ++r;
        } else {
          const double w = trace_distance_halfwidth(ov);
          lp.coeffs(r, va) = 1.0;
          lp.coeffs(r, vb) = -1.0;
          lp.senses[r] = Sense::le;
          lp.rhs(r) = w;
          ++r;
          lp.coeffs(r, va) = 1.0;
          lp.coeffs(r, vb) = -1.0;
          lp.senses[r] = Sense::ge;
          lp.rhs(r) = -w;
          ++r;
        }
      }
    }
  }
  return lp;
}

}  // namespace

LinearProgram build_yield_lp(const DecoyObservations& obs, Basis basis,
                             const ProtocolConfig& cfg, const ReferenceStatistics& refs) {
  obs.validate();
  return build_decoy_lp({basis == Basis::z ? obs.z_gain : obs.x_gain, refs.yields, false}, cfg);
}

LinearProgram build_error_lp(const DecoyObservations& obs, const ProtocolConfig& cfg,
                             const ReferenceStatistics& refs) {
  obs.validate();
  return build_decoy_lp({obs.x_error, refs.errors, true}, cfg);
}

DecoyLpLayout decoy_lp_layout(const ProtocolConfig& cfg) {
  DecoyLpLayout layout;
  layout.variables = kNumSettings * (cfg.n_cut + 1);
  layout.decoy_rows = 2 * kNumSettings;
  const bool cs = cfg.constraint_mode == ConstraintMode::cs_linearized;
  for (int n = 0; n <= cfg.n_cut; ++n)
    for (int sa = 0; sa < kNumSettings; ++sa)
      for (int sb = cs ? 0 : sa + 1; sb < kNumSettings; ++sb) {
        if (sa == sb) continue;
        if (pair_active(cfg, static_cast<Setting>(sa), static_cast<Setting>(sb), n))
          ++layout.pair_records;
      }
  layout.total_rows = layout.decoy_rows + 2 * layout.pair_records;
  return layout;
}

SinglePhotonBounds estimate_with_refs(const DecoyObservations& obs, const ProtocolConfig& cfg,
                                      const ReferenceStatistics& refs) {
  const LpSolution sol_z = solve(build_yield_lp(obs, Basis::z, cfg, refs));
  if (sol_z.status != LpStatus::optimal)
    throw estimation_error("Z-basis yield LP: " + to_string(sol_z.status), sol_z.status);

  LpSolution sol_x;
  if (obs.x_gain == obs.z_gain) {
    sol_x = sol_z;
  } else {
    sol_x = solve(build_yield_lp(obs, Basis::x, cfg, refs));
    if (sol_x.status != LpStatus::optimal)
      throw estimation_error("X-basis yield LP: " + to_string(sol_x.status), sol_x.status);
  }

  const LpSolution sol_e = solve(build_error_lp(obs, cfg, refs));
  if (sol_e.status != LpStatus::optimal)
    throw estimation_error("error LP: " + to_string(sol_e.status), sol_e.status);

  SinglePhotonBounds b;
  b.y1_z_low = std::clamp(sol_z.objective, 0.0, 1.0);
  b.y1_x_low = std::clamp(sol_x.objective, 0.0, 1.0);
  b.h1_up = std::clamp(sol_e.objective, 0.0, 1.0);
  const double mu_lo = cfg.mu * (1 - cfg.delta_max);
  const double mu_hi = cfg.mu * (1 + cfg.delta_max);
  b.z1_rate_low = cfg.q_z * cfg.q_z * cfg.p_mu * mu_lo * std::exp(-mu_lo) * b.y1_z_low;
  b.x1_rate_low = cfg.q_x * cfg.q_x * cfg.p_mu * mu_lo * std::exp(-mu_lo) * b.y1_x_low;
  b.e1_rate_up = cfg.q_x * cfg.q_x * cfg.p_mu * mu_hi * std::exp(-mu_hi) * b.h1_up;
  return b;
}

SinglePhotonBounds estimate(const DecoyObservations& obs, const ProtocolConfig& cfg,
                            const ChannelParams& ch) {
  return estimate_with_refs(obs, cfg, reference_statistics(cfg, ch));
}

}  // namespace qcorr
