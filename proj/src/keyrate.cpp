#include "qcorr/keyrate.hpp"

#include <cmath>
#include <stdexcept>

#include "qcorr/channel.hpp"

namespace qcorr {

double binary_entropy(double x) {
  if (!(x >= 0 && x <= 1)) throw std::domain_error("binary_entropy requires x in [0,1]");
  if (x == 0 || x == 1) return 0.0;
  return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

double serfling_deviation(double z1_rate, double x1_rate, double rounds, double eps_s) {
  if (!(z1_rate > 0) || !(x1_rate > 0))
    throw std::domain_error("serfling_deviation requires positive rate bounds");
  if (!(rounds >= 1)) throw std::domain_error("serfling_deviation requires N >= 1");
  if (!(eps_s > 0 && eps_s <= 1)) throw std::domain_error("eps_s must lie in (0,1]");
  const double num = (x1_rate + z1_rate) * (z1_rate + 1.0 / rounds) * std::log2(1.0 / eps_s);
  const double den = 2.0 * rounds * z1_rate * z1_rate * x1_rate;
  return std::sqrt(num / den);
}

double resolve_e_tol(const DecoyObservations& obs, const ProtocolConfig& cfg,
                     const ChannelParams& ch) {
  if (ch.e_tol) return *ch.e_tol;
  const int sig = static_cast<int>(Setting::signal);
  if (obs.z_error && obs.z_gain(sig) > 0) return (*obs.z_error)(sig) / obs.z_gain(sig);
  return expected_error(cfg.mu, ch) / expected_gain(cfg.mu, ch);
}

namespace {

KeyRateResult rate_impl(const SinglePhotonBounds& bounds, const DecoyObservations& obs,
                        const ProtocolConfig& cfg, const ChannelParams& ch,
                        double serfling_term, double finite_size_term, bool finite_mode) {
  KeyRateResult r;
  r.finite_mode = finite_mode;
  r.serfling_term = serfling_term;
  r.finite_size_term = finite_size_term;
  r.e_tol = resolve_e_tol(obs, cfg, ch);

  const double mu_lo = cfg.mu * (1 - cfg.delta_max);
  const double mu_hi = cfg.mu * (1 + cfg.delta_max);
  // q_x^2 p_mu cancels between Ebar1^U and Xbar1^L
  const double x_scale = mu_lo * std::exp(-mu_lo) * bounds.y1_x_low;
  if (x_scale <= 0) {
    r.reason = RateReason::x_bound_zero;
    r.phase_error_ratio = std::numeric_limits<double>::infinity();
    r.phase_error_ratio_clamped = 0.5;
  } else {
    r.phase_error_ratio = mu_hi * std::exp(-mu_hi) * bounds.h1_up / x_scale;
    const double arg = r.phase_error_ratio + serfling_term;
    r.phase_error_ratio_clamped = std::clamp(arg, 0.0, 0.5);
    if (arg > 0.5) r.reason = RateReason::entropy_saturated;
  }

  const double zbar_mu =
      cfg.q_z * cfg.q_z * cfg.p_mu * obs.z_gain(static_cast<int>(Setting::signal));
  r.key_term = bounds.z1_rate_low * (1 - binary_entropy(r.phase_error_ratio_clamped));
  r.ec_term = ch.f_ec * zbar_mu * binary_entropy(r.e_tol);
  r.raw_rate = r.key_term - r.ec_term - finite_size_term;
  r.rate = std::max(r.raw_rate, 0.0);
  return r;
}

}  // namespace

KeyRateResult asymptotic_rate(const SinglePhotonBounds& bounds, const DecoyObservations& obs,
                              const ProtocolConfig& cfg, const ChannelParams& ch) {
  return rate_impl(bounds, obs, cfg, ch, 0.0, 0.0, false);
}

KeyRateResult finite_rate(const SinglePhotonBounds& bounds, const DecoyObservations& obs,
                          const ProtocolConfig& cfg, const ChannelParams& ch, double rounds,
                          const SecurityParams& sec) {
  sec.validate();
  if (!(rounds >= 1)) throw std::domain_error("finite_rate requires N >= 1");
  const double fs =
      std::log2(1.0 / (sec.eps_cor * sec.eps_pa * sec.eps_pa * sec.delta)) / rounds;
  double serf = 0.0;
  if (bounds.z1_rate_low > 0 && bounds.x1_rate_low > 0)
    serf = serfling_deviation(bounds.z1_rate_low, bounds.x1_rate_low, rounds, sec.eps_s);
  KeyRateResult r = rate_impl(bounds, obs, cfg, ch, serf, fs, true);
  if (!(bounds.z1_rate_low > 0 && bounds.x1_rate_low > 0)) {
    r.reason = RateReason::x_bound_zero;
    r.rate = 0.0;
  }
  return r;
}

}  // namespace qcorr
