#include "qcorr/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "qcorr/bounds.hpp"

namespace qcorr {

IntensityInterval intensity_interval(double a, double delta_max) {
  if (a < 0 || delta_max < 0) throw std::domain_error("intensity and delta_max must be >= 0");
  return {a * (1 - delta_max), a * (1 + delta_max)};
}

namespace {
double poisson_pmf(double a, int n) {
  if (a == 0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-a + n * std::log(a) - std::lgamma(n + 1.0));
}
}  // namespace

PhotonInterval photon_number_interval(double a, int n, double delta_max) {
  auto [lo, hi] = intensity_interval(a, delta_max);
  if (!(hi < 1)) throw std::domain_error("a*(1+delta_max) must be < 1");
  if (n < 0) throw std::domain_error("photon number must be >= 0");
  // e^{-x} x^n is decreasing in x on (0,1) for n = 0, increasing for n >= 1
  if (n == 0) return {std::exp(-hi), std::exp(-lo)};
  return {poisson_pmf(lo, n), poisson_pmf(hi, n)};
}

double poisson_upper_tail(double intensity, int n_cut) {
  if (intensity < 0 || n_cut < 0) throw std::domain_error("bad tail arguments");
  if (intensity == 0) return 0.0;
  double term = poisson_pmf(intensity, n_cut + 1);
  double tail = 0.0;
  for (int n = n_cut + 1; term > 0 && n < n_cut + 400; ++n) {
    tail += term;
    term *= intensity / (n + 1);
  }
  return tail;
}

double expected_gain(double a, const ChannelParams& ch) {
  const double q = 1 - ch.p_dark;
  return 1 - q * q * std::exp(-ch.eta() * a);
}

double expected_error(double a, const ChannelParams& ch) {
  const double eta = ch.eta();
  const double pd = ch.p_dark;
  const double c = std::cos(ch.misalignment), s = std::sin(ch.misalignment);
  const double h = (std::exp(-eta * a * c * c) - std::exp(-eta * a * s * s)) / 2;
  return pd * pd / 2 + pd * (1 - pd) * (1 + h) +
         (1 - pd) * (1 - pd) * (0.5 + h - 0.5 * std::exp(-eta * a));
}

OutcomeProbs detector_outcome_probs(int n, double eta, double misalignment) {
  if (n < 0) throw std::domain_error("photon number must be >= 0");
  if (eta < 0 || eta > 1) throw std::domain_error("eta must lie in [0,1]");
  const double c = std::cos(misalignment), s = std::sin(misalignment);
  // each photon independently survives with prob eta and flips with prob sin^2
  const double none = std::pow(1 - eta, n);
  const double only_correct_or_none = std::pow(eta * c * c + 1 - eta, n);
  const double only_error_or_none = std::pow(eta * s * s + 1 - eta, n);
  OutcomeProbs p;
  p.none = none;
  p.correct = only_correct_or_none - none;
  p.error = only_error_or_none - none;
  p.both = 1 - p.none - p.correct - p.error;
  return p;
}

ReferenceStatistics reference_statistics(const ProtocolConfig& cfg, const ChannelParams& ch) {
  const double eta = ch.eta();
  const double pd = ch.p_dark;
  ReferenceStatistics refs;
  refs.yields.resize(cfg.n_cut + 1, kNumSettings);
  refs.errors.resize(cfg.n_cut + 1, kNumSettings);
  for (int n = 0; n <= cfg.n_cut; ++n) {
    const OutcomeProbs g = detector_outcome_probs(n, eta, ch.misalignment);
    const double y = 1 - (1 - pd) * (1 - pd) * g.none;
    // dark-count cases: none, in the error detector, in the correct
    // detector, in both; double clicks are assigned by fair coin
    const double err_none = g.error + g.both / 2;
    const double err_in_correct = (g.error + g.both) / 2;
    const double err_in_error = g.none + g.error + (g.correct + g.both) / 2;
    const double err_in_both = 0.5;
    const double h = (1 - pd) * (1 - pd) * err_none +
                     pd * (1 - pd) * (err_in_correct + err_in_error) +
                     pd * pd * err_in_both;
    for (double v : {y, h})
      if (!(v >= kReferenceEps && v <= 1 - kReferenceEps))
        throw std::domain_error(
            "channel-model reference statistic outside the admissible band; "
            "set p_dark > 0 or supply custom references");
    for (int s = 0; s < kNumSettings; ++s) {
      refs.yields(n, s) = y;
      refs.errors(n, s) = h;
    }
  }
  return refs;
}

}  // namespace qcorr
