#include "qcorr/montecarlo.hpp"

#include <cassert>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "qcorr/channel.hpp"

namespace qcorr {

std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::uniform_interval: return "uniform_interval";
    case SamplerKind::two_point_extremes: return "two_point_extremes";
    case SamplerKind::deterministic_memory: return "deterministic_memory";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "uniform_interval") return SamplerKind::uniform_interval;
  if (s == "two_point_extremes") return SamplerKind::two_point_extremes;
  if (s == "deterministic_memory") return SamplerKind::deterministic_memory;
  throw std::invalid_argument("unknown sampler kind: " + s);
}

namespace {

// 53-bit uniform in [0,1); the engine is fully specified by the standard,
// so streams are identical across platforms
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
};

int sample_poisson(Rng& rng, double mean) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cum = p;
  int n = 0;
  while (u >= cum && n < 200) {
    ++n;
    p *= mean / n;
    cum += p;
  }
  return n;
}

class IntensityHistory {
 public:
  explicit IntensityHistory(int xi) : xi_(xi) {}
  void push(double value) {
    if (xi_ == 0) return;
    if (static_cast<int>(buf_.size()) < xi_) {
      buf_.push_back(value);
    } else {
      buf_[head_] = value;
      head_ = (head_ + 1) % xi_;
    }
    last_ = value;
    sum_ = 0;
    for (double v : buf_) sum_ += v;
  }
  bool empty() const { return buf_.empty(); }
  double last() const { return last_; }
  double mean() const { return sum_ / static_cast<double>(buf_.size()); }

 private:
  int xi_;
  std::vector<double> buf_;
  int head_ = 0;
  double last_ = 0, sum_ = 0;
};

double sample_intensity(Rng& rng, const CorrelationSampler& s, const ProtocolConfig& cfg,
                        double setting_value, const IntensityHistory& hist) {
  const double d = s.delta_max;
  switch (s.kind) {
    case SamplerKind::uniform_interval:
      return setting_value * (1 + d * (2 * rng.uniform() - 1));
    case SamplerKind::two_point_extremes: {
      bool plus;
      if (s.xi == 0)
        plus = rng.uniform() < 0.5;
      else if (hist.empty())
        plus = true;
      else
        plus = hist.last() >= setting_value;
      return setting_value * (1 + (plus ? d : -d));
    }
    case SamplerKind::deterministic_memory: {
      if (s.xi == 0 || hist.empty() || cfg.mu == cfg.omega) return setting_value;
      const double span = cfg.mu - cfg.omega;
      const double dev = d * (2 * (hist.mean() - cfg.omega) / span - 1);
      return setting_value * (1 + dev);
    }
  }
  return setting_value;
}

}  // namespace

SessionTally simulate(std::uint64_t rounds, const ProtocolConfig& cfg, const ChannelParams& ch,
                      const CorrelationSampler& sampler, std::uint64_t seed) {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  cfg.validate();
  ch.validate();
  if (sampler.delta_max != cfg.delta_max || sampler.xi != cfg.xi)
    throw std::invalid_argument("sampler delta_max/xi must match the protocol configuration");

  SessionTally t;
  t.rounds = rounds;
  t.seed = seed;
  t.config = cfg;
  t.sampler = sampler.kind;
  const int rowsN = SessionTally::kMaxPhoton + 1;
  t.emitted.setZero(rowsN, 3);
  t.zz_n_sent.setZero(rowsN, 3);
  t.zz_n_click.setZero(rowsN, 3);
  t.xx_n_sent.setZero(rowsN, 3);
  t.xx_n_click.setZero(rowsN, 3);
  t.xx_n_error.setZero(rowsN, 3);

  const double eta = ch.eta();
  const double pd = ch.p_dark;
  // detection categories depend on the photon number only
  std::vector<OutcomeProbs> outcome_table;
  auto outcomes = [&](int n) -> const OutcomeProbs& {
    while (static_cast<int>(outcome_table.size()) <= n)
      outcome_table.push_back(
          detector_outcome_probs(static_cast<int>(outcome_table.size()), eta, ch.misalignment));
    return outcome_table[n];
  };

  Rng rng(seed);
  IntensityHistory hist(cfg.xi);
  const double p_cut1 = cfg.p_mu, p_cut2 = cfg.p_mu + cfg.p_nu;
  const double lo_band = 1 - cfg.delta_max * (1 + 1e-12) - 1e-15;
  const double hi_band = 1 + cfg.delta_max * (1 + 1e-12) + 1e-15;

  for (std::uint64_t k = 0; k < rounds; ++k) {
    const double us = rng.uniform();
    const int s = us < p_cut1 ? 0 : (us < p_cut2 ? 1 : 2);
    const double a = cfg.intensity(static_cast<Setting>(s));
    const bool alice_z = rng.uniform() < cfg.q_z;
    const bool bob_z = rng.uniform() < cfg.q_z;

    const double alpha = sample_intensity(rng, sampler, cfg, a, hist);
    assert(a == 0 ? alpha == 0 : (alpha >= a * lo_band && alpha <= a * hi_band));
    (void)lo_band;
    (void)hi_band;
    hist.push(a);

    const int n = sample_poisson(rng, alpha);
    const int nrow = std::min(n, SessionTally::kMaxPhoton);
    t.sent[s] += 1;
    t.emitted(nrow, s) += 1;

    if (alice_z != bob_z) continue;  // sifted away; detection draws not consumed

    // genuine outcome, then dark counts, then double-click assignment
    const OutcomeProbs& op = outcomes(n);
    const double u = rng.uniform();
    bool correct_click, error_click;
    if (u < op.none) {
      correct_click = error_click = false;
    } else if (u < op.none + op.correct) {
      correct_click = true;
      error_click = false;
    } else if (u < op.none + op.correct + op.error) {
      correct_click = false;
      error_click = true;
    } else {
      correct_click = error_click = true;
    }
    if (pd > 0) {
      correct_click = correct_click || rng.uniform() < pd;
      error_click = error_click || rng.uniform() < pd;
    }
    const bool click = correct_click || error_click;
    bool error = false;
    if (click)
      error = (correct_click && error_click) ? rng.uniform() < 0.5 : error_click;

    if (alice_z) {
      t.zz_sent[s] += 1;
      t.zz_n_sent(nrow, s) += 1;
      if (click) {
        t.zz_click[s] += 1;
        t.zz_n_click(nrow, s) += 1;
        if (error) t.zz_error[s] += 1;
        if (s == 0)
          t.block_zz_click_signal[k * SessionTally::kBlocks / rounds] += 1;
      }
    } else {
      t.xx_sent[s] += 1;
      t.xx_n_sent(nrow, s) += 1;
      if (click) {
        t.xx_click[s] += 1;
        t.xx_n_click(nrow, s) += 1;
        if (error) {
          t.xx_error[s] += 1;
          t.xx_n_error(nrow, s) += 1;
        }
      }
    }
  }
  return t;
}

ObservationsReport to_observations(const SessionTally& t) {
  ObservationsReport rep;
  const ProtocolConfig& cfg = t.config;
  const double n = static_cast<double>(t.rounds);
  Eigen::Vector3d zerr;
  bool zerr_ok = true;
  for (int s = 0; s < kNumSettings; ++s) {
    const double ps = cfg.probability(static_cast<Setting>(s));
    const double wz = n * cfg.q_z * cfg.q_z * ps;
    const double wx = n * cfg.q_x * cfg.q_x * ps;
    const std::string name = s == 0 ? "mu" : (s == 1 ? "nu" : "omega");
    if (wz > 0) {
      rep.observations.z_gain(s) = static_cast<double>(t.zz_click[s]) / wz;
      zerr(s) = static_cast<double>(t.zz_error[s]) / wz;
    } else {
      rep.observations.z_gain(s) = std::numeric_limits<double>::quiet_NaN();
      zerr_ok = false;
      rep.missing.push_back("z_gain[" + name + "]");
    }
    if (wx > 0) {
      rep.observations.x_gain(s) = static_cast<double>(t.xx_click[s]) / wx;
      rep.observations.x_error(s) = static_cast<double>(t.xx_error[s]) / wx;
    } else {
      rep.observations.x_gain(s) = std::numeric_limits<double>::quiet_NaN();
      rep.observations.x_error(s) = std::numeric_limits<double>::quiet_NaN();
      rep.missing.push_back("x_gain[" + name + "]");
    }
  }
  if (zerr_ok) rep.observations.z_error = zerr;
  rep.observations.rounds = n;
  return rep;
}

void write_tally_csv(const SessionTally& t, std::ostream& out) {
  out << "record,setting,basis,n,sent,clicked,errored,emitted\n";
  const char* names[3] = {"mu", "nu", "omega"};
  for (int s = 0; s < 3; ++s) {
    out << "totals," << names[s] << ",Z,," << t.zz_sent[s] << "," << t.zz_click[s] << ","
        << t.zz_error[s] << "," << t.sent[s] << "\n";
    out << "totals," << names[s] << ",X,," << t.xx_sent[s] << "," << t.xx_click[s] << ","
        << t.xx_error[s] << "," << t.sent[s] << "\n";
  }
  for (int n = 0; n <= SessionTally::kMaxPhoton; ++n)
    for (int s = 0; s < 3; ++s) {
      out << "photon," << names[s] << ",Z," << n << "," << t.zz_n_sent(n, s) << ","
          << t.zz_n_click(n, s) << ",," << t.emitted(n, s) << "\n";
      out << "photon," << names[s] << ",X," << n << "," << t.xx_n_sent(n, s) << ","
          << t.xx_n_click(n, s) << "," << t.xx_n_error(n, s) << "," << t.emitted(n, s) << "\n";
    }
}

namespace {
// one-sided binomial z-score of observing phat given success probability p0
double binomial_z(double phat, double p0, double m) {
  if (m <= 0) return 0.0;
  const double sd = std::sqrt(std::max(p0 * (1 - p0), 1e-300) / m);
  return (phat - p0) / sd;
}

double poisson_tail_ge(double mean, std::uint64_t k) {  // P(X >= k)
  if (k == 0) return 1.0;
  double term = std::exp(-mean);
  double below = 0.0;
  for (std::uint64_t i = 0; i < k; ++i) {
    below += term;
    term *= mean / static_cast<double>(i + 1);
  }
  return std::max(0.0, 1.0 - below);
}

double poisson_tail_le(double mean, std::uint64_t k) {  // P(X <= k)
  double term = std::exp(-mean);
  double cum = term;
  for (std::uint64_t i = 0; i < k; ++i) {
    term *= mean / static_cast<double>(i + 1);
    cum += term;
  }
  return std::min(1.0, cum);
}

// The Gaussian z-test misjudges bins whose expected count is O(1): one rare
// multi-photon pulse is a ~4% event, not a 4 sigma one. Small-count
// decisions use the exact Poisson tail at the equivalent p-value.
bool coverage_pass(std::uint64_t k, double m, const PhotonInterval& iv, double z_threshold,
                   double z) {
  if (z <= z_threshold) return true;
  const double p_threshold = 0.5 * std::erfc(z_threshold / std::sqrt(2.0));
  const double phat = static_cast<double>(k) / m;
  if (phat > iv.high) return poisson_tail_ge(m * iv.high, k) >= p_threshold;
  return poisson_tail_le(m * iv.low, k) >= p_threshold;
}
}  // namespace

IntervalCheckReport check_interval_coverage(const SessionTally& t, int max_n,
                                            double z_threshold) {
  IntervalCheckReport rep;
  for (int s = 0; s < kNumSettings; ++s) {
    const Setting st = static_cast<Setting>(s);
    const double a = t.config.intensity(st);
    const double m = static_cast<double>(t.sent[s]);
    if (m == 0) continue;
    for (int n = 0; n <= max_n && n < SessionTally::kMaxPhoton; ++n) {
      const PhotonInterval iv = photon_number_interval(a, n, t.config.delta_max);
      const std::uint64_t k = t.emitted(n, s);
      const double phat = static_cast<double>(k) / m;
      double z = 0;
      if (phat < iv.low) z = -binomial_z(phat, iv.low, m);
      if (phat > iv.high) z = binomial_z(phat, iv.high, m);
      const bool pass = coverage_pass(k, m, iv, z_threshold, z);
      rep.rows.push_back({st, n, phat, iv.low, iv.high, z, pass});
      rep.pass = rep.pass && pass;
    }
  }
  return rep;
}

namespace {

// Standard deviations of the normalized observations; click counts are
// treated as Poisson.
Eigen::Vector3d observation_sigmas(const SessionTally& t, bool z_basis, bool errors) {
  Eigen::Vector3d sig;
  for (int s = 0; s < kNumSettings; ++s) {
    const double q = z_basis ? t.config.q_z : t.config.q_x;
    const double w = static_cast<double>(t.rounds) * q * q *
                     t.config.probability(static_cast<Setting>(s));
    const std::uint64_t counts = z_basis ? t.zz_click[s] : (errors ? t.xx_error[s] : t.xx_click[s]);
    sig(s) = std::sqrt(static_cast<double>(std::max<std::uint64_t>(counts, 1))) / w;
  }
  return sig;
}

// One-sided finite-difference sensitivity of an LP bound to each of the
// three normalized observations it consumes. The optimum is piecewise
// linear in the observation vector, so this is exact away from basis
// changes and the right scale at them.
Eigen::Vector3d lp_sensitivity(const DecoyObservations& obs, const ProtocolConfig& cfg,
                               const ReferenceStatistics& refs, const Eigen::Vector3d& sigmas,
                               bool error_lp, Basis basis, double base_value) {
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  for (int s = 0; s < kNumSettings; ++s) {
    const double h = std::max(sigmas(s), 1e-12);
    for (double direction : {+1.0, -1.0}) {
      DecoyObservations pert = obs;
      (error_lp ? pert.x_error : (basis == Basis::z ? pert.z_gain : pert.x_gain))(s) +=
          direction * h;
      const LinearProgram lp = error_lp ? build_error_lp(pert, cfg, refs)
                                        : build_yield_lp(pert, basis, cfg, refs);
      const LpSolution sol = solve(lp);
      if (sol.status != LpStatus::optimal) continue;  // try the other side
      grad(s) = (sol.objective - base_value) / (direction * h);
      break;
    }
  }
  return grad;
}

}  // namespace

SoundnessReport check_estimation_soundness(const SessionTally& t, const ChannelParams& ch,
                                           double z_threshold) {
  const ObservationsReport obs = to_observations(t);
  if (!obs.complete())
    throw std::invalid_argument("tally does not populate all settings/bases");
  const ReferenceStatistics refs = reference_statistics(t.config, ch);
  const SinglePhotonBounds b = estimate_with_refs(obs.observations, t.config, refs);

  SoundnessReport rep{};
  const int sig = 0;
  const double mz = static_cast<double>(t.zz_n_sent(1, sig));
  const double mx = static_cast<double>(t.xx_n_sent(1, sig));
  if (mz == 0 || mx == 0)
    throw std::invalid_argument("no single-photon signal rounds in the tally");
  rep.y1_bound = b.y1_z_low;
  rep.y1_empirical = static_cast<double>(t.zz_n_click(1, sig)) / mz;
  rep.h1_bound = b.h1_up;
  rep.h1_empirical = static_cast<double>(t.xx_n_error(1, sig)) / mx;

  // total sigma: binomial error of the empirical truth plus the observation
  // noise propagated through the LP
  const Eigen::Vector3d sig_z = observation_sigmas(t, true, false);
  const Eigen::Vector3d sig_e = observation_sigmas(t, false, true);
  const Eigen::Vector3d grad_y =
      lp_sensitivity(obs.observations, t.config, refs, sig_z, false, Basis::z, b.y1_z_low);
  const Eigen::Vector3d grad_h =
      lp_sensitivity(obs.observations, t.config, refs, sig_e, true, Basis::x, b.h1_up);
  const double var_y_lp = (grad_y.array().square() * sig_z.array().square()).sum();
  const double var_h_lp = (grad_h.array().square() * sig_e.array().square()).sum();
  const double sd_y =
      std::sqrt(std::max(rep.y1_empirical * (1 - rep.y1_empirical), 1e-300) / mz + var_y_lp);
  const double sd_h =
      std::sqrt(std::max(rep.h1_bound * (1 - rep.h1_bound), 1e-300) / mx + var_h_lp);

  rep.y1_z_score = (rep.y1_empirical - rep.y1_bound) / sd_y;
  rep.h1_z_score = (rep.h1_empirical - rep.h1_bound) / sd_h;
  // the lower bound may not exceed truth (z < -thr fails), the upper bound
  // may not undercut it (z > +thr fails)
  rep.pass = rep.y1_z_score >= -z_threshold && rep.h1_z_score <= z_threshold;
  return rep;
}

VarianceDecayReport variance_decay(const std::vector<std::vector<SessionTally>>& groups) {
  if (groups.size() < 3)
    throw std::invalid_argument("variance decay needs at least 3 round counts");
  VarianceDecayReport rep;
  for (const auto& g : groups) {
    if (g.size() < 30)
      throw std::invalid_argument("variance decay needs at least 30 seeds per round count");
    const double n = static_cast<double>(g.front().rounds);
    double mean = 0;
    for (const auto& t : g) {
      if (static_cast<double>(t.rounds) != n)
        throw std::invalid_argument("mixed round counts within a variance group");
      mean += t.zbar(Setting::signal);
    }
    mean /= static_cast<double>(g.size());
    double var = 0;
    for (const auto& t : g) {
      const double d = t.zbar(Setting::signal) - mean;
      var += d * d;
    }
    var /= static_cast<double>(g.size() - 1);
    rep.points.push_back({n, static_cast<int>(g.size()), var});
  }
  // least-squares line through (log N, log Var)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(rep.points.size());
  for (const auto& p : rep.points) {
    const double x = std::log(p.rounds), y = std::log(std::max(p.variance, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  rep.intercept = (sy - rep.exponent * sx) / m;
  return rep;
}

}  // namespace qcorr
